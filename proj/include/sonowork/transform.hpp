#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sonowork/error.hpp"
#include "sonowork/ingest.hpp"

namespace sonowork {

struct Normalize {};
struct Invert {};
struct Log {};
struct Square {};
struct SquareRoot {};
struct Smooth {
  std::size_t window = 1;
};
struct Cut {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

using TransformStep = std::variant<Normalize, Invert, Log, Square, SquareRoot, Smooth, Cut>;

struct TransformSpec {
  std::vector<TransformStep> steps;
};

namespace detail {

struct FiniteRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;
};

inline FiniteRange finite_range(const std::vector<double>& v) {
  FiniteRange r;
  for (double y : v) {
    if (!std::isfinite(y)) continue;
    r.lo = std::min(r.lo, y);
    r.hi = std::max(r.hi, y);
    r.any = true;
  }
  return r;
}

inline void require_non_empty(const Series& s) {
  if (s.empty()) throw Error(ErrorKind::EmptySeries, "series is empty");
}

inline FiniteRange require_finite_values(const Series& s) {
  require_non_empty(s);
  auto r = finite_range(s.y);
  if (!r.any) throw Error(ErrorKind::AllNaN, "series '" + s.label + "' has no finite values");
  return r;
}

inline void require_normalized(const Series& s, const char* op) {
  require_non_empty(s);
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    const double y = s.y[i];
    if (std::isnan(y)) continue;
    if (!(y >= 0.0 && y <= 1.0))
      throw Error(ErrorKind::NotNormalized,
                  std::string(op) + " needs values in [0, 1]; apply normalize first (value " + std::to_string(y) +
                      " at index " + std::to_string(i) + ")")
          .at_row(i);
  }
}

template <typename F>
Series map_finite(Series s, F&& f) {
  for (double& y : s.y)
    if (!std::isnan(y)) y = f(y);
  return s;
}

}  // namespace detail

/// Rescales finite values onto [0, 1]. A constant series maps to 0.5.
inline Series normalize(Series s) {
  const auto r = detail::require_finite_values(s);
  const double span = r.hi - r.lo;
  if (span == 0.0) return detail::map_finite(std::move(s), [](double) { return 0.5; });
  return detail::map_finite(std::move(s), [&](double y) { return (y - r.lo) / span; });
}

/// Reflects values about the midpoint of their range: y' = min + max - y.
inline Series invert(Series s) {
  const auto r = detail::require_finite_values(s);
  return detail::map_finite(std::move(s), [&](double y) { return r.lo + r.hi - y; });
}

/// y' = log10(1 + 9y), monotone from [0, 1] onto [0, 1].
inline Series log_scale(Series s) {
  detail::require_normalized(s, "log");
  return detail::map_finite(std::move(s), [](double y) { return std::log10(1.0 + 9.0 * y); });
}

inline Series square(Series s) {
  detail::require_normalized(s, "square");
  return detail::map_finite(std::move(s), [](double y) { return y * y; });
}

inline Series square_root(Series s) {
  detail::require_normalized(s, "sqrt");
  return detail::map_finite(std::move(s), [](double y) { return std::sqrt(y); });
}

/// Centered moving average. Near the edges the window is truncated to the
/// available samples; NaN values are left out of each average and a window
/// with no finite values yields NaN.
inline Series smooth(Series s, std::size_t window) {
  detail::require_non_empty(s);
  if (window == 0 || window % 2 == 0 || window > s.size())
    throw Error(ErrorKind::BadWindow, "smoothing window must be odd and between 1 and the series length (" +
                                          std::to_string(s.size()) + "), got " + std::to_string(window));
  if (window == 1) return s;
  const std::size_t half = window / 2;
  const std::size_t n = s.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i >= half ? i - half : 0;
    const std::size_t e = std::min(n - 1, i + half);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = b; j <= e; ++j) {
      if (std::isnan(s.y[j])) continue;
      sum += s.y[j];
      ++count;
    }
    out[i] = count ? sum / static_cast<double>(count) : kNaN;
  }
  s.y = std::move(out);
  return s;
}

/// Keeps samples lo..hi inclusive.
inline Series cut(Series s, std::size_t lo, std::size_t hi) {
  if (lo > hi || hi >= s.size())
    throw Error(ErrorKind::BadRange, "cut range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                         "] is invalid for a series of length " + std::to_string(s.size()));
  const auto b = static_cast<std::ptrdiff_t>(lo);
  const auto e = static_cast<std::ptrdiff_t>(hi) + 1;
  s.x = std::vector<double>(s.x.begin() + b, s.x.begin() + e);
  s.y = std::vector<double>(s.y.begin() + b, s.y.begin() + e);
  return s;
}

inline Series apply_step(Series s, const TransformStep& step) {
  return std::visit(
      [&](const auto& op) -> Series {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Normalize>) return normalize(std::move(s));
        else if constexpr (std::is_same_v<T, Invert>) return invert(std::move(s));
        else if constexpr (std::is_same_v<T, Log>) return log_scale(std::move(s));
        else if constexpr (std::is_same_v<T, Square>) return square(std::move(s));
        else if constexpr (std::is_same_v<T, SquareRoot>) return square_root(std::move(s));
        else if constexpr (std::is_same_v<T, Smooth>) return smooth(std::move(s), op.window);
        else return cut(std::move(s), op.lo, op.hi);
      },
      step);
}

/// Applies the steps left to right. A failure is rethrown with the index of
/// the step that raised it.
inline Series apply_pipeline(Series s, const TransformSpec& spec) {
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    try {
      s = apply_step(std::move(s), spec.steps[i]);
    } catch (Error& e) {
      Error annotated(e.kind(), "step " + std::to_string(i) + ": " + e.what());
      annotated.row = e.row;
      annotated.column = e.column;
      annotated.step = i;
      throw annotated;
    }
  }
  return s;
}

// JSON form: [{"op":"smooth","window":5},{"op":"cut","lo":10,"hi":90}, ...]

inline std::string step_name(const TransformStep& step) {
  static constexpr const char* names[] = {"normalize", "invert", "log", "square", "sqrt", "smooth", "cut"};
  return names[step.index()];
}

inline nlohmann::json to_json_value(const TransformSpec& spec) {
  auto arr = nlohmann::json::array();
  for (const auto& step : spec.steps) {
    nlohmann::json j = {{"op", step_name(step)}};
    if (const auto* sm = std::get_if<Smooth>(&step)) j["window"] = sm->window;
    if (const auto* c = std::get_if<Cut>(&step)) {
      j["lo"] = c->lo;
      j["hi"] = c->hi;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

namespace detail {

inline std::size_t index_field(const nlohmann::json& obj, const char* key, std::size_t step) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw Error(ErrorKind::BadSpec, "step " + std::to_string(step) + ": missing field '" + key + "'").at_step(step);
  if (it->is_number_unsigned()) return it->get<std::size_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (v >= 0.0 && v == std::floor(v) && v < 9.0e15) return static_cast<std::size_t>(v);
  }
  throw Error(ErrorKind::BadSpec,
              "step " + std::to_string(step) + ": field '" + key + "' must be a non-negative integer")
      .at_step(step);
}

}  // namespace detail

/// Validates and converts the JSON step list. Structural problems raise
/// BadSpec and an even or zero smoothing window raises BadWindow, both tagged
/// with the step index. Cut bounds are checked when the step runs.
inline TransformSpec transform_spec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorKind::BadSpec, "transform spec must be a JSON array of steps");
  TransformSpec spec;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& obj = j[i];
    if (!obj.is_object() || !obj.contains("op") || !obj["op"].is_string())
      throw Error(ErrorKind::BadSpec, "step " + std::to_string(i) + ": expected an object with a string 'op'").at_step(i);
    const auto op = obj["op"].get<std::string>();
    if (op == "normalize") spec.steps.emplace_back(Normalize{});
    else if (op == "invert") spec.steps.emplace_back(Invert{});
    else if (op == "log" || op == "log_scale") spec.steps.emplace_back(Log{});
    else if (op == "square") spec.steps.emplace_back(Square{});
    else if (op == "sqrt" || op == "square_root") spec.steps.emplace_back(SquareRoot{});
    else if (op == "smooth") {
      const auto w = detail::index_field(obj, "window", i);
      if (w == 0 || w % 2 == 0)
        throw Error(ErrorKind::BadWindow, "step " + std::to_string(i) + ": smoothing window must be odd and >= 1")
            .at_step(i);
      spec.steps.emplace_back(Smooth{w});
    } else if (op == "cut") {
      spec.steps.emplace_back(Cut{detail::index_field(obj, "lo", i), detail::index_field(obj, "hi", i)});
    } else {
      throw Error(ErrorKind::BadSpec, "step " + std::to_string(i) + ": unknown op '" + op + "'").at_step(i);
    }
  }
  return spec;
}

inline bool ends_with_normalize(const TransformSpec& spec) {
  return !spec.steps.empty() && std::holds_alternative<Normalize>(spec.steps.back());
}

}  // namespace sonowork
