#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonowork/error.hpp"
#include "sonowork/ingest.hpp"

namespace sonowork {

enum class Waveform { Sine, Square };
enum class Mapping { Linear, Logarithmic };

/// Synthesis settings. Valid when 20 <= f_min < f_max <= 0.45 * sample_rate,
/// note_duration >= 2 * envelope_ramp and amplitude is in (0, 1].
struct SonifyConfig {
  Waveform waveform = Waveform::Sine;
  Mapping mapping = Mapping::Linear;
  double f_min = 220.0;
  double f_max = 880.0;
  double note_duration = 0.1;
  std::uint32_t sample_rate = 44100;
  double amplitude = 0.8;
  double envelope_ramp = 0.005;

  friend bool operator==(const SonifyConfig&, const SonifyConfig&) = default;
};

/// Mono samples in [-1, 1].
struct AudioBuffer {
  std::uint32_t sample_rate = 44100;
  std::vector<double> samples;

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
};

inline constexpr double kPingDuration = 0.05;

inline void validate(const SonifyConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::BadConfig, "invalid sound settings: " + what); };
  if (c.sample_rate == 0) bad("sample_rate must be positive");
  if (!std::isfinite(c.f_min) || !std::isfinite(c.f_max)) bad("frequencies must be finite");
  if (c.f_min < 20.0) bad("f_min must be at least 20 Hz");
  if (!(c.f_min < c.f_max)) bad("f_min must be below f_max");
  if (c.f_max > 0.45 * c.sample_rate) bad("f_max must not exceed 0.45 * sample_rate");
  if (!std::isfinite(c.envelope_ramp) || c.envelope_ramp < 0.0) bad("envelope_ramp must be non-negative");
  if (!std::isfinite(c.note_duration) || c.note_duration <= 0.0) bad("note_duration must be positive");
  if (c.note_duration < 2.0 * c.envelope_ramp) bad("note_duration must be at least twice envelope_ramp");
  if (!(c.amplitude > 0.0 && c.amplitude <= 1.0)) bad("amplitude must be in (0, 1]");
}

inline std::size_t sample_count(double seconds, std::uint32_t sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

/// Linear: f_min + v (f_max - f_min). Logarithmic: f_min (f_max / f_min)^v.
inline double map_value_to_freq(double v, const SonifyConfig& config) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::OutOfRange, "value " + std::to_string(v) + " is outside [0, 1]");
  if (v == 0.0) return config.f_min;
  if (v == 1.0) return config.f_max;
  if (config.mapping == Mapping::Linear) return config.f_min + v * (config.f_max - config.f_min);
  return config.f_min * std::pow(config.f_max / config.f_min, v);
}

namespace detail {

inline void render_tone_into(double* out, std::size_t n, double freq, const SonifyConfig& config, double ramp_seconds) {
  const double ramp = std::min(ramp_seconds, 0.5 * static_cast<double>(n) / config.sample_rate) * config.sample_rate;
  const double omega = 2.0 * std::numbers::pi * freq / config.sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    double env = 1.0;
    if (ramp >= 1.0) {
      const double from_start = static_cast<double>(i) / ramp;
      const double to_end = static_cast<double>(n - 1 - i) / ramp;
      env = std::min({1.0, from_start, to_end});
    }
    const double s = std::sin(omega * static_cast<double>(i));
    const double shape = config.waveform == Waveform::Sine ? s : (s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0));
    out[i] = config.amplitude * env * shape;
  }
}

inline void clip(std::vector<double>& v) {
  for (double& s : v) s = std::clamp(s, -1.0, 1.0);
}

}  // namespace detail

/// One enveloped tone of round(duration * sample_rate) samples, phase 0 at the
/// first sample, with linear attack and release ramps of envelope_ramp seconds
/// (at most half the note each).
inline AudioBuffer render_note(double freq, const SonifyConfig& config, double duration) {
  validate(config);
  if (!std::isfinite(freq) || freq < 0.0 || freq >= 0.5 * config.sample_rate)
    throw Error(ErrorKind::BadFrequency, "frequency " + std::to_string(freq) + " Hz is outside [0, Nyquist)");
  if (!std::isfinite(duration) || duration < 0.0)
    throw Error(ErrorKind::BadDuration, "note duration must be finite and non-negative");
  AudioBuffer buf{config.sample_rate, std::vector<double>(sample_count(duration, config.sample_rate))};
  detail::render_tone_into(buf.samples.data(), buf.size(), freq, config, config.envelope_ramp);
  return buf;
}

/// One note per point in ascending x order. y must be normalized; NaN points
/// render as a silent note.
inline AudioBuffer sonify_series(const Series& series, const SonifyConfig& config) {
  validate(config);
  if (series.empty()) throw Error(ErrorKind::EmptySeries, "series is empty");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = series.y[i];
    if (!std::isnan(y) && !(y >= 0.0 && y <= 1.0))
      throw Error(ErrorKind::NotNormalized, "sonification needs values in [0, 1] (value " + std::to_string(y) +
                                                " at index " + std::to_string(i) + ")")
          .at_row(i);
  }

  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (series.x.size() == series.size())
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return series.x[a] < series.x[b]; });

  const std::size_t per_note = sample_count(config.note_duration, config.sample_rate);
  AudioBuffer buf{config.sample_rate, std::vector<double>(per_note * series.size(), 0.0)};
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double y = series.y[order[k]];
    if (std::isnan(y)) continue;
    detail::render_tone_into(buf.samples.data() + k * per_note, per_note, map_value_to_freq(y, config), config,
                             config.envelope_ramp);
  }
  return buf;
}

/// Places a 50 ms sine ping per event on a silent timeline. Event times are
/// rescaled affinely from [first, last] onto [0, timeline - 50 ms] so the
/// final ping is heard in full; a lone event (or all-equal times) sits at 0.
/// Ping pitch follows weight / max_weight. Overlaps sum and are hard-clipped.
inline AudioBuffer sonify_events(const EventList& events, double timeline, const SonifyConfig& config) {
  validate(config);
  if (!std::isfinite(timeline) || timeline <= 0.0)
    throw Error(ErrorKind::BadTimeline, "timeline must be a positive number of seconds");
  AudioBuffer buf{config.sample_rate, std::vector<double>(sample_count(timeline, config.sample_rate), 0.0)};
  if (events.empty()) return buf;

  const double t_first = events.events.front().time;
  const double t_last = events.events.back().time;
  const double span = std::max(0.0, timeline - kPingDuration);
  double max_weight = 0.0;
  for (const auto& e : events.events) max_weight = std::max(max_weight, e.weight);

  SonifyConfig sine = config;
  sine.waveform = Waveform::Sine;
  const std::size_t ping_len = sample_count(kPingDuration, config.sample_rate);
  std::vector<double> ping(ping_len);
  for (const auto& e : events.events) {
    const double pos = t_last > t_first ? (e.time - t_first) / (t_last - t_first) * span : 0.0;
    const double v = max_weight > 0.0 ? std::clamp(e.weight / max_weight, 0.0, 1.0) : 0.0;
    detail::render_tone_into(ping.data(), ping_len, map_value_to_freq(v, config), sine, config.envelope_ramp);
    const std::size_t start = sample_count(pos, config.sample_rate);
    for (std::size_t i = 0; i < ping_len && start + i < buf.size(); ++i) buf.samples[start + i] += ping[i];
  }
  detail::clip(buf.samples);
  return buf;
}

/// Counts transitions from a non-positive to a positive sample over
/// [begin, end) and divides by the segment duration.
inline double estimate_freq(const AudioBuffer& buffer, std::size_t begin, std::size_t end) {
  if (end > buffer.size() || begin > end || end - begin < 2)
    throw Error(ErrorKind::TooShort, "frequency estimation needs a segment of at least two samples");
  std::size_t crossings = 0;
  for (std::size_t i = begin + 1; i < end; ++i)
    if (buffer.samples[i - 1] <= 0.0 && buffer.samples[i] > 0.0) ++crossings;
  const double seconds = static_cast<double>(end - begin) / buffer.sample_rate;
  return static_cast<double>(crossings) / seconds;
}

inline double estimate_freq(const AudioBuffer& buffer) { return estimate_freq(buffer, 0, buffer.size()); }

// JSON (field names match SonifyConfig members).

inline nlohmann::json to_json_value(const SonifyConfig& c) {
  return {
      {"waveform", c.waveform == Waveform::Sine ? "sine" : "square"},
      {"mapping", c.mapping == Mapping::Linear ? "linear" : "logarithmic"},
      {"f_min", c.f_min},
      {"f_max", c.f_max},
      {"note_duration", c.note_duration},
      {"sample_rate", c.sample_rate},
      {"amplitude", c.amplitude},
      {"envelope_ramp", c.envelope_ramp},
  };
}

/// Missing fields keep their defaults. The result is validated.
inline SonifyConfig sonify_config_from_json(const nlohmann::json& j) {
  SonifyConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(ErrorKind::BadConfig, "sound settings must be a JSON object");
  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw Error(ErrorKind::BadConfig, std::string("'") + key + "' must be a number");
    dst = j[key].get<double>();
  };
  if (j.contains("waveform")) {
    const auto w = j["waveform"].is_string() ? j["waveform"].get<std::string>() : "";
    if (w == "sine") c.waveform = Waveform::Sine;
    else if (w == "square") c.waveform = Waveform::Square;
    else throw Error(ErrorKind::BadConfig, "waveform must be 'sine' or 'square'");
  }
  if (j.contains("mapping")) {
    const auto m = j["mapping"].is_string() ? j["mapping"].get<std::string>() : "";
    if (m == "linear") c.mapping = Mapping::Linear;
    else if (m == "logarithmic" || m == "log") c.mapping = Mapping::Logarithmic;
    else throw Error(ErrorKind::BadConfig, "mapping must be 'linear' or 'logarithmic'");
  }
  number("f_min", c.f_min);
  number("f_max", c.f_max);
  number("note_duration", c.note_duration);
  number("amplitude", c.amplitude);
  number("envelope_ramp", c.envelope_ramp);
  if (j.contains("sample_rate")) {
    const auto& sr = j["sample_rate"];
    if (!sr.is_number_unsigned() || sr.get<std::uint64_t>() == 0 || sr.get<std::uint64_t>() > 768000)
      throw Error(ErrorKind::BadConfig, "'sample_rate' must be a positive integer up to 768000");
    c.sample_rate = sr.get<std::uint32_t>();
  }
  validate(c);
  return c;
}

}  // namespace sonowork
