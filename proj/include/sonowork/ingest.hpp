#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sonowork/error.hpp"

namespace sonowork {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Column {
  std::string name;
  std::vector<double> values;

  friend bool operator==(const Column&, const Column&) = default;
};

/// Numeric table. All columns hold exactly `row_count` values; names are
/// unique and non-empty. Empty cells are stored as NaN.
struct Table {
  std::vector<Column> columns;
  std::size_t row_count = 0;

  const Column* find(std::string_view name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    names.reserve(columns.size());
    for (const auto& c : columns) names.push_back(c.name);
    return names;
  }
};

/// (x, y) sequence to sonify. x is finite; y may carry NaN gap markers.
struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
};

struct Event {
  double time = 0.0;
  double weight = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Events sorted by non-decreasing time; weights are non-negative.
struct EventList {
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
};

struct ParseOptions {
  std::optional<char> delimiter;   // nullopt: auto-detect
  std::optional<bool> has_header;  // nullopt: auto-detect
  bool decimal_comma = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

/// Parses a complete token as a double. Empty tokens are NaN; anything not
/// fully consumed yields nullopt.
inline std::optional<double> parse_number(std::string_view token, bool decimal_comma) {
  token = unquote(trim(token));
  if (token.empty()) return kNaN;
  std::string buf;
  if (decimal_comma && token.find(',') != std::string_view::npos) {
    buf.assign(token);
    std::replace(buf.begin(), buf.end(), ',', '.');
    token = buf;
  }
  if (token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    // Overflow or underflow: fall back to strtod's saturating behaviour.
    return std::strtod(std::string(token).c_str(), nullptr);
  }
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

inline bool is_comment_or_blank(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#' || t.front() == '%';
}

// '\0' denotes whitespace-run splitting.
inline std::vector<std::string_view> split_cells(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  if (delim == '\0') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i == line.size()) break;
      auto j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      cells.push_back(line.substr(i, j - i));
      i = j;
    }
    return cells;
  }
  std::size_t start = 0;
  while (true) {
    const auto d = line.find(delim, start);
    cells.push_back(trim(line.substr(start, d == std::string_view::npos ? std::string_view::npos : d - start)));
    if (d == std::string_view::npos) break;
    start = d + 1;
  }
  return cells;
}

/// Prefers the first of tab, semicolon, comma and whitespace that splits
/// every row into the same number (> 1) of cells. Failing that, the first
/// candidate present in the first row wins so ragged rows get reported.
inline char detect_delimiter(const std::vector<std::string_view>& rows, bool decimal_comma) {
  std::vector<char> candidates = {'\t', ';'};
  if (!decimal_comma) candidates.push_back(',');
  candidates.push_back('\0');
  for (char c : candidates) {
    if (c != '\0' && rows.front().find(c) == std::string_view::npos) continue;
    const auto width = split_cells(rows.front(), c).size();
    if (width < 2) continue;
    const bool consistent = std::all_of(rows.begin(), rows.end(),
                                        [&](std::string_view r) { return split_cells(r, c).size() == width; });
    if (consistent) return c;
  }
  for (char c : candidates)
    if (c != '\0' && rows.front().find(c) != std::string_view::npos) return c;
  return '\0';
}

inline void format_number(std::string& out, double v) {
  if (std::isnan(v)) return;
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace detail

/// Parses delimited UTF-8 text into a Table.
///
/// Lines starting with '#' or '%' and blank lines are skipped. The delimiter
/// is auto-detected unless given (see detail::detect_delimiter). A header is
/// assumed when the first row holds a non-numeric cell; otherwise columns are
/// named col0, col1, ...
inline Table parse_table(std::string_view input, const ParseOptions& options = {}) {
  std::vector<std::string_view> rows;
  for (auto line : detail::split_lines(input))
    if (!detail::is_comment_or_blank(line)) rows.push_back(line);
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, "input contains no data rows");

  const char delim = options.delimiter.value_or(detail::detect_delimiter(rows, options.decimal_comma));
  auto first = detail::split_cells(rows.front(), delim);

  bool header = false;
  if (options.has_header) {
    header = *options.has_header;
  } else {
    header = std::any_of(first.begin(), first.end(), [&](std::string_view cell) {
      return !detail::parse_number(cell, options.decimal_comma).has_value();
    });
  }

  Table table;
  const std::size_t width = first.size();
  table.columns.resize(width);
  if (header) {
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < width; ++c) {
      std::string name(detail::unquote(detail::trim(first[c])));
      if (name.empty()) throw Error(ErrorKind::BadHeader, "header has an empty column name").in_column("col" + std::to_string(c));
      if (!seen.insert(name).second) throw Error(ErrorKind::BadHeader, "duplicate column name '" + name + "'").in_column(name);
      table.columns[c].name = std::move(name);
    }
  } else {
    for (std::size_t c = 0; c < width; ++c) table.columns[c].name = "col" + std::to_string(c);
  }

  const std::size_t data_begin = header ? 1 : 0;
  if (rows.size() <= data_begin) throw Error(ErrorKind::EmptyInput, "input contains a header but no data rows");
  for (auto& col : table.columns) col.values.reserve(rows.size() - data_begin);

  for (std::size_t r = data_begin; r < rows.size(); ++r) {
    const std::size_t data_row = r - data_begin;
    const auto cells = detail::split_cells(rows[r], delim);
    if (cells.size() != width)
      throw Error(ErrorKind::RaggedRows, "row " + std::to_string(data_row) + " has " + std::to_string(cells.size()) +
                                             " cells, expected " + std::to_string(width))
          .at_row(data_row);
    for (std::size_t c = 0; c < width; ++c) {
      const auto v = detail::parse_number(cells[c], options.decimal_comma);
      if (!v)
        throw Error(ErrorKind::NonNumericCell, "non-numeric cell '" + std::string(cells[c]) + "' at row " +
                                                   std::to_string(data_row) + ", column '" + table.columns[c].name + "'")
            .at_row(data_row)
            .in_column(table.columns[c].name);
      table.columns[c].values.push_back(*v);
    }
  }
  table.row_count = rows.size() - data_begin;
  return table;
}

/// Comma-separated text with a header row; NaN becomes an empty cell and
/// values use the shortest representation that round-trips.
inline std::string write_table(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c].name;
  }
  out += '\n';
  for (std::size_t r = 0; r < table.row_count; ++r) {
    const auto line_start = out.size();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      detail::format_number(out, table.columns[c].values[r]);
    }
    // A single all-NaN cell would otherwise read back as a blank line.
    if (out.size() == line_start) out += "nan";
    out += '\n';
  }
  return out;
}

/// Builds a Series from named columns. Without `x_col` the abscissa is the
/// row index 0..row_count-1.
inline Series select_series(const Table& table, std::optional<std::string_view> x_col, std::string_view y_col) {
  if (table.row_count == 0 || table.columns.empty()) throw Error(ErrorKind::EmptyTable, "table has no rows");
  const auto* y = table.find(y_col);
  if (!y) throw Error(ErrorKind::UnknownColumn, "unknown column '" + std::string(y_col) + "'").in_column(std::string(y_col));

  Series s;
  s.label = std::string(y_col);
  s.y = y->values;
  if (x_col) {
    const auto* x = table.find(*x_col);
    if (!x) throw Error(ErrorKind::UnknownColumn, "unknown column '" + std::string(*x_col) + "'").in_column(std::string(*x_col));
    for (std::size_t i = 0; i < x->values.size(); ++i)
      if (!std::isfinite(x->values[i]))
        throw Error(ErrorKind::NonFiniteAbscissa, "abscissa column '" + x->name + "' is not finite at row " + std::to_string(i))
            .at_row(i)
            .in_column(x->name);
    s.x = x->values;
  } else {
    s.x.resize(table.row_count);
    for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] = static_cast<double>(i);
  }
  return s;
}

/// Parses two-column (time, weight) text and sorts the events by time.
inline EventList parse_events(std::string_view input, const ParseOptions& options = {}) {
  const Table table = parse_table(input, options);
  if (table.columns.size() != 2)
    throw Error(ErrorKind::RaggedRows, "event files need exactly two columns (time, weight), found " +
                                           std::to_string(table.columns.size()))
        .at_row(0);
  const auto& times = table.columns[0];
  const auto& weights = table.columns[1];
  EventList list;
  list.events.reserve(table.row_count);
  for (std::size_t r = 0; r < table.row_count; ++r) {
    if (!std::isfinite(times.values[r]))
      throw Error(ErrorKind::NonNumericCell, "event time missing or not finite at row " + std::to_string(r))
          .at_row(r)
          .in_column(times.name);
    const double w = weights.values[r];
    if (std::isnan(w) || std::isinf(w))
      throw Error(ErrorKind::NonNumericCell, "event weight missing or not finite at row " + std::to_string(r))
          .at_row(r)
          .in_column(weights.name);
    if (w < 0.0) throw Error(ErrorKind::NegativeWeight, "negative event weight at row " + std::to_string(r)).at_row(r);
    list.events.push_back({times.values[r], w});
  }
  std::stable_sort(list.events.begin(), list.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  return list;
}

}  // namespace sonowork
