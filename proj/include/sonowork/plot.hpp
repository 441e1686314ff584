#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "sonowork/error.hpp"
#include "sonowork/ingest.hpp"

namespace sonowork {

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string shortg(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// SVG 1.1 line plot: one polyline with a vertex per finite point in x order,
/// linear axes fitted to the finite data range. NaN points are left out.
inline std::string render_plot(const Series& series, int width = 640, int height = 360) {
  if (series.empty()) throw Error(ErrorKind::EmptySeries, "cannot plot an empty series");
  if (width < 64 || height < 64) throw Error(ErrorKind::BadSize, "plot width and height must be at least 64 px");

  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return series.x[a] < series.x[b]; });

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series.y[i])) continue;
    x_lo = std::min(x_lo, series.x[i]);
    x_hi = std::max(x_hi, series.x[i]);
    y_lo = std::min(y_lo, series.y[i]);
    y_hi = std::max(y_hi, series.y[i]);
  }

  const double margin = 32.0;
  const double plot_w = width - 2 * margin;
  const double plot_h = height - 2 * margin;
  auto px = [&](double x) { return x_hi > x_lo ? margin + (x - x_lo) / (x_hi - x_lo) * plot_w : margin + plot_w / 2; };
  auto py = [&](double y) {
    return y_hi > y_lo ? margin + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h : margin + plot_h / 2;
  };

  std::string points;
  for (auto i : order) {
    if (!std::isfinite(series.y[i])) continue;
    if (!points.empty()) points += ' ';
    points += detail::fixed2(px(series.x[i])) + "," + detail::fixed2(py(series.y[i]));
  }

  const auto label = detail::xml_escape(series.label);
  const auto w = std::to_string(width);
  const auto h = std::to_string(height);
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + w + "\" height=\"" + h +
         "\" viewBox=\"0 0 " + w + " " + h + "\" role=\"img\" aria-label=\"" + label + "\">\n";
  svg += "<title>" + label + "</title>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h + "\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + detail::fixed2(margin) + "\" y=\"" + detail::fixed2(margin) + "\" width=\"" +
         detail::fixed2(plot_w) + "\" height=\"" + detail::fixed2(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  if (std::isfinite(x_lo)) {
    svg += "<text x=\"" + detail::fixed2(margin) + "\" y=\"" + detail::fixed2(height - 10.0) +
           "\" font-size=\"11\">" + detail::shortg(x_lo) + "</text>\n";
    svg += "<text x=\"" + detail::fixed2(width - margin) + "\" y=\"" + detail::fixed2(height - 10.0) +
           "\" font-size=\"11\" text-anchor=\"end\">" + detail::shortg(x_hi) + "</text>\n";
    svg += "<text x=\"4\" y=\"" + detail::fixed2(margin + plot_h) + "\" font-size=\"11\">" + detail::shortg(y_lo) +
           "</text>\n";
    svg += "<text x=\"4\" y=\"" + detail::fixed2(margin - 6.0) + "\" font-size=\"11\">" + detail::shortg(y_hi) +
           "</text>\n";
  }
  svg += "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace sonowork
