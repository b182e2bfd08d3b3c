#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sbcg/bench/aggregate.hpp"

namespace sbcg::bench {

struct PlotOptions {
  std::string metric = "g_gap";
  bool log_x = true;
  bool log_y = true;
  int width = 720;
  int height = 480;
};

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

inline std::string short_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 3);
  return std::string(buf, res.ptr);
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<':
        o += "&lt;";
        break;
      case '>':
        o += "&gt;";
        break;
      case '&':
        o += "&amp;";
        break;
      case '"':
        o += "&quot;";
        break;
      default:
        o += c;
    }
  }
  return o;
}

}  // namespace detail

/// Median lines with shaded min-max bands, one series per algorithm, against
/// the query count. Points that cannot be drawn on a log axis are skipped.
inline std::string render_svg(const std::map<std::string, std::vector<AggregatePoint>>& series,
                              const std::vector<std::string>& order, const PlotOptions& opt) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const std::size_t m = metric_index(opt.metric);
  auto tx = [&](double v) { return opt.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };
  auto drawable_x = [&](double v) { return std::isfinite(v) && (!opt.log_x || v > 0); };
  auto drawable_y = [&](double v) { return std::isfinite(v) && (!opt.log_y || v > 0); };

  constexpr double inf = std::numeric_limits<double>::infinity();
  double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
  for (const auto& [name, pts] : series) {
    for (const auto& p : pts) {
      const double q = static_cast<double>(p.queries);
      if (!drawable_x(q)) continue;
      for (double v : {p.bands[m].median, p.bands[m].min, p.bands[m].max}) {
        if (!drawable_y(v)) continue;
        x0 = std::min(x0, tx(q));
        x1 = std::max(x1, tx(q));
        y0 = std::min(y0, ty(v));
        y1 = std::max(y1, ty(v));
      }
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;

  const double left = 80, right = 170, top = 30, bottom = 50;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto px = [&](double v) { return detail::fixed2(left + (v - x0) / (x1 - x0) * pw); };
  auto py = [&](double v) { return detail::fixed2(top + ph - (v - y0) / (y1 - y0) * ph); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double lx = opt.log_x ? std::pow(10.0, fx) : fx, ly = opt.log_y ? std::pow(10.0, fy) : fy;
    o << "<text x=\"" << px(fx) << "\" y=\"" << detail::fixed2(top + ph + 18) << "\" text-anchor=\"middle\">"
      << detail::short_number(lx) << "</text>\n";
    o << "<text x=\"" << detail::fixed2(left - 6) << "\" y=\"" << py(fy) << "\" text-anchor=\"end\">"
      << detail::short_number(ly) << "</text>\n";
  }
  o << "<text x=\"" << detail::fixed2(left + pw / 2) << "\" y=\"" << detail::fixed2(opt.height - 10.0)
    << "\" text-anchor=\"middle\">oracle queries" << (opt.log_x ? " (log)" : "") << "</text>\n";
  o << "<text x=\"16\" y=\"" << detail::fixed2(top + ph / 2) << "\" transform=\"rotate(-90 16 "
    << detail::fixed2(top + ph / 2) << ")\" text-anchor=\"middle\">" << detail::xml_escape(opt.metric)
    << (opt.log_y ? " (log)" : "") << "</text>\n";

  std::size_t ci = 0;
  for (const auto& name : order) {
    auto it = series.find(name);
    if (it == series.end()) continue;
    const char* color = colors[ci % 8];
    std::string upper, lower, line;
    for (const auto& p : it->second) {
      const double q = static_cast<double>(p.queries);
      if (!drawable_x(q)) continue;
      const Band& b = p.bands[m];
      if (drawable_y(b.min) && drawable_y(b.max)) {
        upper += px(tx(q)) + "," + py(ty(b.max)) + " ";
        lower = px(tx(q)) + "," + py(ty(b.min)) + " " + lower;
      }
      if (drawable_y(b.median)) line += px(tx(q)) + "," + py(ty(b.median)) + " ";
    }
    if (!upper.empty()) {
      o << "<polygon points=\"" << upper << lower << "\" fill=\"" << color
        << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    if (!line.empty()) {
      o << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(ci);
    o << "<line x1=\"" << detail::fixed2(left + pw + 12) << "\" y1=\"" << detail::fixed2(ly) << "\" x2=\""
      << detail::fixed2(left + pw + 36) << "\" y2=\"" << detail::fixed2(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << detail::fixed2(left + pw + 42) << "\" y=\"" << detail::fixed2(ly + 4) << "\">"
      << detail::xml_escape(name) << "</text>\n";
    ++ci;
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace sbcg::bench
