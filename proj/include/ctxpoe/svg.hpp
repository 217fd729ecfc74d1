#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ctxpoe/io.hpp"

namespace ctxpoe {

// Minimal standalone SVG renderers for the figure analogs. CSV tables remain
// the source of truth; these are plain line/bar charts with no external
// renderer involved.

struct SvgSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), y in [0, 1]
};

namespace detail {

inline const char* svg_color(std::size_t i) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                            "#bcbd22"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

inline std::string render_line_chart(const std::vector<SvgSeries>& series,
                                     const std::string& title, const std::string& x_label,
                                     const std::string& y_label) {
  const double width = 640, height = 420;
  const double left = 60, right = 180, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 0.0, x_max = 1.0;
  for (const SvgSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - y) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";
  // axes
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double frac = t / 5.0;
    const double y = py(frac);
    out << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
        << detail::svg_num(frac) << "</text>\n";
    const double xv = x_min + frac * (x_max - x_min);
    const double x = px(xv);
    out << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x << "\" y2=\""
        << top + plot_h + 4 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << detail::svg_num(xv) << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 " << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    if (series[s].points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << detail::svg_color(s)
        << "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : series[s].points) {
      out << detail::svg_num(px(x)) << ',' << detail::svg_num(py(y)) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << left + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\""
        << left + plot_w + 30 << "\" y2=\"" << ly << "\" stroke=\"" << detail::svg_color(s)
        << "\" stroke-width=\"1.8\"/>\n";
    out << "<text x=\"" << left + plot_w + 35 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

struct SvgBarGroup {
  std::string group_label;                      // e.g. a context name
  std::vector<std::pair<std::string, double>> bars;  // (series name, value in [0,1])
};

inline std::string render_bar_chart(const std::vector<SvgBarGroup>& groups,
                                    const std::string& title, const std::string& y_label) {
  const double width = 640, height = 420;
  const double left = 60, right = 180, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double frac = t / 5.0;
    const double y = top + (1.0 - frac) * plot_h;
    out << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
        << detail::svg_num(frac) << "</text>\n";
  }
  out << "<text x=\"16\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 " << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

  if (!groups.empty()) {
    const double group_w = plot_w / static_cast<double>(groups.size());
    std::size_t max_bars = 1;
    for (const SvgBarGroup& g : groups) max_bars = std::max(max_bars, g.bars.size());
    const double bar_w = group_w * 0.8 / static_cast<double>(max_bars);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const double gx = left + group_w * (static_cast<double>(gi) + 0.1);
      for (std::size_t bi = 0; bi < groups[gi].bars.size(); ++bi) {
        const double v = std::clamp(groups[gi].bars[bi].second, 0.0, 1.0);
        const double bh = v * plot_h;
        out << "<rect x=\"" << gx + bar_w * static_cast<double>(bi) << "\" y=\""
            << top + plot_h - bh << "\" width=\"" << bar_w * 0.9 << "\" height=\"" << bh
            << "\" fill=\"" << detail::svg_color(bi) << "\"/>\n";
      }
      out << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << top + plot_h + 18
          << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
          << groups[gi].group_label << "</text>\n";
    }
    for (std::size_t bi = 0; bi < max_bars; ++bi) {
      std::string name;
      for (const SvgBarGroup& g : groups) {
        if (bi < g.bars.size()) {
          name = g.bars[bi].first;
          break;
        }
      }
      const double ly = top + 14 + 18 * static_cast<double>(bi);
      out << "<rect x=\"" << left + plot_w + 10 << "\" y=\"" << ly - 8
          << "\" width=\"12\" height=\"12\" fill=\"" << detail::svg_color(bi) << "\"/>\n";
      out << "<text x=\"" << left + plot_w + 28 << "\" y=\"" << ly + 2
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << name << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace ctxpoe
