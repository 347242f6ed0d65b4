// Copyright 2026 The softbo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Minimal deterministic SVG line charts: fixed layout, fixed number
// formatting, no timestamps, so regenerated files are byte-identical.

#ifndef SOFTBO_SVG_HPP_
#define SOFTBO_SVG_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "softbo/io.hpp"

namespace softbo {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x, y;
  // optional band around the line (same x grid)
  std::vector<double> y_low, y_high;
};

class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)),
        x_label_(std::move(x_label)),
        y_label_(std::move(y_label)) {}

  void add_series(SvgSeries series) { series_.push_back(std::move(series)); }

  std::string render() const {
    const double width = 720, height = 480;
    const double left = 70, right = 30, top = 40, bottom = 55;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series_) {
      for (double v : s.x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
      }
      for (double v : s.y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
      for (double v : s.y_low) ymin = std::min(ymin, v);
      for (double v : s.y_high) ymax = std::max(ymax, v);
    }
    if (!std::isfinite(xmin)) {
      xmin = 0.0;
      xmax = 1.0;
    }
    if (!std::isfinite(ymin)) {
      ymin = 0.0;
      ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) {
      return left + plot_w * (x - xmin) / (xmax - xmin);
    };
    auto py = [&](double y) {
      return top + plot_h * (1.0 - (y - ymin) / (ymax - ymin));
    };
    auto fmt = [](double v) { return fmt_g(v, 6); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
       << height << "\">\n";
    os << "<!-- data\n";
    for (const auto& s : series_) {
      os << "series " << s.label << "\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << fmt_full(s.x[i]) << " " << fmt_full(s.y[i]);
        if (i < s.y_low.size() && i < s.y_high.size()) {
          os << " " << fmt_full(s.y_low[i]) << " " << fmt_full(s.y_high[i]);
        }
        os << "\n";
      }
    }
    os << "-->\n";
    os << "<rect width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"16\">"
       << title_ << "</text>\n";

    // axes + ticks
    os << "<g stroke=\"#333\" stroke-width=\"1\">\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
       << left + plot_w << "\" y2=\"" << top + plot_h << "\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
       << "\" y2=\"" << top + plot_h << "\"/>\n";
    os << "</g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int t = 0; t <= 5; ++t) {
      const double xv = xmin + (xmax - xmin) * t / 5.0;
      const double yv = ymin + (ymax - ymin) * t / 5.0;
      os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << top + plot_h + 18
         << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
      os << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(yv) + 4)
         << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\">" << x_label_ << "</text>\n";
    os << "<text x=\"18\" y=\"" << top + plot_h / 2
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << top + plot_h / 2 << ")\">" << y_label_ << "</text>\n";
    os << "</g>\n";

    // bands first, lines on top
    for (const auto& s : series_) {
      if (s.y_low.size() == s.x.size() && s.y_high.size() == s.x.size() &&
          !s.x.empty()) {
        os << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.15\" "
              "stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          os << fmt(px(s.x[i])) << "," << fmt(py(s.y_high[i])) << " ";
        }
        for (std::size_t i = s.x.size(); i-- > 0;) {
          os << fmt(px(s.x[i])) << "," << fmt(py(s.y_low[i]));
          if (i > 0) os << " ";
        }
        os << "\"/>\n";
      }
    }
    for (const auto& s : series_) {
      if (s.x.empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << fmt(px(s.x[i])) << "," << fmt(py(s.y[i]));
        if (i + 1 < s.x.size()) os << " ";
      }
      os << "\"/>\n";
    }

    // legend
    os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = top + 8;
    for (const auto& s : series_) {
      os << "<line x1=\"" << left + plot_w - 150 << "\" y1=\"" << ly
         << "\" x2=\"" << left + plot_w - 128 << "\" y2=\"" << ly
         << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << left + plot_w - 122 << "\" y=\"" << ly + 4
         << "\">" << s.label << "</text>\n";
      ly += 16;
    }
    os << "</g>\n</svg>\n";
    return os.str();
  }

 private:
  std::string title_, x_label_, y_label_;
  std::vector<SvgSeries> series_;
};

inline std::string series_color(std::size_t index) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  return kColors[index % 6];
}

}  // namespace softbo

#endif  // SOFTBO_SVG_HPP_
