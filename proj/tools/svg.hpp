// Copyright 2026 The repsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal grouped bar charts as standalone SVG.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace repsim::tools {

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per category
};

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

inline std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Bars grow up from zero for positive values and down for negative ones.
inline std::string grouped_bar_chart(const std::string& title, const std::string& y_label,
                                     const std::vector<std::string>& categories, const std::vector<BarSeries>& series) {
  static const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};
  const double width = 640, height = 400, left = 70, right = 20, top = 50, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : series)
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  const auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
     << xml_escape(title) << "</text>\n";
  os << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"12\" transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">" << xml_escape(y_label)
     << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    os << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y_of(v) << "\" y2=\"" << y_of(v)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"10\">" << fmt(v, 3) << "</text>\n";
  }
  const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = left + group_w * static_cast<double>(c) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = c < series[s].values.size() ? series[s].values[c] : 0.0;
      if (!std::isfinite(v)) continue;
      const double y0 = y_of(0.0), y1 = y_of(v);
      os << "<rect x=\"" << gx + bar_w * static_cast<double>(s) << "\" y=\"" << std::min(y0, y1) << "\" width=\""
         << bar_w * 0.95 << "\" height=\"" << std::abs(y1 - y0) << "\" fill=\"" << palette[s % 5] << "\"><title>"
         << xml_escape(series[s].name + " / " + categories[c] + ": " + fmt(v, 6)) << "</title></rect>\n";
    }
    os << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << top + plot_h + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(categories[c])
       << "</text>\n";
  }
  os << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y_of(0.0) << "\" y2=\"" << y_of(0.0)
     << "\" stroke=\"black\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double lx = left + 10 + 130 * static_cast<double>(s);
    os << "<rect x=\"" << lx << "\" y=\"" << height - 22 << "\" width=\"12\" height=\"12\" fill=\"" << palette[s % 5]
       << "\"/>\n";
    os << "<text x=\"" << lx + 16 << "\" y=\"" << height - 12 << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << xml_escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace repsim::tools
