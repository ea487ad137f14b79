// Copyright (c) 2026 The percept-tts Authors
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

#include "evalkit/chart.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/error.h"

namespace percept::evalkit {

namespace {

constexpr double kLabelWidth = 160.0;
constexpr double kBarHeight = 28.0;
constexpr double kBarGap = 12.0;
constexpr double kTop = 40.0;
constexpr const char* kColors[5] = {"#d7191c", "#fdae61", "#ffffbf",
                                    "#a6d96a", "#1a9641"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string Escape(const std::string& s) {
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

}  // namespace

std::string RenderStackedBarSvg(const std::vector<ChartRow>& rows,
                                const std::string& title) {
  if (rows.empty()) throw DataError("chart needs at least one system");
  for (const auto& r : rows) {
    if (r.histogram.total() <= 0) {
      throw DataError("system '" + r.label + "' has no ratings");
    }
  }
  const double legend_y = kTop + rows.size() * (kBarHeight + kBarGap) + 10.0;
  const double width = kLabelWidth + kChartBarWidth + 20.0;
  const double height = legend_y + 40.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(width)
     << "\" height=\"" << Num(height) << "\" viewBox=\"0 0 " << Num(width)
     << ' ' << Num(height) << "\">\n";
  os << "<text x=\"" << Num(kLabelWidth) << "\" y=\"24.000\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << Escape(title)
     << "</text>\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& h = rows[i].histogram;
    const double y = kTop + i * (kBarHeight + kBarGap);
    os << "<text x=\"" << Num(kLabelWidth - 8.0) << "\" y=\""
       << Num(y + kBarHeight * 0.65) << "\" text-anchor=\"end\" "
       << "font-family=\"sans-serif\" font-size=\"13\">"
       << Escape(rows[i].label) << "</text>\n";
    double x = kLabelWidth;
    const double total = static_cast<double>(h.total());
    for (int score = 1; score <= 5; ++score) {
      const long n = h.count(score);
      if (n == 0) continue;
      const double w = kChartBarWidth * static_cast<double>(n) / total;
      os << "<rect class=\"segment\" data-system=\"" << Escape(rows[i].label)
         << "\" data-score=\"" << score << "\" data-count=\"" << n
         << "\" x=\"" << Num(x) << "\" y=\"" << Num(y) << "\" width=\""
         << Num(w) << "\" height=\"" << Num(kBarHeight) << "\" fill=\""
         << kColors[score - 1] << "\" stroke=\"#333333\" "
         << "stroke-width=\"0.5\"/>\n";
      x += w;
    }
  }
  for (int score = 1; score <= 5; ++score) {
    const double x = kLabelWidth + (score - 1) * 70.0;
    os << "<rect class=\"legend\" data-score=\"" << score << "\" x=\""
       << Num(x) << "\" y=\"" << Num(legend_y) << "\" width=\"14.000\" "
       << "height=\"14.000\" fill=\"" << kColors[score - 1]
       << "\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n";
    os << "<text x=\"" << Num(x + 20.0) << "\" y=\"" << Num(legend_y + 12.0)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << score
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void WriteStackedBarChart(const std::vector<ChartRow>& rows,
                          const std::filesystem::path& path,
                          const std::string& title) {
  const std::string svg = RenderStackedBarSvg(rows, title);
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << svg;
}

}  // namespace percept::evalkit
