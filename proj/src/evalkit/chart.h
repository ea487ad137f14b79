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

#ifndef PERCEPT_EVALKIT_CHART_H_
#define PERCEPT_EVALKIT_CHART_H_

#include <filesystem>
#include <string>
#include <vector>

#include "evalkit/stats.h"

namespace percept::evalkit {

struct ChartRow {
  std::string label;
  ScoreHistogram histogram;
};

inline constexpr double kChartBarWidth = 600.0;

// Horizontal stacked bars, one per row, segments ordered by score 1 to 5 with
// widths proportional to counts, plus a legend. Output depends only on the
// input. Throws DataError for an empty table list or an empty histogram.
std::string RenderStackedBarSvg(const std::vector<ChartRow>& rows,
                                const std::string& title = "");

void WriteStackedBarChart(const std::vector<ChartRow>& rows,
                          const std::filesystem::path& path,
                          const std::string& title = "");

}  // namespace percept::evalkit

#endif  // PERCEPT_EVALKIT_CHART_H_
