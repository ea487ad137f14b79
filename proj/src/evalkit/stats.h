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

#ifndef PERCEPT_EVALKIT_STATS_H_
#define PERCEPT_EVALKIT_STATS_H_

#include <array>
#include <optional>
#include <vector>

namespace percept::evalkit {

struct MosSummary {
  double mean = 0.0;
  std::optional<double> ci95_halfwidth;  // absent for a single score
  int n = 0;
};

// Mean with a two-sided 95% Student-t interval. Throws DataError when empty.
MosSummary MosAggregate(const std::vector<double>& scores);

// Quantile of Student's t with `dof` degrees of freedom.
double StudentTQuantile(double probability, double dof);

// Counts of intelligibility scores 1..5.
struct ScoreHistogram {
  std::array<long, 5> counts{};

  long total() const;
  long count(int score) const { return counts.at(score - 1); }
  // Scores must be integers in [1, 5]; throws DataError otherwise.
  static ScoreHistogram FromScores(const std::vector<double>& scores);
};

// (N4 + N5) / N. Throws DataError for an empty histogram.
double Fcr(const ScoreHistogram& h);
// N3 / (N1 + N2 + N3); absent when that denominator is zero.
std::optional<double> Tmsr(const ScoreHistogram& h);

// Two-sided p-value of the paired t-test on a - b. Absent when every
// difference is equal. Throws UsageError on length mismatch or n < 2.
std::optional<double> PairedTTest(const std::vector<double>& a,
                                  const std::vector<double>& b);

}  // namespace percept::evalkit

#endif  // PERCEPT_EVALKIT_STATS_H_
