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

#include "evalkit/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "common/error.h"

namespace percept::evalkit {

namespace {

double SampleStddev(const std::vector<double>& x, double mean) {
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double Mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

}  // namespace

double StudentTQuantile(double probability, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, probability);
}

MosSummary MosAggregate(const std::vector<double>& scores) {
  if (scores.empty()) throw DataError("no scores to aggregate");
  for (double s : scores) {
    if (!std::isfinite(s)) throw DataError("non-finite score");
  }
  MosSummary m;
  m.n = static_cast<int>(scores.size());
  m.mean = Mean(scores);
  if (m.n >= 2) {
    const double s = SampleStddev(scores, m.mean);
    m.ci95_halfwidth = StudentTQuantile(0.975, m.n - 1) * s / std::sqrt(m.n);
  }
  return m;
}

long ScoreHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

ScoreHistogram ScoreHistogram::FromScores(const std::vector<double>& scores) {
  ScoreHistogram h;
  for (double s : scores) {
    if (s != std::round(s) || s < 1.0 || s > 5.0) {
      throw DataError("intelligibility score must be an integer 1..5");
    }
    ++h.counts[static_cast<int>(s) - 1];
  }
  return h;
}

double Fcr(const ScoreHistogram& h) {
  for (long c : h.counts) {
    if (c < 0) throw DataError("negative histogram count");
  }
  const long total = h.total();
  if (total == 0) throw DataError("FCR of an empty histogram");
  return static_cast<double>(h.count(4) + h.count(5)) /
         static_cast<double>(total);
}

std::optional<double> Tmsr(const ScoreHistogram& h) {
  const long low = h.count(1) + h.count(2) + h.count(3);
  if (low == 0) return std::nullopt;
  return static_cast<double>(h.count(3)) / static_cast<double>(low);
}

std::optional<double> PairedTTest(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  if (a.size() != b.size()) throw UsageError("paired samples differ in size");
  if (a.size() < 2) throw UsageError("paired t-test needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; })) {
    return std::nullopt;
  }
  const double mean = Mean(d);
  const double sd = SampleStddev(d, mean);
  const double n = static_cast<double>(d.size());
  const double t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1.0);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace percept::evalkit
