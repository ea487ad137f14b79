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

#include "mosnet/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.h"

namespace percept::mosnet {

namespace {

void RequirePaired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("metric inputs differ in length");
  if (x.empty()) throw UsageError("metric inputs are empty");
}

}  // namespace

std::optional<double> PearsonCorrelation(std::span<const double> x,
                                         std::span<const double> y) {
  RequirePaired(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> SpearmanCorrelation(std::span<const double> x,
                                          std::span<const double> y) {
  RequirePaired(x, y);
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  return PearsonCorrelation(rx, ry);
}

double MeanSquaredError(std::span<const double> x, std::span<const double> y) {
  RequirePaired(x, y);
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

MosPredictionMetrics ComputeMetrics(std::span<const double> predicted,
                                    std::span<const double> truth) {
  if (predicted.size() < 2) {
    throw UsageError("predictor evaluation needs at least 2 items");
  }
  return {PearsonCorrelation(predicted, truth),
          SpearmanCorrelation(predicted, truth),
          MeanSquaredError(predicted, truth)};
}

MosPredictionMetrics EvaluateMosPredictor(
    const MosPredictor& model,
    const std::vector<dataio::RatedUtterance>& testset) {
  std::vector<double> predicted, truth;
  for (const auto& item : testset) {
    predicted.push_back(model.Score(item.mel));
    truth.push_back(item.mos);
  }
  return ComputeMetrics(predicted, truth);
}

}  // namespace percept::mosnet
