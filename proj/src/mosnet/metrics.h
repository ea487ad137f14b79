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

#ifndef PERCEPT_MOSNET_METRICS_H_
#define PERCEPT_MOSNET_METRICS_H_

#include <optional>
#include <span>
#include <vector>

#include "dataio/types.h"
#include "mosnet/mosnet.h"

namespace percept::mosnet {

// Utterance-level predictor validation metrics. A correlation is absent when
// either side has zero variance.
struct MosPredictionMetrics {
  std::optional<double> lcc;
  std::optional<double> srcc;
  double mse = 0.0;
};

std::optional<double> PearsonCorrelation(std::span<const double> x,
                                         std::span<const double> y);
// Pearson correlation of average ranks (ties share the mean rank).
std::optional<double> SpearmanCorrelation(std::span<const double> x,
                                          std::span<const double> y);
double MeanSquaredError(std::span<const double> x, std::span<const double> y);

std::vector<double> AverageRanks(std::span<const double> values);

MosPredictionMetrics ComputeMetrics(std::span<const double> predicted,
                                    std::span<const double> truth);

// Scores every item in evaluation mode and compares with its label.
MosPredictionMetrics EvaluateMosPredictor(
    const MosPredictor& model, const std::vector<dataio::RatedUtterance>& testset);

}  // namespace percept::mosnet

#endif  // PERCEPT_MOSNET_METRICS_H_
