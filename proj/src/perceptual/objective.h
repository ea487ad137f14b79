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

#ifndef PERCEPT_PERCEPTUAL_OBJECTIVE_H_
#define PERCEPT_PERCEPTUAL_OBJECTIVE_H_

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "mosnet/mosnet.h"
#include "nn/tensor.h"
#include "ttscore/model.h"
#include "ttscore/types.h"

namespace percept::perceptual {

// Weight on the conventional loss, decayed once per epoch.
struct LambdaSchedule {
  double lambda0 = 90.0;
  double decay_per_epoch = 1.0;
  double lambda_min = 20.0;

  void Validate() const;
};

// max(lambda0 - decay * epoch, lambda_min) for 0-based epochs.
double LambdaAt(const LambdaSchedule& schedule, int epoch);

// |target - predicted|, averaged over utterances for a batch.
double PerceptualLoss(double predicted, double target);
double PerceptualLoss(const std::vector<double>& predicted, double target);

// (lambda * l_con + l_per) / (lambda + 1).
double CombinedLoss(double l_con, double l_per, double lambda);
nn::Tensor CombinedLoss(const nn::Tensor& l_con, const nn::Tensor& l_per,
                        double lambda);

enum class PredictorInput { kPostNet, kPreNet };

// Maps TTS mels into the predictor's input space: scale * mel + shift.
struct PredictorAdapter {
  double scale = 1.0;
  double shift = 0.0;

  nn::Tensor Apply(const nn::Tensor& mel) const;
};

struct PerceptualConfig {
  bool enabled = true;
  LambdaSchedule schedule;
  double mos_target = 5.0;
  PredictorInput predictor_input = PredictorInput::kPostNet;
  PredictorAdapter adapter;
  std::string predictor_checkpoint;

  void Validate() const;
};

void to_json(nlohmann::json& j, const LambdaSchedule& s);
void from_json(const nlohmann::json& j, LambdaSchedule& s);
void to_json(nlohmann::json& j, const PerceptualConfig& c);
void from_json(const nlohmann::json& j, PerceptualConfig& c);

struct LossBreakdown {
  double l_con = 0.0;
  std::optional<double> l_per;   // absent without a predictor
  std::optional<double> lambda;  // absent when the perceptual term is off
  double total = 0.0;
};

// Batch objective of one TTS model against a frozen MOS predictor. With the
// perceptual term off the total is the conventional loss; l_per is still
// reported when a predictor is available.
class PerceptualObjective {
 public:
  struct Evaluation {
    nn::Tensor total;
    LossBreakdown breakdown;
  };

  // The predictor must outlive the objective and be frozen when the
  // perceptual term is on. Throws UsageError otherwise.
  PerceptualObjective(const mosnet::MosPredictor* predictor,
                      const PerceptualConfig& config);

  Evaluation Evaluate(const ttscore::TtsModel& model,
                      const std::vector<ttscore::TtsExample>& batch,
                      double lambda,
                      std::mt19937_64* dropout_rng = nullptr) const;

  // Zeroes the TTS gradients, evaluates and back-propagates the total. The
  // optimiser step is left to the caller. A non-finite total raises
  // NumericError carrying the breakdown.
  LossBreakdown ComputeGradients(ttscore::TtsModel& model,
                                 const std::vector<ttscore::TtsExample>& batch,
                                 double lambda,
                                 std::mt19937_64* dropout_rng = nullptr) const;

  // Predicted MOS of a mel (evaluation mode, no graph).
  double Score(const dataio::MelSpectrogram& mel) const;

  const PerceptualConfig& config() const { return config_; }

 private:
  const mosnet::MosPredictor* predictor_;
  PerceptualConfig config_;
};

std::string BreakdownString(const LossBreakdown& b);

}  // namespace percept::perceptual

#endif  // PERCEPT_PERCEPTUAL_OBJECTIVE_H_
