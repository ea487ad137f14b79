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

#include "perceptual/objective.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/error.h"
#include "nn/ops.h"
#include "ttscore/losses.h"

namespace percept::perceptual {

void LambdaSchedule::Validate() const {
  if (!std::isfinite(lambda0) || !std::isfinite(decay_per_epoch) ||
      !std::isfinite(lambda_min)) {
    throw UsageError("lambda schedule values must be finite");
  }
  if (decay_per_epoch < 0.0) throw UsageError("decay_per_epoch must be >= 0");
  if (lambda_min < 0.0) throw UsageError("lambda_min must be >= 0");
  if (lambda0 < lambda_min) throw UsageError("lambda0 must be >= lambda_min");
}

double LambdaAt(const LambdaSchedule& schedule, int epoch) {
  if (epoch < 0) throw UsageError("epoch must be non-negative");
  schedule.Validate();
  return std::max(schedule.lambda0 - schedule.decay_per_epoch * epoch,
                  schedule.lambda_min);
}

double PerceptualLoss(double predicted, double target) {
  if (!std::isfinite(predicted) || !std::isfinite(target)) {
    throw NumericError("perceptual loss input is not finite");
  }
  return std::abs(target - predicted);
}

double PerceptualLoss(const std::vector<double>& predicted, double target) {
  if (predicted.empty()) throw UsageError("no predicted scores");
  double sum = 0.0;
  for (double p : predicted) sum += PerceptualLoss(p, target);
  return sum / static_cast<double>(predicted.size());
}

double CombinedLoss(double l_con, double l_per, double lambda) {
  if (lambda < 0.0) throw UsageError("lambda must be >= 0");
  if (!std::isfinite(l_con) || !std::isfinite(l_per)) {
    throw NumericError("combined loss input is not finite");
  }
  return (lambda * l_con + l_per) / (lambda + 1.0);
}

nn::Tensor CombinedLoss(const nn::Tensor& l_con, const nn::Tensor& l_per,
                        double lambda) {
  if (lambda < 0.0) throw UsageError("lambda must be >= 0");
  return nn::Scale(nn::Add(nn::Scale(l_con, lambda), l_per),
                   1.0 / (lambda + 1.0));
}

nn::Tensor PredictorAdapter::Apply(const nn::Tensor& mel) const {
  if (scale == 1.0 && shift == 0.0) return mel;
  return nn::AddScalar(nn::Scale(mel, scale), shift);
}

void PerceptualConfig::Validate() const {
  schedule.Validate();
  if (!(mos_target >= 1.0 && mos_target <= 5.0)) {
    throw UsageError("mos_target must be in [1, 5]");
  }
  if (!std::isfinite(adapter.scale) || !std::isfinite(adapter.shift) ||
      adapter.scale == 0.0) {
    throw UsageError("predictor adapter must be finite with non-zero scale");
  }
}

void to_json(nlohmann::json& j, const LambdaSchedule& s) {
  j = {{"lambda0", s.lambda0},
       {"decay_per_epoch", s.decay_per_epoch},
       {"lambda_min", s.lambda_min}};
}

void from_json(const nlohmann::json& j, LambdaSchedule& s) {
  s.lambda0 = j.value("lambda0", s.lambda0);
  s.decay_per_epoch = j.value("decay_per_epoch", s.decay_per_epoch);
  s.lambda_min = j.value("lambda_min", s.lambda_min);
}

void to_json(nlohmann::json& j, const PerceptualConfig& c) {
  j = {{"schedule", c.schedule},
       {"mos_target", c.mos_target},
       {"predictor_input",
        c.predictor_input == PredictorInput::kPostNet ? "post_net" : "pre_net"},
       {"adapter", {{"scale", c.adapter.scale}, {"shift", c.adapter.shift}}},
       {"predictor_checkpoint", c.predictor_checkpoint}};
}

void from_json(const nlohmann::json& j, PerceptualConfig& c) {
  if (j.contains("schedule")) j.at("schedule").get_to(c.schedule);
  c.mos_target = j.value("mos_target", c.mos_target);
  if (j.contains("predictor_input")) {
    const auto name = j.at("predictor_input").get<std::string>();
    if (name == "post_net") {
      c.predictor_input = PredictorInput::kPostNet;
    } else if (name == "pre_net") {
      c.predictor_input = PredictorInput::kPreNet;
    } else {
      throw UsageError("predictor_input must be post_net or pre_net");
    }
  }
  if (j.contains("adapter")) {
    c.adapter.scale = j.at("adapter").value("scale", c.adapter.scale);
    c.adapter.shift = j.at("adapter").value("shift", c.adapter.shift);
  }
  c.predictor_checkpoint =
      j.value("predictor_checkpoint", c.predictor_checkpoint);
}

PerceptualObjective::PerceptualObjective(const mosnet::MosPredictor* predictor,
                                         const PerceptualConfig& config)
    : predictor_(predictor), config_(config) {
  config_.Validate();
  if (config_.enabled) {
    if (predictor_ == nullptr) {
      throw UsageError("perceptual training needs a MOS predictor");
    }
    if (!predictor_->frozen()) {
      throw UsageError("the MOS predictor must be frozen");
    }
  }
}

PerceptualObjective::Evaluation PerceptualObjective::Evaluate(
    const ttscore::TtsModel& model,
    const std::vector<ttscore::TtsExample>& batch, double lambda,
    std::mt19937_64* dropout_rng) const {
  if (batch.empty()) throw UsageError("empty training batch");
  std::vector<ttscore::ConventionalLoss> conventional;
  nn::Tensor per_sum;
  double per_value = 0.0;
  for (const auto& ex : batch) {
    const ttscore::TtsOutputs out = model.Forward(ex, dropout_rng);
    conventional.push_back(model.Loss(out, ex.target));
    if (predictor_ == nullptr) continue;
    const nn::Tensor& mel = config_.predictor_input == PredictorInput::kPostNet
                                ? out.mel_post
                                : out.mel_pre;
    const nn::Tensor valid =
        nn::SliceRows(mel, 0, std::min(mel.dim(0), ex.target.valid_frames()));
    if (config_.enabled) {
      const nn::Tensor score =
          predictor_->Forward(config_.adapter.Apply(valid)).utterance_score;
      const nn::Tensor term =
          nn::Abs(nn::AddScalar(nn::Neg(score), config_.mos_target));
      per_sum = per_sum.defined() ? nn::Add(per_sum, term) : term;
    } else {
      nn::NoGradGuard no_grad;
      const double score =
          predictor_->Forward(config_.adapter.Apply(valid)).utterance_score
              .item();
      per_value += std::abs(config_.mos_target - score);
    }
  }
  const double n = static_cast<double>(batch.size());
  const ttscore::ConventionalLoss con = ttscore::MeanOverBatch(conventional);
  Evaluation eval;
  eval.breakdown.l_con = con.total.item();
  if (config_.enabled) {
    const nn::Tensor l_per = nn::Scale(per_sum, 1.0 / n);
    eval.total = CombinedLoss(con.total, l_per, lambda);
    eval.breakdown.l_per = l_per.item();
    eval.breakdown.lambda = lambda;
  } else {
    eval.total = con.total;
    if (predictor_ != nullptr) eval.breakdown.l_per = per_value / n;
  }
  eval.breakdown.total = eval.total.item();
  return eval;
}

LossBreakdown PerceptualObjective::ComputeGradients(
    ttscore::TtsModel& model, const std::vector<ttscore::TtsExample>& batch,
    double lambda, std::mt19937_64* dropout_rng) const {
  model.params().ZeroGrad();
  const Evaluation eval = Evaluate(model, batch, lambda, dropout_rng);
  if (!std::isfinite(eval.breakdown.total)) {
    throw NumericError("non-finite training loss (" +
                       BreakdownString(eval.breakdown) + ")");
  }
  eval.total.Backward();
  return eval.breakdown;
}

double PerceptualObjective::Score(const dataio::MelSpectrogram& mel) const {
  if (predictor_ == nullptr) throw UsageError("no MOS predictor");
  nn::NoGradGuard no_grad;
  return predictor_->Forward(config_.adapter.Apply(mel.ToTensor()))
      .utterance_score.item();
}

std::string BreakdownString(const LossBreakdown& b) {
  std::ostringstream os;
  os << "l_con=" << b.l_con;
  if (b.l_per) os << " l_per=" << *b.l_per;
  if (b.lambda) os << " lambda=" << *b.lambda;
  os << " total=" << b.total;
  return os.str();
}

}  // namespace percept::perceptual
