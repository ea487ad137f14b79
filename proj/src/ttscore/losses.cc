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

#include "ttscore/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.h"
#include "nn/ops.h"

namespace percept::ttscore {

namespace {

int CheckedValidFrames(const nn::Tensor& pred, const TtsTarget& target) {
  const int valid = target.valid_frames();
  if (valid < 1) throw DataError("target has no valid frames");
  if (pred.rank() != 2 || pred.dim(0) < valid) {
    throw ShapeError("prediction " + nn::ShapeString(pred.shape()) +
                     " is shorter than the " + std::to_string(valid) +
                     " valid target frames");
  }
  return valid;
}

void CheckFinite(const ConventionalLoss& loss) {
  for (const auto& [name, value] : loss.terms) {
    if (!std::isfinite(value)) throw NumericError(name + " is not finite");
  }
  if (!std::isfinite(loss.total.item())) {
    throw NumericError("total loss is not finite");
  }
}

}  // namespace

nn::Tensor MelL2(const nn::Tensor& pred, const TtsTarget& target) {
  const int valid = CheckedValidFrames(pred, target);
  const int bins = dataio::kMelBins;
  if (pred.dim(1) != bins) {
    throw ShapeError("mel prediction has " + std::to_string(pred.dim(1)) +
                     " bins, expected " + std::to_string(bins));
  }
  std::vector<double> frames(target.mel.frames.begin(),
                             target.mel.frames.begin() +
                                 static_cast<ptrdiff_t>(valid) * bins);
  const nn::Tensor truth = nn::Tensor::FromVector({valid, bins}, frames);
  return nn::Mean(nn::Square(nn::Sub(nn::SliceRows(pred, 0, valid), truth)));
}

nn::Tensor StopBce(const nn::Tensor& logits, const TtsTarget& target,
                   double pos_weight) {
  const int valid = CheckedValidFrames(logits, target);
  std::vector<double> pos(valid), neg(valid);
  for (int t = 0; t < valid; ++t) {
    const double y = target.stop_labels[t];
    pos[t] = pos_weight * y / valid;
    neg[t] = (1.0 - y) / valid;
  }
  const nn::Tensor x = nn::SliceRows(logits, 0, valid);
  return nn::Sum(nn::Add(
      nn::Mul(nn::Softplus(nn::Neg(x)), nn::Tensor::FromVector({valid, 1}, pos)),
      nn::Mul(nn::Softplus(x), nn::Tensor::FromVector({valid, 1}, neg))));
}

double GuidedAttentionWeight(int t, int frames, int n, int chars, double g) {
  const double d = static_cast<double>(n) / chars -
                   static_cast<double>(t) / frames;
  return 1.0 - std::exp(-d * d / (2.0 * g * g));
}

nn::Tensor GuidedAttentionLoss(const nn::Tensor& alignment, double g,
                               int valid_frames) {
  if (alignment.rank() != 2 || alignment.dim(0) < valid_frames ||
      valid_frames < 1) {
    throw ShapeError("alignment " + nn::ShapeString(alignment.shape()) +
                     " does not cover " + std::to_string(valid_frames) +
                     " frames");
  }
  if (!(g > 0.0)) throw UsageError("guided attention width must be positive");
  const int chars = alignment.dim(1);
  std::vector<double> w(static_cast<size_t>(valid_frames) * chars);
  for (int t = 0; t < valid_frames; ++t) {
    for (int n = 0; n < chars; ++n) {
      w[static_cast<size_t>(t) * chars + n] =
          GuidedAttentionWeight(t, valid_frames, n, chars, g);
    }
  }
  const nn::Tensor a = nn::SliceRows(alignment, 0, valid_frames);
  return nn::Mean(
      nn::Mul(a, nn::Tensor::FromVector({valid_frames, chars}, std::move(w))));
}

nn::Tensor MeanGuidedAttentionLoss(
    const std::vector<AttentionAlignment>& alignments, double g,
    int valid_frames) {
  if (alignments.empty()) throw UsageError("no alignments to regularise");
  nn::Tensor total;
  for (const auto& a : alignments) {
    nn::Tensor term = GuidedAttentionLoss(a.weights, g, valid_frames);
    total = total.defined() ? nn::Add(total, term) : term;
  }
  return nn::Scale(total, 1.0 / static_cast<double>(alignments.size()));
}

nn::Tensor DurationLossTerm(const nn::Tensor& duration_out,
                            const std::vector<int>& durations,
                            DurationLoss mode, int max_duration) {
  const int chars = static_cast<int>(durations.size());
  if (duration_out.rank() != 2 || duration_out.dim(0) != chars) {
    throw ShapeError("duration head " + nn::ShapeString(duration_out.shape()) +
                     " does not match " + std::to_string(chars) + " durations");
  }
  if (mode == DurationLoss::kCrossEntropyBucketed) {
    if (duration_out.dim(1) != max_duration + 1) {
      throw ShapeError("duration head has the wrong number of buckets");
    }
    std::vector<int> bucket(chars);
    for (int i = 0; i < chars; ++i) {
      bucket[i] = std::clamp(durations[i], 0, max_duration);
    }
    return nn::Neg(
        nn::Mean(nn::SelectPerRow(nn::LogSoftmaxRows(duration_out), bucket)));
  }
  if (duration_out.dim(1) != 1) {
    throw ShapeError("log-duration head must have one column");
  }
  std::vector<double> target(chars);
  for (int i = 0; i < chars; ++i) target[i] = std::log(durations[i] + 1.0);
  return nn::Mean(nn::Square(
      nn::Sub(duration_out, nn::Tensor::FromVector({chars, 1}, target))));
}

std::vector<int> DecodeDurations(const nn::Tensor& duration_out,
                                 DurationLoss mode) {
  const int chars = duration_out.dim(0);
  const int cols = duration_out.dim(1);
  std::vector<int> out(chars);
  for (int i = 0; i < chars; ++i) {
    if (mode == DurationLoss::kCrossEntropyBucketed) {
      int best = 0;
      for (int c = 1; c < cols; ++c) {
        if (duration_out.at(i, c) > duration_out.at(i, best)) best = c;
      }
      out[i] = best;
    } else {
      const double d = std::exp(duration_out.at(i, 0)) - 1.0;
      out[i] = std::isfinite(d) ? std::max(0, static_cast<int>(std::lround(d)))
                                : 0;
    }
  }
  return out;
}

ConventionalLoss TransformerConventionalLoss(const TtsOutputs& outputs,
                                             const TtsTarget& target,
                                             const TtsLossConfig& config) {
  ConventionalLoss loss;
  const nn::Tensor pre = MelL2(outputs.mel_pre, target);
  const nn::Tensor post = MelL2(outputs.mel_post, target);
  const nn::Tensor stop =
      StopBce(outputs.stop_logits, target, config.stop_pos_weight);
  nn::Tensor total = nn::Add(nn::Add(pre, post), stop);
  loss.terms["l2_pre"] = pre.item();
  loss.terms["l2_post"] = post.item();
  loss.terms["stop_bce"] = stop.item();
  if (config.guided_attention_weight != 0.0) {
    const nn::Tensor ga =
        MeanGuidedAttentionLoss(outputs.alignments,
                                config.guided_attention_sigma,
                                target.valid_frames());
    total = nn::Add(total, nn::Scale(ga, config.guided_attention_weight));
    loss.terms["guided_attn"] = ga.item();
  }
  loss.total = total;
  CheckFinite(loss);
  return loss;
}

ConventionalLoss FastSpeechConventionalLoss(const TtsOutputs& outputs,
                                            const TtsTarget& target,
                                            const TtsLossConfig& config) {
  if (!target.durations) {
    throw DataError("duration loss needs target durations");
  }
  ConventionalLoss loss;
  const nn::Tensor pre = MelL2(outputs.mel_pre, target);
  const nn::Tensor post = MelL2(outputs.mel_post, target);
  const nn::Tensor dur =
      DurationLossTerm(outputs.duration_out, *target.durations,
                       config.duration_loss, config.max_duration);
  loss.total =
      nn::Add(nn::Add(pre, post), nn::Scale(dur, config.duration_weight));
  loss.terms["l2_pre"] = pre.item();
  loss.terms["l2_post"] = post.item();
  loss.terms["duration_loss"] = dur.item();
  CheckFinite(loss);
  return loss;
}

ConventionalLoss MeanOverBatch(const std::vector<ConventionalLoss>& losses) {
  if (losses.empty()) throw UsageError("empty loss batch");
  ConventionalLoss mean;
  const double scale = 1.0 / static_cast<double>(losses.size());
  nn::Tensor total;
  for (const auto& l : losses) {
    total = total.defined() ? nn::Add(total, l.total) : l.total;
    for (const auto& [name, value] : l.terms) mean.terms[name] += value * scale;
  }
  mean.total = nn::Scale(total, scale);
  return mean;
}

}  // namespace percept::ttscore
