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

#ifndef PERCEPT_TTSCORE_LOSSES_H_
#define PERCEPT_TTSCORE_LOSSES_H_

#include <vector>

#include "dataio/types.h"
#include "nn/tensor.h"
#include "ttscore/model.h"
#include "ttscore/types.h"

namespace percept::ttscore {

// Losses only look at the valid prefix given by the target's frame mask, so
// predictions may carry any number of extra rows.

// Mean squared error per valid frame and bin.
nn::Tensor MelL2(const nn::Tensor& pred, const TtsTarget& target);

// Class-weighted binary cross-entropy on stop logits [T, 1].
nn::Tensor StopBce(const nn::Tensor& logits, const TtsTarget& target,
                   double pos_weight);

// W[t, n] = 1 - exp(-(n / N - t / T)^2 / (2 g^2)), 0-based indices.
double GuidedAttentionWeight(int t, int frames, int n, int chars, double g);

// Mean of W * A over the first `valid_frames` decoder steps of an [T, N]
// alignment.
nn::Tensor GuidedAttentionLoss(const nn::Tensor& alignment, double g,
                               int valid_frames);

// Average over every head of every cross-attention layer.
nn::Tensor MeanGuidedAttentionLoss(
    const std::vector<AttentionAlignment>& alignments, double g,
    int valid_frames);

nn::Tensor DurationLossTerm(const nn::Tensor& duration_out,
                            const std::vector<int>& durations,
                            DurationLoss mode, int max_duration);

// Durations decoded from the predictor head; never negative.
std::vector<int> DecodeDurations(const nn::Tensor& duration_out,
                                 DurationLoss mode);

ConventionalLoss TransformerConventionalLoss(const TtsOutputs& outputs,
                                             const TtsTarget& target,
                                             const TtsLossConfig& config);
ConventionalLoss FastSpeechConventionalLoss(const TtsOutputs& outputs,
                                            const TtsTarget& target,
                                            const TtsLossConfig& config);

// Mean of per-utterance losses: totals and every breakdown term.
ConventionalLoss MeanOverBatch(const std::vector<ConventionalLoss>& losses);

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_LOSSES_H_
