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

#ifndef PERCEPT_TTSCORE_DISTILL_H_
#define PERCEPT_TTSCORE_DISTILL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "dataio/mel.h"
#include "dataio/types.h"
#include "nn/tensor.h"
#include "ttscore/transformer_tts.h"
#include "ttscore/types.h"

namespace percept::ttscore {

// Mean over the first `valid_frames` decoder steps of the per-step maximum
// attention weight.
double DiagonalFocus(const nn::Tensor& weights, int valid_frames);

// Index into `alignments` of the most focused head; ties keep the first.
int SelectFocusedHead(const std::vector<AttentionAlignment>& alignments,
                      int valid_frames);

// Per-character count of decoder steps whose argmax lands on that character.
// Ties go to the earlier character, so the counts always sum to
// `valid_frames`.
std::vector<int> DurationsFromAlignment(const nn::Tensor& weights,
                                        int valid_frames);

// True when one character takes every frame of a multi-character input.
bool IsDegenerateAlignment(const std::vector<int>& durations);

struct DistilledUtterance {
  std::string utt_id;
  TextSequence text;
  TtsTarget target;  // teacher post-net mel and extracted durations
  int layer = 0;
  int head = 0;
  double focus = 0.0;
};

struct DistillationResult {
  std::vector<DistilledUtterance> utterances;
  std::vector<std::string> degenerate;  // excluded utterance ids
};

// Teacher-forced pass per example over its ground-truth mel.
DistillationResult DistillTargets(const TransformerTts& teacher,
                                  const std::vector<TtsExample>& examples);

// Reads and encodes every manifest entry with the teacher's vocabulary.
DistillationResult DistillTargets(const TransformerTts& teacher,
                                  const dataio::AudioManifest& manifest,
                                  const dataio::MelConfig& mel_config);

// One "<utt_id>.mel" cache and one "<utt_id>.dur" sidecar
// ("utt_id d1 d2 ...") per utterance.
void WriteDistilledTargets(const std::filesystem::path& dir,
                           const std::vector<DistilledUtterance>& utterances);

// Returns utt_id -> target, checking that durations sum to the frame count.
std::vector<std::pair<std::string, TtsTarget>> ReadDistilledTargets(
    const std::filesystem::path& dir);

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_DISTILL_H_
