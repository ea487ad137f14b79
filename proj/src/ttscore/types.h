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

#ifndef PERCEPT_TTSCORE_TYPES_H_
#define PERCEPT_TTSCORE_TYPES_H_

#include <optional>
#include <string>
#include <vector>

#include "dataio/types.h"
#include "nn/tensor.h"
#include "ttscore/text.h"

namespace percept::ttscore {

// Training target. `frame_mask` marks valid frames (empty means all valid);
// padded frames are ignored by every loss.
struct TtsTarget {
  dataio::MelSpectrogram mel;
  std::vector<double> stop_labels;
  std::optional<std::vector<int>> durations;
  std::vector<double> frame_mask;

  int valid_frames() const;
};

// Target with only the final frame labelled as the stop position.
TtsTarget MakeTarget(const dataio::MelSpectrogram& mel,
                     std::optional<std::vector<int>> durations = std::nullopt);

// Checks stop labels, mask and durations (non-negative, summing to the
// number of valid frames). Throws DataError.
void ValidateTarget(const TtsTarget& target, int text_length);

// Decoder-to-encoder attention of one head: weights are [T_dec, N] and each
// row is a distribution over input characters.
struct AttentionAlignment {
  int layer = 0;
  int head = 0;
  nn::Tensor weights;
};

struct TtsExample {
  std::string utt_id;
  TextSequence text;
  TtsTarget target;
};

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_TYPES_H_
