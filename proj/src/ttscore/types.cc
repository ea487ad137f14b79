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

#include "ttscore/types.h"

#include <numeric>

#include "common/error.h"

namespace percept::ttscore {

int TtsTarget::valid_frames() const {
  if (frame_mask.empty()) return mel.num_frames;
  int n = 0;
  for (double m : frame_mask) n += m > 0.0 ? 1 : 0;
  return n;
}

TtsTarget MakeTarget(const dataio::MelSpectrogram& mel,
                     std::optional<std::vector<int>> durations) {
  TtsTarget target;
  target.mel = mel;
  target.stop_labels.assign(mel.num_frames, 0.0);
  if (mel.num_frames > 0) target.stop_labels.back() = 1.0;
  target.durations = std::move(durations);
  return target;
}

void ValidateTarget(const TtsTarget& target, int text_length) {
  target.mel.Validate();
  const int frames = target.mel.num_frames;
  if (static_cast<int>(target.stop_labels.size()) != frames) {
    throw DataError("stop labels do not cover every frame");
  }
  if (!target.frame_mask.empty() &&
      static_cast<int>(target.frame_mask.size()) != frames) {
    throw DataError("frame mask does not cover every frame");
  }
  const int valid = target.valid_frames();
  if (valid < 1) throw DataError("target has no valid frames");
  for (int t = 0; t < valid; ++t) {
    if (!target.frame_mask.empty() && target.frame_mask[t] <= 0.0) {
      throw DataError("valid frames must form a prefix");
    }
    const double s = target.stop_labels[t];
    if (s != 0.0 && s != 1.0) throw DataError("stop labels must be 0 or 1");
  }
  if (target.stop_labels[valid - 1] != 1.0) {
    throw DataError("final valid frame must be labelled as stop");
  }
  if (target.durations) {
    const auto& d = *target.durations;
    if (static_cast<int>(d.size()) != text_length) {
      throw DataError("durations do not match the text length");
    }
    for (int v : d) {
      if (v < 0) throw DataError("negative duration");
    }
    if (std::accumulate(d.begin(), d.end(), 0) != valid) {
      throw DataError("durations do not sum to the frame count");
    }
  }
}

}  // namespace percept::ttscore
