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

#include "dataio/types.h"

#include <cmath>

#include "common/error.h"

namespace percept::dataio {

void MelSpectrogram::Validate() const {
  if (num_frames < 1) throw ShapeError("mel spectrogram has no frames");
  if (frames.size() != static_cast<size_t>(num_frames) * kMelBins) {
    throw ShapeError("mel spectrogram must have exactly 80 bins per frame");
  }
  for (double v : frames) {
    if (!std::isfinite(v)) throw NumericError("mel spectrogram has non-finite values");
  }
}

nn::Tensor MelSpectrogram::ToTensor() const {
  return nn::Tensor::FromVector({num_frames, kMelBins}, frames);
}

MelSpectrogram MelSpectrogram::FromTensor(const nn::Tensor& t,
                                          double sample_rate, int hop_length) {
  if (t.rank() != 2 || t.dim(1) != kMelBins) {
    throw ShapeError("mel tensor must be [T, 80], got " +
                     nn::ShapeString(t.shape()));
  }
  MelSpectrogram mel;
  mel.num_frames = t.dim(0);
  mel.frames.assign(t.data().begin(), t.data().end());
  mel.sample_rate = sample_rate;
  mel.hop_length = hop_length;
  return mel;
}

std::string OriginName(Origin origin) {
  return origin == Origin::kMosCorpus ? "mos_corpus" : "tts_corpus";
}

void ValidateRatedUtterance(const RatedUtterance& item,
                            double assumed_tts_mos) {
  if (!(item.mos >= 1.0 && item.mos <= 5.0)) {
    throw DataError(item.utt_id + ": MOS " + std::to_string(item.mos) +
                    " outside [1, 5]");
  }
  if (item.origin == Origin::kTtsCorpus && item.mos != assumed_tts_mos) {
    throw DataError(item.utt_id + ": TTS-corpus item must carry MOS " +
                    std::to_string(assumed_tts_mos));
  }
  item.mel.Validate();
}

std::filesystem::path AudioManifest::ResolveAudio(
    const ManifestEntry& entry) const {
  std::filesystem::path p(entry.audio_path);
  return p.is_absolute() ? p : base_dir / p;
}

}  // namespace percept::dataio
