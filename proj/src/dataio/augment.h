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

#ifndef PERCEPT_DATAIO_AUGMENT_H_
#define PERCEPT_DATAIO_AUGMENT_H_

#include <functional>
#include <vector>

#include "dataio/mel.h"
#include "dataio/types.h"

namespace percept::dataio {

struct AugmentOptions {
  // False reproduces the ablation that trains on the MOS corpus only.
  bool enabled = true;
  // MOS assigned to every TTS-corpus recording.
  double assumed_tts_mos = 5.0;
};

using MelLoader = std::function<MelSpectrogram(const ManifestEntry&)>;

// Mel loader that reads each entry's audio and runs ExtractMel.
MelLoader AudioMelLoader(const AudioManifest& manifest, const MelConfig& config);

// Appends one TTS-corpus item per manifest entry, labelled with the assumed
// MOS. Inputs are not modified; the MOS-corpus items keep their order and
// come first. Loader failures are rethrown naming the entry.
std::vector<RatedUtterance> AugmentMosDataset(
    const std::vector<RatedUtterance>& mos_set,
    const AudioManifest& tts_manifest, const MelLoader& loader,
    const AugmentOptions& options = {});

std::vector<RatedUtterance> AugmentMosDataset(
    const std::vector<RatedUtterance>& mos_set,
    const AudioManifest& tts_manifest, const MelConfig& config,
    const AugmentOptions& options = {});

// Keeps the first item per (origin, utt_id).
std::vector<RatedUtterance> DeduplicateByKey(
    const std::vector<RatedUtterance>& items);

}  // namespace percept::dataio

#endif  // PERCEPT_DATAIO_AUGMENT_H_
