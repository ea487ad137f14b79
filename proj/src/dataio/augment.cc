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

#include "dataio/augment.h"

#include <set>
#include <string>
#include <utility>

#include "common/error.h"
#include "dataio/wav.h"

namespace percept::dataio {

MelLoader AudioMelLoader(const AudioManifest& manifest,
                         const MelConfig& config) {
  return [&manifest, config](const ManifestEntry& entry) {
    const Waveform wav = ReadWav(manifest.ResolveAudio(entry));
    return ExtractMel(wav.samples, wav.sample_rate, config);
  };
}

std::vector<RatedUtterance> AugmentMosDataset(
    const std::vector<RatedUtterance>& mos_set,
    const AudioManifest& tts_manifest, const MelLoader& loader,
    const AugmentOptions& options) {
  for (const auto& item : mos_set) {
    if (item.origin != Origin::kMosCorpus) {
      throw UsageError("augmentation input " + item.utt_id +
                       " is not a MOS-corpus item");
    }
  }
  std::vector<RatedUtterance> out = mos_set;
  if (!options.enabled) return out;
  if (!(options.assumed_tts_mos >= 1.0 && options.assumed_tts_mos <= 5.0)) {
    throw UsageError("assumed TTS MOS must lie in [1, 5]");
  }
  out.reserve(mos_set.size() + tts_manifest.entries.size());
  for (const auto& entry : tts_manifest.entries) {
    RatedUtterance item;
    item.utt_id = entry.utt_id;
    item.origin = Origin::kTtsCorpus;
    item.mos = options.assumed_tts_mos;
    try {
      item.mel = loader(entry);
    } catch (const Error& e) {
      throw DataError("TTS corpus entry " + entry.utt_id + ": " + e.what());
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<RatedUtterance> AugmentMosDataset(
    const std::vector<RatedUtterance>& mos_set,
    const AudioManifest& tts_manifest, const MelConfig& config,
    const AugmentOptions& options) {
  return AugmentMosDataset(mos_set, tts_manifest,
                           AudioMelLoader(tts_manifest, config), options);
}

std::vector<RatedUtterance> DeduplicateByKey(
    const std::vector<RatedUtterance>& items) {
  std::set<std::pair<Origin, std::string>> seen;
  std::vector<RatedUtterance> out;
  for (const auto& item : items) {
    if (seen.emplace(item.origin, item.utt_id).second) out.push_back(item);
  }
  return out;
}

}  // namespace percept::dataio
