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

#ifndef PERCEPT_DATAIO_TYPES_H_
#define PERCEPT_DATAIO_TYPES_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nn/tensor.h"

namespace percept::dataio {

inline constexpr int kMelBins = 80;

// T x 80 log-mel matrix, row-major (one row per frame).
struct MelSpectrogram {
  int num_frames = 0;
  std::vector<double> frames;
  double sample_rate = 22050.0;
  int hop_length = 256;

  double at(int t, int bin) const {
    return frames[static_cast<size_t>(t) * kMelBins + bin];
  }
  // Throws ShapeError/NumericError when the invariants do not hold.
  void Validate() const;

  nn::Tensor ToTensor() const;
  static MelSpectrogram FromTensor(const nn::Tensor& t, double sample_rate,
                                   int hop_length);
};

enum class Origin { kMosCorpus, kTtsCorpus };

std::string OriginName(Origin origin);

struct RatedUtterance {
  std::string utt_id;
  MelSpectrogram mel;
  double mos = 0.0;
  Origin origin = Origin::kMosCorpus;
};

// Enforces 1 <= mos <= 5 and, for TTS-corpus items, mos == assumed_tts_mos.
void ValidateRatedUtterance(const RatedUtterance& item,
                            double assumed_tts_mos = 5.0);

struct ManifestEntry {
  std::string utt_id;
  std::string audio_path;
  std::string text;
  std::optional<std::vector<std::string>> phones;
};

struct AudioManifest {
  std::vector<ManifestEntry> entries;
  // Relative audio paths are resolved against this directory.
  std::filesystem::path base_dir;

  std::filesystem::path ResolveAudio(const ManifestEntry& entry) const;
};

enum class TestKind { kNaturalness, kIntelligibility };

struct RatingRecord {
  std::string system_id;
  std::string utt_id;
  std::string rater_id;
  TestKind test = TestKind::kNaturalness;
  double score = 0.0;
};

}  // namespace percept::dataio

#endif  // PERCEPT_DATAIO_TYPES_H_
