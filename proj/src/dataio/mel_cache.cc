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

#include "dataio/mel_cache.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "common/error.h"

namespace percept::dataio {

static_assert(std::endian::native == std::endian::little,
              "mel cache I/O assumes a little-endian host");

void WriteMelCache(const std::filesystem::path& path,
                   const MelSpectrogram& mel) {
  mel.Validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write mel cache " + path.string());
  const uint32_t frames = static_cast<uint32_t>(mel.num_frames);
  const uint32_t bins = kMelBins;
  const float rate = static_cast<float>(mel.sample_rate);
  const uint32_t hop = static_cast<uint32_t>(mel.hop_length);
  os.write(reinterpret_cast<const char*>(&frames), 4);
  os.write(reinterpret_cast<const char*>(&bins), 4);
  os.write(reinterpret_cast<const char*>(&rate), 4);
  os.write(reinterpret_cast<const char*>(&hop), 4);
  std::vector<float> values(mel.frames.begin(), mel.frames.end());
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(float)));
}

MelSpectrogram ReadMelCache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open mel cache " + path.string());
  uint32_t frames = 0, bins = 0, hop = 0;
  float rate = 0.0f;
  is.read(reinterpret_cast<char*>(&frames), 4);
  is.read(reinterpret_cast<char*>(&bins), 4);
  is.read(reinterpret_cast<char*>(&rate), 4);
  is.read(reinterpret_cast<char*>(&hop), 4);
  if (!is) throw DataError(path.string() + ": truncated mel cache header");
  if (bins != kMelBins) {
    throw DataError(path.string() + ": mel cache has " + std::to_string(bins) +
                    " bins, expected 80");
  }
  std::vector<float> values(static_cast<size_t>(frames) * kMelBins);
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!is) throw DataError(path.string() + ": truncated mel cache body");
  MelSpectrogram mel;
  mel.num_frames = static_cast<int>(frames);
  mel.sample_rate = rate;
  mel.hop_length = static_cast<int>(hop);
  mel.frames.assign(values.begin(), values.end());
  mel.Validate();
  return mel;
}

}  // namespace percept::dataio
