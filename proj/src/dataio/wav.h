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

#ifndef PERCEPT_DATAIO_WAV_H_
#define PERCEPT_DATAIO_WAV_H_

#include <filesystem>
#include <span>
#include <vector>

namespace percept::dataio {

struct Waveform {
  int sample_rate = 0;
  std::vector<double> samples;  // mono, in [-1, 1)
};

// Reads a 16-bit PCM RIFF/WAVE file. Multi-channel input is averaged to mono.
Waveform ReadWav(const std::filesystem::path& path);

// Writes mono 16-bit PCM; samples are clipped to [-1, 1].
void WriteWav(const std::filesystem::path& path, std::span<const double> samples,
              int sample_rate);

}  // namespace percept::dataio

#endif  // PERCEPT_DATAIO_WAV_H_
