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

#ifndef PERCEPT_DATAIO_MEL_H_
#define PERCEPT_DATAIO_MEL_H_

#include <span>
#include <vector>

#include "dataio/types.h"
#include "json.hpp"

namespace percept::dataio {

struct MelConfig {
  int sample_rate = 22050;
  int n_fft = 1024;
  int hop_length = 256;
  int win_length = 1024;
  int n_mels = kMelBins;
  double fmin = 80.0;
  double fmax = 7600.0;
  double log_floor = 1e-10;
  // Reflect-pad n_fft / 2 samples on both ends before framing.
  bool center = false;

  void Validate() const;
};

void to_json(nlohmann::json& j, const MelConfig& c);
void from_json(const nlohmann::json& j, MelConfig& c);

// Number of frames produced for a signal of `length` samples.
int NumMelFrames(size_t length, const MelConfig& config);

// Triangular filters on the HTK mel scale, peak 1, shape [n_mels][n_fft/2+1].
std::vector<std::vector<double>> MelFilterbank(const MelConfig& config);

// Log-compressed magnitude mel spectrogram: ln(max(mel, floor)).
MelSpectrogram ExtractMel(std::span<const double> waveform, int sample_rate,
                          const MelConfig& config);

}  // namespace percept::dataio

#endif  // PERCEPT_DATAIO_MEL_H_
