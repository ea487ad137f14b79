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

#include "dataio/mel.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "common/error.h"

namespace percept::dataio {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

struct FftwPlan {
  fftw_plan plan = nullptr;
  double* in = nullptr;
  fftw_complex* out = nullptr;

  explicit FftwPlan(int n) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  ~FftwPlan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace

void MelConfig::Validate() const {
  if (n_mels != kMelBins) throw UsageError("mel config: n_mels must be 80");
  if (sample_rate <= 0 || n_fft <= 0 || hop_length <= 0 || win_length <= 0) {
    throw UsageError("mel config: sizes must be positive");
  }
  if (win_length > n_fft) {
    throw UsageError("mel config: win_length must not exceed n_fft");
  }
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw UsageError("mel config: need 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (!(log_floor > 0.0)) throw UsageError("mel config: log_floor must be > 0");
}

void to_json(nlohmann::json& j, const MelConfig& c) {
  j = nlohmann::json{{"sample_rate", c.sample_rate}, {"n_fft", c.n_fft},
                     {"hop_length", c.hop_length},   {"win_length", c.win_length},
                     {"n_mels", c.n_mels},           {"fmin", c.fmin},
                     {"fmax", c.fmax},               {"log_floor", c.log_floor},
                     {"center", c.center}};
}

void from_json(const nlohmann::json& j, MelConfig& c) {
  const MelConfig d;
  c.sample_rate = j.value("sample_rate", d.sample_rate);
  c.n_fft = j.value("n_fft", d.n_fft);
  c.hop_length = j.value("hop_length", d.hop_length);
  c.win_length = j.value("win_length", d.win_length);
  c.n_mels = j.value("n_mels", d.n_mels);
  c.fmin = j.value("fmin", d.fmin);
  c.fmax = j.value("fmax", d.fmax);
  c.log_floor = j.value("log_floor", d.log_floor);
  c.center = j.value("center", d.center);
}

int NumMelFrames(size_t length, const MelConfig& config) {
  const size_t padded = config.center ? length + 2 * (config.n_fft / 2) : length;
  const size_t frame = static_cast<size_t>(config.center ? config.n_fft
                                                         : config.win_length);
  if (padded < frame) return 0;
  return static_cast<int>(1 + (padded - frame) / config.hop_length);
}

std::vector<std::vector<double>> MelFilterbank(const MelConfig& config) {
  const int n_bins = config.n_fft / 2 + 1;
  const double mel_lo = HzToMel(config.fmin);
  const double mel_hi = HzToMel(config.fmax);
  std::vector<double> edges(config.n_mels + 2);
  for (int i = 0; i < config.n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (config.n_mels + 1));
  }
  std::vector<std::vector<double>> bank(config.n_mels,
                                        std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < config.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f =
          static_cast<double>(k) * config.sample_rate / config.n_fft;
      const double rise = (f - lo) / (mid - lo);
      const double fall = (hi - f) / (hi - mid);
      bank[m][k] = std::max(0.0, std::min(rise, fall));
    }
  }
  return bank;
}

MelSpectrogram ExtractMel(std::span<const double> waveform, int sample_rate,
                          const MelConfig& config) {
  config.Validate();
  if (waveform.empty()) throw DataError("cannot extract mel from empty audio");
  if (sample_rate != config.sample_rate) {
    throw DataError("sample rate " + std::to_string(sample_rate) +
                    " does not match configured " +
                    std::to_string(config.sample_rate));
  }
  std::vector<double> signal;
  if (config.center) {
    const int pad = config.n_fft / 2;
    if (waveform.size() <= static_cast<size_t>(pad)) {
      throw DataError("audio shorter than reflect padding");
    }
    signal.reserve(waveform.size() + 2 * pad);
    for (int i = pad; i > 0; --i) signal.push_back(waveform[i]);
    signal.insert(signal.end(), waveform.begin(), waveform.end());
    const size_t n = waveform.size();
    for (int i = 1; i <= pad; ++i) signal.push_back(waveform[n - 1 - i]);
  } else {
    signal.assign(waveform.begin(), waveform.end());
  }
  const int frames = NumMelFrames(waveform.size(), config);
  if (frames < 1) {
    throw DataError("audio of " + std::to_string(waveform.size()) +
                    " samples is shorter than one analysis window");
  }

  // Periodic Hann window, centred inside the FFT frame.
  std::vector<double> window(config.n_fft, 0.0);
  const int offset = (config.n_fft - config.win_length) / 2;
  for (int i = 0; i < config.win_length; ++i) {
    window[offset + i] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / config.win_length);
  }
  const auto bank = MelFilterbank(config);
  const int n_bins = config.n_fft / 2 + 1;
  // Without centring, frames are win_length long; place them in the FFT
  // buffer the same way as the window.
  const int frame_len = config.center ? config.n_fft : config.win_length;
  const int frame_offset = config.center ? 0 : offset;

  FftwPlan fft(config.n_fft);
  std::vector<double> magnitude(n_bins);
  MelSpectrogram mel;
  mel.num_frames = frames;
  mel.sample_rate = config.sample_rate;
  mel.hop_length = config.hop_length;
  mel.frames.resize(static_cast<size_t>(frames) * kMelBins);
  for (int t = 0; t < frames; ++t) {
    std::fill(fft.in, fft.in + config.n_fft, 0.0);
    const size_t start = static_cast<size_t>(t) * config.hop_length;
    for (int i = 0; i < frame_len; ++i) {
      fft.in[frame_offset + i] =
          signal[start + i] * window[frame_offset + i];
    }
    fftw_execute(fft.plan);
    for (int k = 0; k < n_bins; ++k) {
      magnitude[k] = std::hypot(fft.out[k][0], fft.out[k][1]);
    }
    for (int m = 0; m < kMelBins; ++m) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += bank[m][k] * magnitude[k];
      mel.frames[static_cast<size_t>(t) * kMelBins + m] =
          std::log(std::max(e, config.log_floor));
    }
  }
  return mel;
}

}  // namespace percept::dataio
