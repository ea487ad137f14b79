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

#include "dataio/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "common/error.h"

namespace percept::dataio {

namespace {

uint32_t Le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t Le16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void Put32(std::ofstream& os, uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void Put16(std::ofstream& os, uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

Waveform ReadWav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open audio file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(where + "not a RIFF/WAVE file");
  }
  int channels = 0, bits = 0, rate = 0;
  const unsigned char* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const uint32_t size = Le32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size()) {
      if (std::memcmp(chunk, "data", 4) != 0) {
        throw DataError(where + "truncated chunk");
      }
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(where + "short fmt chunk");
      const uint16_t format = Le16(bytes.data() + body);
      channels = Le16(bytes.data() + body + 2);
      rate = static_cast<int>(Le32(bytes.data() + body + 4));
      bits = Le16(bytes.data() + body + 14);
      if (format != 1) throw DataError(where + "only PCM WAV is supported");
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<size_t>(size, bytes.size() - body);
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || data == nullptr) {
    throw DataError(where + "missing fmt or data chunk");
  }
  if (bits != 16) throw DataError(where + "only 16-bit PCM is supported");

  Waveform wav;
  wav.sample_rate = rate;
  const size_t frames = data_size / (2u * channels);
  wav.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      acc += static_cast<int16_t>(Le16(data + 2 * (i * channels + c)));
    }
    wav.samples[i] = acc / channels / 32768.0;
  }
  return wav;
}

void WriteWav(const std::filesystem::path& path,
              std::span<const double> samples, int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write audio file " + path.string());
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  Put32(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  Put32(os, 16);
  Put16(os, 1);
  Put16(os, 1);
  Put32(os, static_cast<uint32_t>(sample_rate));
  Put32(os, static_cast<uint32_t>(sample_rate) * 2);
  Put16(os, 2);
  Put16(os, 16);
  os.write("data", 4);
  Put32(os, data_bytes);
  for (double s : samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const long q = std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L);
    Put16(os, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
}

}  // namespace percept::dataio
