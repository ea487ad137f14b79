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

#ifndef PERCEPT_DATAIO_MEL_CACHE_H_
#define PERCEPT_DATAIO_MEL_CACHE_H_

#include <filesystem>

#include "dataio/types.h"

namespace percept::dataio {

// Binary mel cache: little-endian header (u32 T, u32 n_mels = 80,
// f32 sample_rate, u32 hop) followed by T x 80 f32 values, row-major.
void WriteMelCache(const std::filesystem::path& path, const MelSpectrogram& mel);
MelSpectrogram ReadMelCache(const std::filesystem::path& path);

}  // namespace percept::dataio

#endif  // PERCEPT_DATAIO_MEL_CACHE_H_
