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

#ifndef PERCEPT_NN_PARAMETERS_H_
#define PERCEPT_NN_PARAMETERS_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nn/tensor.h"

namespace percept::nn {

// Ordered collection of named trainable tensors. Tensors are shared handles,
// so layers keep their own copies and both views see the same storage.
class ParameterSet {
 public:
  Tensor Add(const std::string& name, Tensor value);
  const Tensor& Get(const std::string& name) const;
  bool Contains(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor>>& items() const {
    return items_;
  }
  std::vector<Tensor> tensors() const;
  size_t NumValues() const;

  void ZeroGrad();
  void SetRequiresGrad(bool flag);

  // FNV-1a over the raw bytes of every value, in registration order.
  uint64_t Checksum() const;

  // Binary archive: magic string, then per tensor name, shape, float64 data.
  // Loading requires the same names and shapes in the same order.
  void WriteArchive(std::ostream& os, std::string_view magic) const;
  void ReadArchive(std::istream& is, std::string_view magic);

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

// Initializers.
Tensor XavierUniform(int fan_in, int fan_out, std::mt19937_64& rng);
Tensor HeUniform(const Shape& shape, int fan_in, std::mt19937_64& rng);

// Affine map y = x W + b on [*, in] inputs.
struct Linear {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]

  static Linear Create(ParameterSet& params, const std::string& name, int in,
                       int out, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x) const;
};

struct LayerNorm {
  Tensor gain;
  Tensor bias;

  static LayerNorm Create(ParameterSet& params, const std::string& name,
                          int width);
  Tensor operator()(const Tensor& x) const;
};

// Checkpoint directory: meta.json (with "format" = magic) and params.bin.
void SaveCheckpoint(const std::filesystem::path& dir, std::string_view magic,
                    const nlohmann::json& meta, const ParameterSet& params);
nlohmann::json ReadCheckpointMeta(const std::filesystem::path& dir,
                                  std::string_view magic);
void LoadCheckpointParams(const std::filesystem::path& dir,
                          std::string_view magic, ParameterSet& params);

}  // namespace percept::nn

#endif  // PERCEPT_NN_PARAMETERS_H_
