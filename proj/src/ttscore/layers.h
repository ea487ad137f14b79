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

#ifndef PERCEPT_TTSCORE_LAYERS_H_
#define PERCEPT_TTSCORE_LAYERS_H_

#include <random>
#include <string>
#include <vector>

#include "nn/parameters.h"
#include "nn/tensor.h"

namespace percept::ttscore {

// Sinusoidal position table [length, width]; constant.
nn::Tensor PositionalEncoding(int length, int width);

class MultiHeadAttention {
 public:
  struct Output {
    nn::Tensor value;                  // [Tq, width]
    std::vector<nn::Tensor> weights;   // per head, [Tq, Tk]
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(nn::ParameterSet& params, const std::string& name,
                     int width, int heads, std::mt19937_64& rng);

  Output operator()(const nn::Tensor& query, const nn::Tensor& memory,
                    bool causal) const;

 private:
  int heads_ = 1;
  nn::Linear q_, k_, v_, o_;
};

// Position-wise two-layer network with ReLU.
struct FeedForward {
  nn::Linear in;
  nn::Linear out;

  static FeedForward Create(nn::ParameterSet& params, const std::string& name,
                            int width, int hidden, std::mt19937_64& rng);
  nn::Tensor operator()(const nn::Tensor& x) const;
};

// Two 1-D convolutions with ReLU in between.
struct ConvFeedForward {
  nn::Tensor w1, b1, w2, b2;
  int kernel = 3;

  static ConvFeedForward Create(nn::ParameterSet& params,
                                const std::string& name, int width, int hidden,
                                int kernel, std::mt19937_64& rng);
  nn::Tensor operator()(const nn::Tensor& x) const;
};

// Residual convolution stack on mel frames; tanh on every layer but the last.
class PostNet {
 public:
  PostNet() = default;
  PostNet(nn::ParameterSet& params, const std::string& name, int bins,
          int channels, int layers, int kernel, std::mt19937_64& rng);

  nn::Tensor operator()(const nn::Tensor& mel) const;

 private:
  struct Layer {
    nn::Tensor weight;
    nn::Tensor bias;
  };
  std::vector<Layer> layers_;
  int kernel_ = 5;
};

// Per-bin mel standardisation; models work in normalised space internally.
struct MelNormalizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static MelNormalizer Identity(int bins);
  nn::Tensor Normalize(const nn::Tensor& mel) const;
  nn::Tensor Denormalize(const nn::Tensor& mel) const;
};

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_LAYERS_H_
