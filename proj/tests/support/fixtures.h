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

#ifndef PERCEPT_TESTS_SUPPORT_FIXTURES_H_
#define PERCEPT_TESTS_SUPPORT_FIXTURES_H_

#include <random>
#include <string>
#include <vector>

#include "dataio/types.h"
#include "mosnet/mosnet.h"
#include "nn/tensor.h"
#include "ttscore/model.h"

namespace percept::testing {

inline dataio::MelSpectrogram RandomMel(int frames, std::mt19937_64& rng,
                                        double mean = -4.0,
                                        double stddev = 1.5) {
  std::normal_distribution<double> dist(mean, stddev);
  dataio::MelSpectrogram mel;
  mel.num_frames = frames;
  mel.frames.resize(static_cast<size_t>(frames) * dataio::kMelBins);
  for (double& v : mel.frames) v = dist(rng);
  return mel;
}

// Widths of at most 8 everywhere; dropout off.
inline ttscore::TtsModelConfig TinyTtsConfig() {
  ttscore::TtsModelConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.ffn_dim = 8;
  c.encoder_layers = 2;
  c.decoder_layers = 2;
  c.prenet_dim = 8;
  c.postnet_channels = 8;
  c.postnet_layers = 3;
  c.duration_channels = 8;
  c.dropout = 0.0;
  return c;
}

inline mosnet::MosPredictorConfig TinyMosConfig() {
  mosnet::MosPredictorConfig c;
  c.conv_channels = {4, 4, 4, 4, 4, 4, 8, 8, 8, 8, 8, 8};
  c.blstm_units = 4;
  c.fc_sizes = {8, 1};
  c.dropout = 0.0;
  return c;
}

// Zero-initialised biases put the all-zero go frame exactly on a ReLU kink
// in the decoder prenet, where central differences are meaningless.
inline void JitterBiases(nn::ParameterSet& params, std::mt19937_64& rng,
                         double stddev = 0.1) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (const auto& [name, tensor] : params.items()) {
    if (name.size() < 5 || name.compare(name.size() - 5, 5, ".bias") != 0) {
      continue;
    }
    nn::Tensor t = tensor;
    for (double& v : t.mutable_data()) v += dist(rng);
  }
}

inline void ZeroParameters(nn::ParameterSet& params,
                           const std::string& prefix) {
  for (const auto& [name, tensor] : params.items()) {
    if (name.rfind(prefix, 0) != 0) continue;
    nn::Tensor t = tensor;
    for (double& v : t.mutable_data()) v = 0.0;
  }
}

inline void SetParameter(nn::ParameterSet& params, const std::string& name,
                         const std::vector<double>& values) {
  nn::Tensor t = params.Get(name);
  std::copy(values.begin(), values.end(), t.mutable_data().begin());
}

// Predictor whose score is `value` for every input.
inline void MakeConstantPredictor(mosnet::MosPredictor& model, double value) {
  ZeroParameters(model.params(), "");
  SetParameter(model.params(), "fc2.bias", {value});
}

// Concatenated gradients of every parameter, in registration order.
inline std::vector<double> FlatGradients(const nn::ParameterSet& params) {
  std::vector<double> out;
  for (const auto& [name, tensor] : params.items()) {
    const auto g = tensor.grad();
    if (g.empty()) {
      out.insert(out.end(), tensor.size(), 0.0);
    } else {
      out.insert(out.end(), g.begin(), g.end());
    }
  }
  return out;
}

inline std::vector<double> FlatValues(const nn::ParameterSet& params) {
  std::vector<double> out;
  for (const auto& [name, tensor] : params.items()) {
    out.insert(out.end(), tensor.data().begin(), tensor.data().end());
  }
  return out;
}

}  // namespace percept::testing

#endif  // PERCEPT_TESTS_SUPPORT_FIXTURES_H_
