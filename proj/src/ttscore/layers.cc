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

#include "ttscore/layers.h"

#include <cmath>

#include "common/error.h"
#include "nn/ops.h"

namespace percept::ttscore {

nn::Tensor PositionalEncoding(int length, int width) {
  std::vector<double> table(static_cast<size_t>(length) * width);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -2.0 * (i / 2) / width);
      table[static_cast<size_t>(pos) * width + i] =
          i % 2 == 0 ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return nn::Tensor::FromVector({length, width}, std::move(table));
}

MultiHeadAttention::MultiHeadAttention(nn::ParameterSet& params,
                                       const std::string& name, int width,
                                       int heads, std::mt19937_64& rng)
    : heads_(heads) {
  if (heads < 1 || width % heads != 0) {
    throw UsageError("attention width must be divisible by the head count");
  }
  q_ = nn::Linear::Create(params, name + ".q", width, width, rng);
  k_ = nn::Linear::Create(params, name + ".k", width, width, rng);
  v_ = nn::Linear::Create(params, name + ".v", width, width, rng);
  o_ = nn::Linear::Create(params, name + ".o", width, width, rng);
}

MultiHeadAttention::Output MultiHeadAttention::operator()(
    const nn::Tensor& query, const nn::Tensor& memory, bool causal) const {
  const int width = query.dim(1);
  const int dk = width / heads_;
  const nn::Tensor q = nn::Scale(q_(query), 1.0 / std::sqrt(dk));
  const nn::Tensor kt = nn::Transpose(k_(memory));
  const nn::Tensor v = v_(memory);
  Output out;
  std::vector<nn::Tensor> parts;
  for (int h = 0; h < heads_; ++h) {
    const nn::Tensor scores =
        nn::MatMul(nn::SliceCols(q, h * dk, (h + 1) * dk),
                   nn::SliceRows(kt, h * dk, (h + 1) * dk));
    nn::Tensor weights = nn::SoftmaxRows(scores, causal);
    parts.push_back(
        nn::MatMul(weights, nn::SliceCols(v, h * dk, (h + 1) * dk)));
    out.weights.push_back(std::move(weights));
  }
  out.value = o_(heads_ == 1 ? parts[0] : nn::ConcatCols(parts));
  return out;
}

FeedForward FeedForward::Create(nn::ParameterSet& params,
                                const std::string& name, int width, int hidden,
                                std::mt19937_64& rng) {
  return {nn::Linear::Create(params, name + ".in", width, hidden, rng),
          nn::Linear::Create(params, name + ".out", hidden, width, rng)};
}

nn::Tensor FeedForward::operator()(const nn::Tensor& x) const {
  return out(nn::Relu(in(x)));
}

ConvFeedForward ConvFeedForward::Create(nn::ParameterSet& params,
                                        const std::string& name, int width,
                                        int hidden, int kernel,
                                        std::mt19937_64& rng) {
  ConvFeedForward f;
  f.kernel = kernel;
  f.w1 = params.Add(name + ".conv1.weight",
                    nn::XavierUniform(kernel * width, hidden, rng));
  f.b1 = params.Add(name + ".conv1.bias", nn::Tensor::Zeros({hidden}));
  f.w2 = params.Add(name + ".conv2.weight",
                    nn::XavierUniform(kernel * hidden, width, rng));
  f.b2 = params.Add(name + ".conv2.bias", nn::Tensor::Zeros({width}));
  return f;
}

nn::Tensor ConvFeedForward::operator()(const nn::Tensor& x) const {
  return nn::Conv1d(nn::Relu(nn::Conv1d(x, w1, b1, kernel)), w2, b2, kernel);
}

PostNet::PostNet(nn::ParameterSet& params, const std::string& name, int bins,
                 int channels, int layers, int kernel, std::mt19937_64& rng)
    : kernel_(kernel) {
  for (int i = 0; i < layers; ++i) {
    const int in = i == 0 ? bins : channels;
    const int out = i + 1 == layers ? bins : channels;
    const std::string base = name + ".conv" + std::to_string(i);
    Layer l;
    l.weight = params.Add(base + ".weight",
                          nn::XavierUniform(kernel * in, out, rng));
    l.bias = params.Add(base + ".bias", nn::Tensor::Zeros({out}));
    layers_.push_back(std::move(l));
  }
}

nn::Tensor PostNet::operator()(const nn::Tensor& mel) const {
  nn::Tensor x = mel;
  for (size_t i = 0; i < layers_.size(); ++i) {
    x = nn::Conv1d(x, layers_[i].weight, layers_[i].bias, kernel_);
    if (i + 1 < layers_.size()) x = nn::Tanh(x);
  }
  return x;
}

MelNormalizer MelNormalizer::Identity(int bins) {
  return {std::vector<double>(bins, 0.0), std::vector<double>(bins, 1.0)};
}

nn::Tensor MelNormalizer::Normalize(const nn::Tensor& mel) const {
  const int bins = static_cast<int>(mean.size());
  std::vector<double> inv(bins), shift(bins);
  for (int b = 0; b < bins; ++b) {
    inv[b] = 1.0 / stddev[b];
    shift[b] = -mean[b];
  }
  return nn::Mul(nn::Add(mel, nn::Tensor::FromVector({bins}, shift)),
                 nn::Tensor::FromVector({bins}, inv));
}

nn::Tensor MelNormalizer::Denormalize(const nn::Tensor& mel) const {
  const int bins = static_cast<int>(mean.size());
  return nn::Add(nn::Mul(mel, nn::Tensor::FromVector({bins}, stddev)),
                 nn::Tensor::FromVector({bins}, mean));
}

}  // namespace percept::ttscore
