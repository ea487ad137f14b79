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

#include "ttscore/transformer_tts.h"

#include <cmath>
#include <string>

#include "common/error.h"
#include "nn/ops.h"
#include "ttscore/losses.h"

namespace percept::ttscore {

namespace {

constexpr double kPrenetDropout = 0.5;

}  // namespace

TransformerTts::TransformerTts(const TtsModelConfig& config,
                               CharVocabulary vocabulary, uint64_t seed)
    : TtsModel(config, std::move(vocabulary)) {
  std::mt19937_64 rng(seed);
  const int d = config_.d_model;
  const int bins = dataio::kMelBins;
  embedding_ = params_.Add("encoder.embedding",
                           nn::XavierUniform(config_.vocab_size, d, rng));
  embed_norm_ = nn::LayerNorm::Create(params_, "encoder.embed_norm", d);
  encoder_alpha_ = params_.Add("encoder.alpha", nn::Tensor::Full({1}, 1.0));
  for (int i = 0; i < config_.encoder_layers; ++i) {
    const std::string p = "encoder.layer" + std::to_string(i);
    EncoderLayer l;
    l.norm1 = nn::LayerNorm::Create(params_, p + ".norm1", d);
    l.attention = MultiHeadAttention(params_, p + ".attn", d, config_.heads,
                                     rng);
    l.norm2 = nn::LayerNorm::Create(params_, p + ".norm2", d);
    l.ffn = FeedForward::Create(params_, p + ".ffn", d, config_.ffn_dim, rng);
    encoder_.push_back(std::move(l));
  }
  encoder_norm_ = nn::LayerNorm::Create(params_, "encoder.norm", d);

  prenet1_ = nn::Linear::Create(params_, "decoder.prenet1", bins,
                                config_.prenet_dim, rng);
  prenet2_ = nn::Linear::Create(params_, "decoder.prenet2", config_.prenet_dim,
                                d, rng);
  decoder_alpha_ = params_.Add("decoder.alpha", nn::Tensor::Full({1}, 1.0));
  for (int i = 0; i < config_.decoder_layers; ++i) {
    const std::string p = "decoder.layer" + std::to_string(i);
    DecoderLayer l;
    l.norm1 = nn::LayerNorm::Create(params_, p + ".norm1", d);
    l.self_attention = MultiHeadAttention(params_, p + ".self_attn", d,
                                          config_.heads, rng);
    l.norm2 = nn::LayerNorm::Create(params_, p + ".norm2", d);
    l.cross_attention = MultiHeadAttention(params_, p + ".cross_attn", d,
                                           config_.heads, rng);
    l.norm3 = nn::LayerNorm::Create(params_, p + ".norm3", d);
    l.ffn = FeedForward::Create(params_, p + ".ffn", d, config_.ffn_dim, rng);
    decoder_.push_back(std::move(l));
  }
  decoder_norm_ = nn::LayerNorm::Create(params_, "decoder.norm", d);
  mel_proj_ = nn::Linear::Create(params_, "decoder.mel_proj", d, bins, rng);
  stop_proj_ = nn::Linear::Create(params_, "decoder.stop_proj", d, 1, rng);
  postnet_ = PostNet(params_, "postnet", bins, config_.postnet_channels,
                     config_.postnet_layers, config_.postnet_kernel, rng);
}

nn::Tensor TransformerTts::Drop(const nn::Tensor& x, double p,
                                std::mt19937_64* rng) const {
  return rng != nullptr && p > 0.0 ? nn::Dropout(x, p, *rng) : x;
}

nn::Tensor TransformerTts::Encode(const TextSequence& text,
                                  std::mt19937_64* rng) const {
  CheckTokens(text);
  const int n = text.length();
  nn::Tensor x = embed_norm_(nn::GatherRows(embedding_, text.token_ids));
  x = nn::Add(x, nn::Mul(PositionalEncoding(n, config_.d_model),
                         encoder_alpha_));
  for (const auto& l : encoder_) {
    const nn::Tensor h = l.norm1(x);
    x = nn::Add(x, Drop(l.attention(h, h, false).value, config_.dropout, rng));
    x = nn::Add(x, Drop(l.ffn(l.norm2(x)), config_.dropout, rng));
  }
  return encoder_norm_(x);
}

TtsOutputs TransformerTts::Decode(const nn::Tensor& memory,
                                  const nn::Tensor& decoder_input,
                                  std::mt19937_64* rng) const {
  const int frames = decoder_input.dim(0);
  nn::Tensor x = Drop(nn::Relu(prenet1_(decoder_input)), kPrenetDropout, rng);
  x = Drop(nn::Relu(prenet2_(x)), kPrenetDropout, rng);
  x = nn::Add(x, nn::Mul(PositionalEncoding(frames, config_.d_model),
                         decoder_alpha_));
  TtsOutputs out;
  for (size_t i = 0; i < decoder_.size(); ++i) {
    const auto& l = decoder_[i];
    const nn::Tensor h = l.norm1(x);
    x = nn::Add(x, Drop(l.self_attention(h, h, true).value, config_.dropout,
                        rng));
    auto cross = l.cross_attention(l.norm2(x), memory, false);
    x = nn::Add(x, Drop(cross.value, config_.dropout, rng));
    for (size_t h_idx = 0; h_idx < cross.weights.size(); ++h_idx) {
      out.alignments.push_back({static_cast<int>(i), static_cast<int>(h_idx),
                                cross.weights[h_idx]});
    }
    x = nn::Add(x, Drop(l.ffn(l.norm3(x)), config_.dropout, rng));
  }
  x = decoder_norm_(x);
  out.mel_pre = mel_proj_(x);
  out.stop_logits = stop_proj_(x);
  return out;
}

TtsOutputs TransformerTts::Forward(const TtsExample& example,
                                   std::mt19937_64* dropout_rng) const {
  const auto& mel = example.target.mel;
  mel.Validate();
  const nn::Tensor memory = Encode(example.text, dropout_rng);
  const nn::Tensor norm = normalizer_.Normalize(mel.ToTensor());
  nn::Tensor input = nn::Tensor::Zeros({1, dataio::kMelBins});
  if (mel.num_frames > 1) {
    input = nn::ConcatRows({input, nn::SliceRows(norm, 0, mel.num_frames - 1)});
  }
  TtsOutputs out = Decode(memory, input, dropout_rng);
  const nn::Tensor pre = out.mel_pre;
  const nn::Tensor post = nn::Add(pre, postnet_(pre));
  out.mel_pre = normalizer_.Denormalize(pre);
  out.mel_post = normalizer_.Denormalize(post);
  return out;
}

ConventionalLoss TransformerTts::Loss(const TtsOutputs& outputs,
                                      const TtsTarget& target) const {
  return TransformerConventionalLoss(outputs, target, config_.loss);
}

SynthesisResult TransformerTts::Synthesize(
    const TextSequence& text, const SynthesisOptions& options) const {
  nn::NoGradGuard no_grad;
  const nn::Tensor memory = Encode(text, nullptr);
  const int max_frames = options.max_frames_per_token * text.length();
  const int bins = dataio::kMelBins;
  std::vector<double> inputs(bins, 0.0);  // go frame
  std::vector<double> produced;
  SynthesisResult result;
  result.truncated = true;
  for (int step = 0; step < max_frames; ++step) {
    const TtsOutputs out = Decode(
        memory, nn::Tensor::FromVector({step + 1, bins}, inputs), nullptr);
    const auto frame = out.mel_pre.data().subspan(
        static_cast<size_t>(step) * bins, bins);
    produced.insert(produced.end(), frame.begin(), frame.end());
    inputs.insert(inputs.end(), frame.begin(), frame.end());
    const double logit = out.stop_logits.at(step, 0);
    if (!std::isfinite(logit)) throw NumericError("non-finite stop logit");
    if (1.0 / (1.0 + std::exp(-logit)) > options.stop_threshold) {
      result.truncated = false;
      break;
    }
  }
  const int frames = static_cast<int>(produced.size()) / bins;
  const nn::Tensor pre = nn::Tensor::FromVector({frames, bins}, produced);
  result.mel = ToMel(normalizer_.Denormalize(nn::Add(pre, postnet_(pre))));
  return result;
}

}  // namespace percept::ttscore
