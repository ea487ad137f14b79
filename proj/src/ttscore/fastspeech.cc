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

#include "ttscore/fastspeech.h"

#include <algorithm>
#include <string>

#include "common/error.h"
#include "nn/ops.h"
#include "ttscore/losses.h"

namespace percept::ttscore {

std::vector<int> LengthRegulatorIndex(const std::vector<int>& durations) {
  std::vector<int> index;
  for (size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] < 0) throw DataError("negative duration");
    index.insert(index.end(), durations[i], static_cast<int>(i));
  }
  if (index.empty()) throw DataError("durations sum to zero");
  return index;
}

FastSpeech::FastSpeech(const TtsModelConfig& config, CharVocabulary vocabulary,
                       uint64_t seed)
    : TtsModel(config, std::move(vocabulary)) {
  std::mt19937_64 rng(seed);
  const int d = config_.d_model;
  const int bins = dataio::kMelBins;
  const int k = config_.duration_kernel;
  const int c = config_.duration_channels;
  embedding_ = params_.Add("encoder.embedding",
                           nn::XavierUniform(config_.vocab_size, d, rng));
  embed_norm_ = nn::LayerNorm::Create(params_, "encoder.embed_norm", d);
  encoder_alpha_ = params_.Add("encoder.alpha", nn::Tensor::Full({1}, 1.0));
  encoder_ = MakeBlocks("encoder", config_.encoder_layers, rng);
  encoder_norm_ = nn::LayerNorm::Create(params_, "encoder.norm", d);

  dur_w1_ = params_.Add("duration.conv1.weight",
                        nn::XavierUniform(k * d, c, rng));
  dur_b1_ = params_.Add("duration.conv1.bias", nn::Tensor::Zeros({c}));
  dur_norm1_ = nn::LayerNorm::Create(params_, "duration.norm1", c);
  dur_w2_ = params_.Add("duration.conv2.weight",
                        nn::XavierUniform(k * c, c, rng));
  dur_b2_ = params_.Add("duration.conv2.bias", nn::Tensor::Zeros({c}));
  dur_norm2_ = nn::LayerNorm::Create(params_, "duration.norm2", c);
  const int heads_out =
      config_.loss.duration_loss == DurationLoss::kCrossEntropyBucketed
          ? config_.loss.max_duration + 1
          : 1;
  dur_out_ = nn::Linear::Create(params_, "duration.out", c, heads_out, rng);

  decoder_alpha_ = params_.Add("decoder.alpha", nn::Tensor::Full({1}, 1.0));
  decoder_ = MakeBlocks("decoder", config_.decoder_layers, rng);
  decoder_norm_ = nn::LayerNorm::Create(params_, "decoder.norm", d);
  mel_proj_ = nn::Linear::Create(params_, "decoder.mel_proj", d, bins, rng);
  postnet_ = PostNet(params_, "postnet", bins, config_.postnet_channels,
                     config_.postnet_layers, config_.postnet_kernel, rng);
}

std::vector<FastSpeech::FftBlock> FastSpeech::MakeBlocks(
    const std::string& prefix, int count, std::mt19937_64& rng) {
  const int d = config_.d_model;
  std::vector<FftBlock> blocks;
  for (int i = 0; i < count; ++i) {
    const std::string p = prefix + ".layer" + std::to_string(i);
    FftBlock b;
    b.norm1 = nn::LayerNorm::Create(params_, p + ".norm1", d);
    b.attention = MultiHeadAttention(params_, p + ".attn", d, config_.heads,
                                     rng);
    b.norm2 = nn::LayerNorm::Create(params_, p + ".norm2", d);
    b.ffn = ConvFeedForward::Create(params_, p + ".ffn", d, config_.ffn_dim,
                                    config_.conv_kernel, rng);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

nn::Tensor FastSpeech::Drop(const nn::Tensor& x, std::mt19937_64* rng) const {
  return rng != nullptr && config_.dropout > 0.0
             ? nn::Dropout(x, config_.dropout, *rng)
             : x;
}

nn::Tensor FastSpeech::RunBlocks(const std::vector<FftBlock>& blocks,
                                 nn::Tensor x, std::mt19937_64* rng) const {
  for (const auto& b : blocks) {
    const nn::Tensor h = b.norm1(x);
    x = nn::Add(x, Drop(b.attention(h, h, false).value, rng));
    x = nn::Add(x, Drop(b.ffn(b.norm2(x)), rng));
  }
  return x;
}

TtsOutputs FastSpeech::Run(const TextSequence& text,
                           const std::vector<int>& durations,
                           std::mt19937_64* rng) const {
  CheckTokens(text);
  const int n = text.length();
  const int d = config_.d_model;
  nn::Tensor x = embed_norm_(nn::GatherRows(embedding_, text.token_ids));
  x = nn::Add(x, nn::Mul(PositionalEncoding(n, d), encoder_alpha_));
  const nn::Tensor memory = encoder_norm_(RunBlocks(encoder_, x, rng));

  const int k = config_.duration_kernel;
  nn::Tensor h = dur_norm1_(nn::Relu(nn::Conv1d(memory, dur_w1_, dur_b1_, k)));
  h = dur_norm2_(nn::Relu(nn::Conv1d(Drop(h, rng), dur_w2_, dur_b2_, k)));
  TtsOutputs out;
  out.duration_out = dur_out_(Drop(h, rng));
  out.durations = durations.empty()
                      ? DecodeDurations(out.duration_out,
                                        config_.loss.duration_loss)
                      : durations;
  if (durations.empty() &&
      std::all_of(out.durations.begin(), out.durations.end(),
                  [](int v) { return v == 0; })) {
    throw NumericError("predicted durations sum to zero");
  }
  if (static_cast<int>(out.durations.size()) != n) {
    throw DataError("expected " + std::to_string(n) + " durations, got " +
                    std::to_string(out.durations.size()));
  }
  const std::vector<int> index = LengthRegulatorIndex(out.durations);
  const int frames = static_cast<int>(index.size());
  nn::Tensor y = nn::GatherRows(memory, index);
  y = nn::Add(y, nn::Mul(PositionalEncoding(frames, d), decoder_alpha_));
  y = decoder_norm_(RunBlocks(decoder_, y, rng));
  const nn::Tensor pre = mel_proj_(y);
  out.mel_pre = normalizer_.Denormalize(pre);
  out.mel_post = normalizer_.Denormalize(nn::Add(pre, postnet_(pre)));
  return out;
}

TtsOutputs FastSpeech::Forward(const TtsExample& example,
                               std::mt19937_64* dropout_rng) const {
  if (!example.target.durations) {
    throw DataError("utterance " + example.utt_id +
                    " has no durations for the length regulator");
  }
  return Run(example.text, *example.target.durations, dropout_rng);
}

ConventionalLoss FastSpeech::Loss(const TtsOutputs& outputs,
                                  const TtsTarget& target) const {
  return FastSpeechConventionalLoss(outputs, target, config_.loss);
}

SynthesisResult FastSpeech::Synthesize(const TextSequence& text,
                                       const SynthesisOptions& options) const {
  nn::NoGradGuard no_grad;
  const TtsOutputs out = Run(text, {}, nullptr);
  SynthesisResult result;
  result.durations = out.durations;
  const int cap = options.max_frames_per_token * text.length();
  nn::Tensor mel = out.mel_post;
  if (mel.dim(0) > cap) {
    mel = nn::SliceRows(mel, 0, cap);
    result.truncated = true;
  }
  result.mel = ToMel(mel);
  return result;
}

}  // namespace percept::ttscore
