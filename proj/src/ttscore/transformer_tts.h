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

#ifndef PERCEPT_TTSCORE_TRANSFORMER_TTS_H_
#define PERCEPT_TTSCORE_TRANSFORMER_TTS_H_

#include <cstdint>
#include <random>
#include <vector>

#include "ttscore/layers.h"
#include "ttscore/model.h"

namespace percept::ttscore {

// Autoregressive encoder-decoder with pre-layer-norm blocks, a mel post-net
// and a stop-token head.
class TransformerTts : public TtsModel {
 public:
  TransformerTts(const TtsModelConfig& config, CharVocabulary vocabulary,
                 uint64_t seed);

  ModelFamily family() const override { return ModelFamily::kTransformer; }
  TtsOutputs Forward(const TtsExample& example,
                     std::mt19937_64* dropout_rng = nullptr) const override;
  ConventionalLoss Loss(const TtsOutputs& outputs,
                        const TtsTarget& target) const override;
  SynthesisResult Synthesize(const TextSequence& text,
                             const SynthesisOptions& options) const override;

  nn::Tensor Encode(const TextSequence& text, std::mt19937_64* rng) const;

  // Runs the decoder on normalised input frames [T, 80] (first row is the
  // all-zero go frame) and returns normalised pre-net mel, stop logits and
  // cross-attention weights.
  TtsOutputs Decode(const nn::Tensor& memory, const nn::Tensor& decoder_input,
                    std::mt19937_64* rng) const;

 private:
  struct EncoderLayer {
    nn::LayerNorm norm1, norm2;
    MultiHeadAttention attention;
    FeedForward ffn;
  };
  struct DecoderLayer {
    nn::LayerNorm norm1, norm2, norm3;
    MultiHeadAttention self_attention;
    MultiHeadAttention cross_attention;
    FeedForward ffn;
  };

  nn::Tensor Drop(const nn::Tensor& x, double p, std::mt19937_64* rng) const;

  nn::Tensor embedding_;
  nn::LayerNorm embed_norm_;
  nn::Tensor encoder_alpha_;
  std::vector<EncoderLayer> encoder_;
  nn::LayerNorm encoder_norm_;
  nn::Linear prenet1_, prenet2_;
  nn::Tensor decoder_alpha_;
  std::vector<DecoderLayer> decoder_;
  nn::LayerNorm decoder_norm_;
  nn::Linear mel_proj_;
  nn::Linear stop_proj_;
  PostNet postnet_;
};

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_TRANSFORMER_TTS_H_
