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

#ifndef PERCEPT_TTSCORE_FASTSPEECH_H_
#define PERCEPT_TTSCORE_FASTSPEECH_H_

#include <cstdint>
#include <random>
#include <vector>

#include "ttscore/layers.h"
#include "ttscore/model.h"

namespace percept::ttscore {

// Frame indices that repeat encoder row i durations[i] times. Throws
// DataError on negative durations or a zero total.
std::vector<int> LengthRegulatorIndex(const std::vector<int>& durations);

// Non-autoregressive model: FFT-block encoder, duration predictor, length
// regulator, FFT-block decoder and post-net.
class FastSpeech : public TtsModel {
 public:
  FastSpeech(const TtsModelConfig& config, CharVocabulary vocabulary,
             uint64_t seed);

  ModelFamily family() const override { return ModelFamily::kFastSpeech; }
  // Uses the example's target durations; they are required.
  TtsOutputs Forward(const TtsExample& example,
                     std::mt19937_64* dropout_rng = nullptr) const override;
  ConventionalLoss Loss(const TtsOutputs& outputs,
                        const TtsTarget& target) const override;
  SynthesisResult Synthesize(const TextSequence& text,
                             const SynthesisOptions& options) const override;

  // Forward pass with explicit durations, or predicted ones when empty. A
  // zero predicted total raises NumericError.
  TtsOutputs Run(const TextSequence& text, const std::vector<int>& durations,
                 std::mt19937_64* rng) const;

 private:
  struct FftBlock {
    nn::LayerNorm norm1, norm2;
    MultiHeadAttention attention;
    ConvFeedForward ffn;
  };

  nn::Tensor Drop(const nn::Tensor& x, std::mt19937_64* rng) const;
  nn::Tensor RunBlocks(const std::vector<FftBlock>& blocks, nn::Tensor x,
                       std::mt19937_64* rng) const;
  std::vector<FftBlock> MakeBlocks(const std::string& prefix, int count,
                                   std::mt19937_64& rng);

  nn::Tensor embedding_;
  nn::LayerNorm embed_norm_;
  nn::Tensor encoder_alpha_;
  std::vector<FftBlock> encoder_;
  nn::LayerNorm encoder_norm_;
  nn::Tensor dur_w1_, dur_b1_, dur_w2_, dur_b2_;
  nn::LayerNorm dur_norm1_, dur_norm2_;
  nn::Linear dur_out_;
  nn::Tensor decoder_alpha_;
  std::vector<FftBlock> decoder_;
  nn::LayerNorm decoder_norm_;
  nn::Linear mel_proj_;
  PostNet postnet_;
};

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_FASTSPEECH_H_
