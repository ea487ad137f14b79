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

#ifndef PERCEPT_TTSCORE_MODEL_H_
#define PERCEPT_TTSCORE_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dataio/types.h"
#include "json.hpp"
#include "nn/parameters.h"
#include "nn/tensor.h"
#include "ttscore/layers.h"
#include "ttscore/text.h"
#include "ttscore/types.h"

namespace percept::ttscore {

enum class ModelFamily { kTransformer, kFastSpeech };
std::string FamilyName(ModelFamily family);
ModelFamily ParseFamily(const std::string& name);

enum class DurationLoss { kCrossEntropyBucketed, kMseLog };
std::string DurationLossName(DurationLoss mode);
DurationLoss ParseDurationLoss(const std::string& name);

struct TtsLossConfig {
  double guided_attention_weight = 1.0;
  double guided_attention_sigma = 0.2;
  double stop_pos_weight = 5.0;
  DurationLoss duration_loss = DurationLoss::kCrossEntropyBucketed;
  double duration_weight = 1.0;
  int max_duration = 50;  // last bucket of the cross-entropy head
};

struct TtsModelConfig {
  int vocab_size = 0;  // taken from the model's vocabulary
  int d_model = 64;
  int heads = 2;
  int ffn_dim = 256;
  int encoder_layers = 3;
  int decoder_layers = 3;
  int prenet_dim = 64;
  int postnet_channels = 64;
  int postnet_layers = 5;
  int postnet_kernel = 5;
  int conv_kernel = 3;  // FFT block convolutions
  int duration_channels = 64;
  int duration_kernel = 3;
  double dropout = 0.1;
  int sample_rate = 22050;
  int hop_length = 256;
  TtsLossConfig loss;

  void Validate() const;
};

void to_json(nlohmann::json& j, const TtsLossConfig& c);
void from_json(const nlohmann::json& j, TtsLossConfig& c);
void to_json(nlohmann::json& j, const TtsModelConfig& c);
void from_json(const nlohmann::json& j, TtsModelConfig& c);

struct TtsOutputs {
  nn::Tensor mel_pre;   // [T, 80], log-mel units
  nn::Tensor mel_post;  // [T, 80], mel_pre plus the post-net residual
  nn::Tensor stop_logits;  // [T, 1]; autoregressive family only
  std::vector<AttentionAlignment> alignments;
  nn::Tensor duration_out;  // [N, D + 1] logits or [N, 1] log durations
  std::vector<int> durations;  // durations used by the length regulator
};

// `terms` holds the unweighted breakdown: l2_pre, l2_post and either
// stop_bce and guided_attn or duration_loss.
struct ConventionalLoss {
  nn::Tensor total;
  std::map<std::string, double> terms;
};

struct SynthesisOptions {
  double stop_threshold = 0.5;
  int max_frames_per_token = 20;
};

struct SynthesisResult {
  dataio::MelSpectrogram mel;
  bool truncated = false;
  std::vector<int> durations;  // non-autoregressive family only
};

class TtsModel {
 public:
  TtsModel(const TtsModelConfig& config, CharVocabulary vocabulary);
  virtual ~TtsModel() = default;
  TtsModel(const TtsModel&) = delete;
  TtsModel& operator=(const TtsModel&) = delete;

  virtual ModelFamily family() const = 0;

  // Teacher-forced pass over a training example. A dropout generator turns on
  // training-mode dropout.
  virtual TtsOutputs Forward(const TtsExample& example,
                             std::mt19937_64* dropout_rng = nullptr) const = 0;
  virtual ConventionalLoss Loss(const TtsOutputs& outputs,
                                const TtsTarget& target) const = 0;
  virtual SynthesisResult Synthesize(const TextSequence& text,
                                     const SynthesisOptions& options) const = 0;

  const TtsModelConfig& config() const { return config_; }
  const CharVocabulary& vocabulary() const { return vocabulary_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const MelNormalizer& normalizer() const { return normalizer_; }
  void set_normalizer(MelNormalizer normalizer);

 protected:
  void CheckTokens(const TextSequence& text) const;
  dataio::MelSpectrogram ToMel(const nn::Tensor& frames) const;

  TtsModelConfig config_;
  CharVocabulary vocabulary_;
  nn::ParameterSet params_;
  MelNormalizer normalizer_;
};

std::unique_ptr<TtsModel> CreateTtsModel(ModelFamily family,
                                         const TtsModelConfig& config,
                                         const CharVocabulary& vocabulary,
                                         uint64_t seed);

// Per-bin mean and standard deviation over all frames (std floored at 1e-3).
MelNormalizer FitMelNormalizer(
    const std::vector<dataio::MelSpectrogram>& mels);

// `extra` is merged into meta.json (epoch, metrics and so on).
void SaveTtsModel(const TtsModel& model, const std::filesystem::path& dir,
                  const nlohmann::json& extra = nlohmann::json::object());
std::unique_ptr<TtsModel> LoadTtsModel(const std::filesystem::path& dir);

inline constexpr char kTtsCheckpointMagic[] = "TTSCORE1";

}  // namespace percept::ttscore

#endif  // PERCEPT_TTSCORE_MODEL_H_
