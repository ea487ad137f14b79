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

#ifndef PERCEPT_MOSNET_MOSNET_H_
#define PERCEPT_MOSNET_MOSNET_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "dataio/types.h"
#include "json.hpp"
#include "nn/parameters.h"
#include "nn/tensor.h"

namespace percept::mosnet {

// CNN-BLSTM MOS regressor configuration. The default conv plan is four
// blocks of three 3x3 layers (16/32/64/128 channels) whose last layer strides
// the frequency axis by 3, collapsing 80 mel bins to 1 before the BLSTM.
struct MosPredictorConfig {
  int n_conv_layers = 12;
  std::vector<int> conv_channels = {16, 16, 16,  32,  32,  32,
                                    64, 64, 64, 128, 128, 128};
  std::vector<int> conv_freq_strides = {1, 1, 3, 1, 1, 3, 1, 1, 3, 1, 1, 3};
  int blstm_units = 32;
  // (hidden width, output width); the output width is always 1.
  std::pair<int, int> fc_sizes = {64, 1};
  int input_bins = dataio::kMelBins;
  double dropout = 0.3;

  void Validate() const;
  // Frequency width left after the conv stack.
  int ConvOutputBins() const;
};

void to_json(nlohmann::json& j, const MosPredictorConfig& c);
void from_json(const nlohmann::json& j, MosPredictorConfig& c);

// Zero-padded batch of mels with true lengths.
struct MelBatch {
  int max_frames = 0;
  std::vector<int> lengths;
  std::vector<double> data;  // [B, max_frames, 80]

  static MelBatch FromMels(const std::vector<dataio::MelSpectrogram>& mels);
  int size() const { return static_cast<int>(lengths.size()); }
};

class MosPredictor {
 public:
  struct Output {
    nn::Tensor frame_scores;     // [T, 1]
    nn::Tensor utterance_score;  // [1], mean of frame_scores
    nn::Tensor frame_features;   // [T, 2 * blstm_units]
  };

  MosPredictor(const MosPredictorConfig& config, uint64_t seed);

  // mel: [T, 80] in log-mel units. Passing a dropout generator enables
  // training-mode dropout; without it the forward pass is deterministic.
  Output Forward(const nn::Tensor& mel,
                 std::mt19937_64* dropout_rng = nullptr) const;

  // Scores each item on its true length; padding never reaches the model.
  std::vector<Output> ForwardBatch(const MelBatch& batch) const;

  // Evaluation-mode utterance score without recording a graph.
  double Score(const dataio::MelSpectrogram& mel) const;

  // A frozen predictor's parameters do not require grad and cannot be
  // handed to the trainer.
  void Freeze();
  bool frozen() const { return frozen_; }

  void SetInputNormalization(double mean, double scale);
  bool has_input_normalization() const { return has_norm_; }
  double input_mean() const { return input_mean_; }
  double input_scale() const { return input_scale_; }

  const MosPredictorConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

 private:
  nn::Tensor RunLstm(const nn::Tensor& x, int direction) const;

  MosPredictorConfig config_;
  nn::ParameterSet params_;
  struct ConvLayer {
    nn::Tensor weight;
    nn::Tensor bias;
    int stride_f;
  };
  std::vector<ConvLayer> conv_;
  struct LstmWeights {
    nn::Tensor input;      // [in, 4H]
    nn::Tensor recurrent;  // [H, 4H]
    nn::Tensor bias;       // [4H]
  };
  LstmWeights lstm_[2];
  nn::Linear fc_hidden_;
  nn::Linear fc_out_;
  bool frozen_ = false;
  bool has_norm_ = false;
  double input_mean_ = 0.0;
  double input_scale_ = 1.0;
};

inline constexpr char kMosCheckpointMagic[] = "MOSNET1";

void SaveMosPredictor(const MosPredictor& model,
                      const std::filesystem::path& dir,
                      const nlohmann::json& extra = {});
MosPredictor LoadMosPredictor(const std::filesystem::path& dir);

}  // namespace percept::mosnet

#endif  // PERCEPT_MOSNET_MOSNET_H_
