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

#ifndef PERCEPT_MOSNET_TRAINER_H_
#define PERCEPT_MOSNET_TRAINER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dataio/types.h"
#include "mosnet/mosnet.h"
#include "nn/tensor.h"

namespace percept::mosnet {

// Extension point for multi-task objectives (e.g. spoofing-type heads).
// `loss` receives the BLSTM frame features of one utterance; the head owns
// its parameters, which are optimized alongside the predictor's.
struct AuxiliaryHead {
  std::string name;
  double weight = 1.0;
  std::vector<nn::Tensor> parameters;
  std::function<nn::Tensor(const nn::Tensor& frame_features,
                           const dataio::RatedUtterance& item)>
      loss;
};

struct MosTrainHyper {
  int epochs = 100;
  int batch_size = 8;
  double learning_rate = 1e-4;
  // Weight of the per-frame MSE term; 0 leaves pure utterance-level MSE.
  double frame_loss_weight = 1.0;
  // Early stopping on held-out MSE; ignored without a validation set.
  int patience = 5;
  double grad_clip = 5.0;
  uint64_t seed = 1;
  std::vector<AuxiliaryHead> auxiliary_heads;
  // Called after every epoch with (epoch, mean train loss, validation MSE or
  // NaN).
  std::function<void(int, double, double)> on_epoch;
};

struct MosTrainResult {
  std::vector<double> train_loss;      // mean objective per epoch
  std::vector<double> validation_mse;  // empty without a validation set
  double initial_train_mse = 0.0;      // utterance-level, evaluation mode
  double final_train_mse = 0.0;
  int best_epoch = -1;
  int epochs_run = 0;
};

// Utterance-level MSE of the predictor on `items` (evaluation mode).
double UtteranceMse(const MosPredictor& model,
                    const std::vector<dataio::RatedUtterance>& items);

// Minimizes utterance MSE (+ frame MSE) with Adam. Input normalization is
// fitted on the training mels when the model has none yet. With a validation
// set, the best-by-validation parameters are restored at the end.
MosTrainResult TrainMos(MosPredictor& model,
                        const std::vector<dataio::RatedUtterance>& train,
                        const std::vector<dataio::RatedUtterance>& validation,
                        const MosTrainHyper& hyper);

}  // namespace percept::mosnet

#endif  // PERCEPT_MOSNET_TRAINER_H_
