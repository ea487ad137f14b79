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

#ifndef PERCEPT_PERCEPTUAL_TRAINER_H_
#define PERCEPT_PERCEPTUAL_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mosnet/mosnet.h"
#include "perceptual/objective.h"
#include "ttscore/model.h"

namespace percept::perceptual {

struct EpochLog {
  int epoch = 0;
  std::optional<double> lambda;
  double l_con = 0.0;
  std::optional<double> l_per;
  double total = 0.0;
  std::optional<double> val_total;

  // One JSON object; "lambda" and "l_per" are omitted when absent.
  std::string ToJsonLine(bool with_timestamp) const;
};

struct TtsTrainHyper {
  int epochs = 100;
  int batch_size = 4;
  double learning_rate = 1e-3;
  double grad_clip = 1.0;
  uint64_t seed = 0;
  // Fit the model's mel normaliser on the training set before the first
  // epoch.
  bool fit_normalizer = true;
  // When set: train_log.jsonl, one checkpoint per epoch under checkpoints/
  // and a "best" file naming the best-by-validation checkpoint.
  std::filesystem::path output_dir;
  int keep_checkpoints = 2;  // most recent epochs kept besides the best
  bool timestamps = true;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TtsTrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;
};

// Step-3 training. Epoch e uses LambdaAt(schedule, e) when the perceptual
// term is on. `predictor` may be null only when it is off.
TtsTrainResult TrainTts(ttscore::TtsModel& model,
                        const std::vector<ttscore::TtsExample>& train,
                        const std::vector<ttscore::TtsExample>& validation,
                        const mosnet::MosPredictor* predictor,
                        const PerceptualConfig& config,
                        const TtsTrainHyper& hyper);

// Accepts either a checkpoint directory or a training output directory with a
// "best" pointer.
std::filesystem::path ResolveTtsCheckpoint(const std::filesystem::path& path);

}  // namespace percept::perceptual

#endif  // PERCEPT_PERCEPTUAL_TRAINER_H_
