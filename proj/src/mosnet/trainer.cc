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

#include "mosnet/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "common/error.h"
#include "nn/ops.h"
#include "nn/optim.h"

namespace percept::mosnet {

using nn::Tensor;

double UtteranceMse(const MosPredictor& model,
                    const std::vector<dataio::RatedUtterance>& items) {
  if (items.empty()) throw UsageError("MSE over an empty set");
  double total = 0.0;
  for (const auto& item : items) {
    const double d = model.Score(item.mel) - item.mos;
    total += d * d;
  }
  return total / static_cast<double>(items.size());
}

MosTrainResult TrainMos(MosPredictor& model,
                        const std::vector<dataio::RatedUtterance>& train,
                        const std::vector<dataio::RatedUtterance>& validation,
                        const MosTrainHyper& hyper) {
  if (train.empty()) throw DataError("MOS training set is empty");
  if (model.frozen()) throw UsageError("cannot train a frozen MOS predictor");
  for (const auto& item : train) {
    if (!(item.mos >= 1.0 && item.mos <= 5.0)) {
      throw DataError(item.utt_id + ": MOS label outside [1, 5]");
    }
    item.mel.Validate();
  }
  if (hyper.batch_size < 1 || hyper.epochs < 0) {
    throw UsageError("batch_size must be >= 1 and epochs >= 0");
  }

  if (!model.has_input_normalization()) {
    double sum = 0.0, sq = 0.0;
    size_t n = 0;
    for (const auto& item : train) {
      for (double v : item.mel.frames) {
        sum += v;
        sq += v * v;
        ++n;
      }
    }
    const double mean = sum / n;
    const double var = std::max(sq / n - mean * mean, 0.0);
    model.SetInputNormalization(mean, var > 1e-12 ? std::sqrt(var) : 1.0);
  }

  std::vector<Tensor> trainable = model.params().tensors();
  for (const auto& head : hyper.auxiliary_heads) {
    trainable.insert(trainable.end(), head.parameters.begin(),
                     head.parameters.end());
  }
  nn::Adam optimizer(trainable, hyper.learning_rate);
  std::mt19937_64 rng(hyper.seed);

  MosTrainResult result;
  result.initial_train_mse = UtteranceMse(model, train);
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params;
  int since_best = 0;

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const size_t end = std::min(order.size(), start + hyper.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      optimizer.ZeroGrad();
      double batch_loss = 0.0;
      for (size_t k = start; k < end; ++k) {
        const auto& item = train[order[k]];
        const auto out = model.Forward(item.mel.ToTensor(), &rng);
        Tensor loss = Square(AddScalar(out.utterance_score, -item.mos));
        if (hyper.frame_loss_weight > 0.0) {
          loss = Add(loss, Scale(Mean(Square(AddScalar(out.frame_scores, -item.mos))),
                                 hyper.frame_loss_weight));
        }
        for (const auto& head : hyper.auxiliary_heads) {
          loss = Add(loss, Scale(head.loss(out.frame_features, item), head.weight));
        }
        if (!std::isfinite(loss.item())) {
          throw NumericError("non-finite MOS training loss at epoch " +
                             std::to_string(epoch) + " on " + item.utt_id);
        }
        batch_loss += loss.item();
        Scale(loss, inv_batch).Backward();
      }
      if (hyper.grad_clip > 0.0) optimizer.ClipGradNorm(hyper.grad_clip);
      optimizer.Step();
      epoch_loss += batch_loss;
    }
    epoch_loss /= static_cast<double>(train.size());
    result.train_loss.push_back(epoch_loss);
    result.epochs_run = epoch + 1;

    double val_mse = std::numeric_limits<double>::quiet_NaN();
    if (!validation.empty()) {
      val_mse = UtteranceMse(model, validation);
      result.validation_mse.push_back(val_mse);
      if (val_mse < best_val) {
        best_val = val_mse;
        result.best_epoch = epoch;
        since_best = 0;
        best_params.clear();
        for (const auto& [name, t] : model.params().items()) {
          best_params.emplace_back(t.data().begin(), t.data().end());
        }
      } else if (++since_best >= hyper.patience) {
        if (hyper.on_epoch) hyper.on_epoch(epoch, epoch_loss, val_mse);
        break;
      }
    } else {
      result.best_epoch = epoch;
    }
    if (hyper.on_epoch) hyper.on_epoch(epoch, epoch_loss, val_mse);
  }
  optimizer.ZeroGrad();

  if (!best_params.empty()) {
    auto items = model.params().items();
    for (size_t i = 0; i < items.size(); ++i) {
      auto dst = items[i].second.mutable_data();
      std::copy(best_params[i].begin(), best_params[i].end(), dst.begin());
    }
  }
  result.final_train_mse = UtteranceMse(model, train);
  return result;
}

}  // namespace percept::mosnet
