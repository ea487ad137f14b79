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

#include "perceptual/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>

#include "common/error.h"
#include "json.hpp"
#include "nn/optim.h"

namespace percept::perceptual {

namespace {

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string CheckpointName(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%04d", epoch);
  return buf;
}

void WriteBestPointer(const std::filesystem::path& dir, int epoch) {
  const auto tmp = dir / "best.tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw DataError("cannot write " + tmp.string());
    os << "checkpoints/" << CheckpointName(epoch) << "\n";
  }
  std::filesystem::rename(tmp, dir / "best");
}

}  // namespace

std::string EpochLog::ToJsonLine(bool with_timestamp) const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  if (lambda) j["lambda"] = *lambda;
  j["l_con"] = l_con;
  if (l_per) j["l_per"] = *l_per;
  j["total"] = total;
  if (val_total) {
    j["val_total"] = *val_total;
  } else {
    j["val_total"] = nullptr;
  }
  if (with_timestamp) j["time"] = Timestamp();
  return j.dump();
}

TtsTrainResult TrainTts(ttscore::TtsModel& model,
                        const std::vector<ttscore::TtsExample>& train,
                        const std::vector<ttscore::TtsExample>& validation,
                        const mosnet::MosPredictor* predictor,
                        const PerceptualConfig& config,
                        const TtsTrainHyper& hyper) {
  if (train.empty()) throw DataError("empty TTS training set");
  if (hyper.epochs < 1 || hyper.batch_size < 1) {
    throw UsageError("epochs and batch_size must be positive");
  }
  for (const auto& ex : train) {
    ttscore::ValidateTarget(ex.target, ex.text.length());
  }
  const PerceptualObjective objective(predictor, config);
  const uint64_t predictor_checksum =
      predictor != nullptr ? predictor->params().Checksum() : 0;

  if (hyper.fit_normalizer) {
    std::vector<dataio::MelSpectrogram> mels;
    for (const auto& ex : train) mels.push_back(ex.target.mel);
    model.set_normalizer(ttscore::FitMelNormalizer(mels));
  }

  std::ofstream log_file;
  const bool persist = !hyper.output_dir.empty();
  if (persist) {
    std::filesystem::create_directories(hyper.output_dir / "checkpoints");
    log_file.open(hyper.output_dir / "train_log.jsonl");
    if (!log_file) {
      throw DataError("cannot write " +
                      (hyper.output_dir / "train_log.jsonl").string());
    }
  }

  std::mt19937_64 rng(hyper.seed);
  nn::Adam adam(model.params().tensors(), hyper.learning_rate);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TtsTrainResult result;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> kept;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const double lambda =
        config.enabled ? LambdaAt(config.schedule, epoch) : 0.0;
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog entry;
    entry.epoch = epoch;
    double l_per_sum = 0.0;
    bool have_l_per = false;
    for (size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const size_t end = std::min(order.size(), start + hyper.batch_size);
      std::vector<ttscore::TtsExample> batch;
      for (size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const LossBreakdown b =
          objective.ComputeGradients(model, batch, lambda, &rng);
      if (hyper.grad_clip > 0.0) adam.ClipGradNorm(hyper.grad_clip);
      adam.Step();
      const double w = static_cast<double>(batch.size());
      entry.l_con += b.l_con * w;
      entry.total += b.total * w;
      if (b.l_per) {
        l_per_sum += *b.l_per * w;
        have_l_per = true;
      }
    }
    const double n = static_cast<double>(train.size());
    entry.l_con /= n;
    entry.total /= n;
    if (have_l_per) entry.l_per = l_per_sum / n;
    if (config.enabled) entry.lambda = lambda;

    if (!validation.empty()) {
      nn::NoGradGuard no_grad;
      double sum = 0.0;
      for (const auto& ex : validation) {
        sum += objective.Evaluate(model, {ex}, lambda).breakdown.total;
      }
      entry.val_total = sum / static_cast<double>(validation.size());
      if (!std::isfinite(*entry.val_total)) {
        throw NumericError("non-finite validation loss at epoch " +
                           std::to_string(epoch));
      }
    }

    const double score = entry.val_total.value_or(entry.total);
    const bool improved = score < best;
    if (improved) {
      best = score;
      result.best_epoch = epoch;
    }
    if (persist) {
      log_file << entry.ToJsonLine(hyper.timestamps) << "\n";
      log_file.flush();
      const auto ckpt_dir = hyper.output_dir / "checkpoints";
      ttscore::SaveTtsModel(model, ckpt_dir / CheckpointName(epoch),
                            {{"epoch", epoch},
                             {"perceptual", config},
                             {"perceptual_enabled", config.enabled},
                             {"train_total", entry.total}});
      if (improved) WriteBestPointer(hyper.output_dir, epoch);
      kept.push_back(epoch);
      std::vector<int> still_kept;
      const int keep = std::max(hyper.keep_checkpoints, 1);
      for (size_t i = 0; i < kept.size(); ++i) {
        const bool recent = kept.size() - i <= static_cast<size_t>(keep);
        if (recent || kept[i] == result.best_epoch) {
          still_kept.push_back(kept[i]);
        } else {
          std::filesystem::remove_all(ckpt_dir / CheckpointName(kept[i]));
        }
      }
      kept = std::move(still_kept);
    }
    result.log.push_back(entry);
    if (hyper.on_epoch) hyper.on_epoch(entry);
  }
  if (predictor != nullptr && predictor->params().Checksum() != predictor_checksum) {
    throw NumericError("MOS predictor parameters changed during training");
  }
  return result;
}

std::filesystem::path ResolveTtsCheckpoint(const std::filesystem::path& path) {
  if (std::filesystem::exists(path / "meta.json")) return path;
  const auto pointer = path / "best";
  if (std::filesystem::exists(pointer)) {
    std::ifstream is(pointer);
    std::string rel;
    std::getline(is, rel);
    if (!rel.empty()) return path / rel;
  }
  throw DataError("no TTS checkpoint at " + path.string());
}

}  // namespace percept::perceptual
