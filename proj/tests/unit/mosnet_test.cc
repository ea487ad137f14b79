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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"

#include "common/error.h"
#include "mosnet/metrics.h"
#include "mosnet/mosnet.h"
#include "mosnet/trainer.h"
#include "nn/ops.h"
#include "support/gradcheck.h"
#include "support/oracles.h"

namespace percept::mosnet {
namespace {

using dataio::MelSpectrogram;
using dataio::RatedUtterance;

MelSpectrogram RandomMel(int frames, std::mt19937_64& rng, double offset = 0.0) {
  std::normal_distribution<double> dist(offset, 1.0);
  MelSpectrogram mel;
  mel.num_frames = frames;
  mel.frames.resize(static_cast<size_t>(frames) * dataio::kMelBins);
  for (double& v : mel.frames) v = dist(rng);
  return mel;
}

MosPredictorConfig SmallConfig() {
  MosPredictorConfig c;
  c.conv_channels = {4, 4, 4, 4, 4, 4, 8, 8, 8, 8, 8, 8};
  c.blstm_units = 4;
  c.fc_sizes = {8, 1};
  c.dropout = 0.0;
  return c;
}

TEST(MosPredictorTest, FrameScoresCoverEveryFrameAndPoolByMean) {
  std::mt19937_64 rng(1);
  MosPredictor model(MosPredictorConfig{}, 7);
  const auto mel = RandomMel(9, rng);
  const auto out = model.Forward(mel.ToTensor());
  ASSERT_EQ(out.frame_scores.dim(0), 9);
  double sum = 0.0;
  for (double v : out.frame_scores.data()) sum += v;
  EXPECT_DOUBLE_EQ(out.utterance_score.item(), sum / 9.0);
}

TEST(MosPredictorTest, SingleFrameScoreEqualsUtteranceScore) {
  std::mt19937_64 rng(2);
  MosPredictor model(MosPredictorConfig{}, 7);
  const auto out = model.Forward(RandomMel(1, rng).ToTensor());
  EXPECT_EQ(out.utterance_score.item(), out.frame_scores.data()[0]);
}

TEST(MosPredictorTest, BatchScoringMatchesIndividualScoring) {
  std::mt19937_64 rng(3);
  MosPredictor model(MosPredictorConfig{}, 7);
  const auto a = RandomMel(4, rng);
  const auto b = RandomMel(11, rng);
  const auto batch = model.ForwardBatch(MelBatch::FromMels({a, b}));
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[0].utterance_score.item(), model.Score(a));
  EXPECT_EQ(batch[1].utterance_score.item(), model.Score(b));
}

TEST(MosPredictorTest, WrongBinCountIsShapeError) {
  MosPredictor model(SmallConfig(), 7);
  EXPECT_THROW(model.Forward(nn::Tensor::Zeros({3, 79})), ShapeError);
}

TEST(MosPredictorTest, ConfigValidation) {
  MosPredictorConfig c;
  c.input_bins = 257;
  EXPECT_THROW(c.Validate(), UsageError);
  c = MosPredictorConfig{};
  c.n_conv_layers = 11;
  EXPECT_THROW(c.Validate(), UsageError);
  c = MosPredictorConfig{};
  c.blstm_units = 0;
  EXPECT_THROW(c.Validate(), UsageError);
  EXPECT_EQ(MosPredictorConfig{}.ConvOutputBins(), 1);
}

double ScoreGradientError(const MosPredictorConfig& config, uint64_t seed,
                          double step) {
  std::mt19937_64 rng(seed);
  MosPredictor model(config, seed);
  model.SetInputNormalization(0.0, 1.0);
  auto mel = RandomMel(5, rng).ToTensor().set_requires_grad(true);
  model.Forward(mel).utterance_score.Backward();
  const auto entries = testing::SampleEntries(mel.size(), 40, rng);
  const auto numeric = testing::NumericGradient(mel, entries, [&] {
    nn::NoGradGuard guard;
    return model.Forward(mel).utterance_score.item();
  }, step);
  return testing::RelativeError(testing::Gather(mel.grad(), entries), numeric);
}

TEST(MosPredictorTest, ScoreGradientMatchesFiniteDifferences) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LT(ScoreGradientError(SmallConfig(), seed, 1e-4), 1e-3);
  }
  // The full-width stack has enough ReLU units that a 1e-4 probe straddles
  // kinks; a smaller probe isolates the smooth region.
  EXPECT_LT(ScoreGradientError(MosPredictorConfig{}, 4, 1e-5), 1e-3);
}

TEST(MosPredictorTest, FrozenPredictorPassesGradientOnlyToInput) {
  std::mt19937_64 rng(5);
  MosPredictor model(SmallConfig(), 3);
  model.Freeze();
  const auto before = model.params().Checksum();
  auto mel = RandomMel(4, rng).ToTensor().set_requires_grad(true);
  for (int i = 0; i < 5; ++i) model.Forward(mel).utterance_score.Backward();
  EXPECT_FALSE(mel.grad().empty());
  for (const auto& [name, t] : model.params().items()) {
    EXPECT_TRUE(t.grad().empty()) << name;
  }
  EXPECT_EQ(before, model.params().Checksum());
  std::vector<RatedUtterance> data = {{"a", RandomMel(3, rng), 3.0}};
  EXPECT_THROW(TrainMos(model, data, {}, {}), UsageError);
}

TEST(MosTrainerTest, OverfitsSingleItemToLabel) {
  std::mt19937_64 rng(6);
  MosPredictorConfig config;
  config.dropout = 0.0;
  MosPredictor model(config, 5);
  std::vector<RatedUtterance> data = {{"a", RandomMel(8, rng), 4.2}};
  MosTrainHyper hyper;
  hyper.epochs = 150;
  hyper.learning_rate = 1e-3;
  const auto result = TrainMos(model, data, {}, hyper);
  const double score = model.Score(data[0].mel);
  EXPECT_GE(score, 4.1);
  EXPECT_LE(score, 4.3);
  EXPECT_LT(result.final_train_mse, result.initial_train_mse);
}

TEST(MosTrainerTest, SingleItemLabelFiveConvergesTowardFive) {
  std::mt19937_64 rng(7);
  MosPredictor model(SmallConfig(), 5);
  std::vector<RatedUtterance> data = {{"a", RandomMel(6, rng), 5.0}};
  const double initial = std::abs(model.Score(data[0].mel) - 5.0);
  MosTrainHyper hyper;
  hyper.epochs = 60;
  hyper.learning_rate = 1e-2;
  TrainMos(model, data, {}, hyper);
  EXPECT_LT(std::abs(model.Score(data[0].mel) - 5.0), 0.1 * initial);
}

TEST(MosTrainerTest, EarlyStoppingRestoresBestValidationModel) {
  std::mt19937_64 rng(8);
  MosPredictor model(SmallConfig(), 5);
  std::vector<RatedUtterance> train, val;
  std::uniform_real_distribution<double> label(1.0, 5.0);
  for (int i = 0; i < 6; ++i) train.push_back({"t", RandomMel(4, rng), label(rng)});
  for (int i = 0; i < 4; ++i) val.push_back({"v", RandomMel(4, rng), label(rng)});
  MosTrainHyper hyper;
  hyper.epochs = 200;
  hyper.patience = 3;
  hyper.learning_rate = 1e-2;
  const auto result = TrainMos(model, train, val, hyper);
  ASSERT_FALSE(result.validation_mse.empty());
  const double best = *std::min_element(result.validation_mse.begin(),
                                        result.validation_mse.end());
  EXPECT_NEAR(UtteranceMse(model, val), best, 1e-12);
  EXPECT_LE(result.epochs_run, 200);
}

TEST(MosTrainerTest, ErrorPaths) {
  MosPredictor model(SmallConfig(), 5);
  EXPECT_THROW(TrainMos(model, {}, {}, {}), DataError);
  std::mt19937_64 rng(9);
  std::vector<RatedUtterance> bad = {{"x", RandomMel(3, rng), 6.0}};
  EXPECT_THROW(TrainMos(model, bad, {}, {}), DataError);

  model.SetInputNormalization(0.0, 1e-300);
  std::vector<RatedUtterance> huge = {{"h", RandomMel(3, rng, 1e10), 3.0}};
  EXPECT_THROW(TrainMos(model, huge, {}, {}), NumericError);
}

TEST(MosTrainerTest, AuxiliaryHeadIsOptimized) {
  std::mt19937_64 rng(10);
  MosPredictor model(SmallConfig(), 5);
  AuxiliaryHead head;
  head.name = "aux";
  head.parameters = {nn::Tensor::Scalar(3.0).set_requires_grad(true)};
  nn::Tensor target = head.parameters[0];
  int calls = 0;
  head.loss = [&](const nn::Tensor& features, const RatedUtterance&) {
    ++calls;
    EXPECT_EQ(features.dim(1), 8);
    return nn::Square(target);
  };
  MosTrainHyper hyper;
  hyper.epochs = 20;
  hyper.learning_rate = 0.1;
  hyper.auxiliary_heads = {head};
  std::vector<RatedUtterance> data = {{"a", RandomMel(3, rng), 3.0}};
  TrainMos(model, data, {}, hyper);
  EXPECT_EQ(calls, 20);
  EXPECT_LT(std::abs(target.item()), 3.0);
}

TEST(MosCheckpointTest, RoundTripPreservesScores) {
  std::mt19937_64 rng(11);
  MosPredictor model(SmallConfig(), 5);
  model.SetInputNormalization(-3.0, 2.0);
  const auto dir = std::filesystem::temp_directory_path() / "percept_mos_ckpt";
  std::filesystem::remove_all(dir);
  SaveMosPredictor(model, dir, {{"epoch", 4}});
  const auto loaded = LoadMosPredictor(dir);
  const auto mel = RandomMel(5, rng);
  EXPECT_EQ(model.Score(mel), loaded.Score(mel));
  EXPECT_EQ(loaded.input_mean(), -3.0);
  EXPECT_EQ(nn::ReadCheckpointMeta(dir, kMosCheckpointMagic)["epoch"], 4);
  EXPECT_THROW(nn::ReadCheckpointMeta(dir, "TTSCORE1"), DataError);
}

// ---- metrics --------------------------------------------------------------

// Independent from-definition oracles.
TEST(MetricsTest, PerfectPredictor) {
  const std::vector<double> y = {1.0, 2.5, 3.0, 4.5, 5.0};
  const auto m = ComputeMetrics(y, y);
  EXPECT_DOUBLE_EQ(*m.lcc, 1.0);
  EXPECT_DOUBLE_EQ(*m.srcc, 1.0);
  EXPECT_EQ(m.mse, 0.0);
}

TEST(MetricsTest, ReversedRankingGivesMinusOne) {
  const std::vector<double> y = {1.0, 2.0, 3.5, 4.0, 4.5};
  const std::vector<double> p = {9.0, 7.0, 3.0, 2.0, -1.0};
  EXPECT_DOUBLE_EQ(*ComputeMetrics(p, y).srcc, -1.0);
}

TEST(MetricsTest, ZeroVarianceIsUndefined) {
  const std::vector<double> y = {3.0, 3.0, 3.0};
  const std::vector<double> p = {1.0, 2.0, 3.0};
  const auto m = ComputeMetrics(p, y);
  EXPECT_FALSE(m.lcc.has_value());
  EXPECT_FALSE(m.srcc.has_value());
  EXPECT_THROW(ComputeMetrics(std::vector<double>{1.0}, std::vector<double>{2.0}),
               UsageError);
}

TEST(MetricsTest, MatchesFromDefinitionOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  std::uniform_int_distribution<int> half(2, 10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(50), y(50);
    for (size_t i = 0; i < 50; ++i) {
      p[i] = u(rng);
      y[i] = 0.5 * half(rng);  // ties on the label side
    }
    const auto m = ComputeMetrics(p, y);
    EXPECT_NEAR(*m.lcc, testing::OraclePearson(p, y), 1e-9);
    EXPECT_NEAR(*m.srcc, testing::OraclePearson(testing::OracleRanks(p), testing::OracleRanks(y)), 1e-9);
    double mse = 0;
    for (size_t i = 0; i < 50; ++i) mse += (p[i] - y[i]) * (p[i] - y[i]) / 50.0;
    EXPECT_NEAR(m.mse, mse, 1e-9);
  }
}

TEST(MetricsTest, SpearmanInvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> p(30), y(30), tp(30), ty(30);
  for (size_t i = 0; i < 30; ++i) {
    p[i] = n(rng);
    y[i] = p[i] + n(rng);
    tp[i] = std::exp(p[i]);
    ty[i] = y[i] * y[i] * y[i] + 2.0;
  }
  EXPECT_NEAR(*SpearmanCorrelation(p, y), *SpearmanCorrelation(tp, ty), 1e-12);
}

}  // namespace
}  // namespace percept::mosnet
