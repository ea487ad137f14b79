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
#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "common/error.h"
#include "dataio/types.h"
#include "nn/ops.h"
#include "nn/optim.h"
#include "support/fixtures.h"
#include "support/gradcheck.h"
#include "ttscore/distill.h"
#include "ttscore/fastspeech.h"
#include "ttscore/losses.h"
#include "ttscore/model.h"
#include "ttscore/transformer_tts.h"

namespace percept::ttscore {
namespace {

using dataio::kMelBins;
using dataio::MelSpectrogram;
using testing::RandomMel;

TtsModelConfig TinyConfig() { return testing::TinyTtsConfig(); }

void ZeroParameters(TtsModel& model, const std::string& prefix) {
  testing::ZeroParameters(model.params(), prefix);
}

void SetParameter(TtsModel& model, const std::string& name,
                  const std::vector<double>& values) {
  ASSERT_EQ(model.params().Get(name).size(), values.size()) << name;
  testing::SetParameter(model.params(), name, values);
}

nn::Tensor RandomTensor(const nn::Shape& shape, std::mt19937_64& rng,
                        double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(nn::NumElements(shape));
  for (double& x : v) x = dist(rng);
  return nn::Tensor::FromVector(shape, v);
}

// Rows are softmax-normalised random scores.
nn::Tensor RandomAlignment(int frames, int chars, std::mt19937_64& rng) {
  nn::NoGradGuard guard;
  return nn::SoftmaxRows(RandomTensor({frames, chars}, rng, 2.0)).Detach();
}

CharVocabulary TestVocabulary() {
  return CharVocabulary::FromTexts({"abcdefgh ijklmnop"});
}

// ---- from-definition oracles ------------------------------------------------

double OracleL2(const nn::Tensor& pred, const MelSpectrogram& truth,
                int valid) {
  double s = 0.0;
  for (int t = 0; t < valid; ++t) {
    for (int b = 0; b < kMelBins; ++b) {
      const double d = pred.at(t, b) - truth.at(t, b);
      s += d * d;
    }
  }
  return s / (valid * kMelBins);
}

double OracleBce(const nn::Tensor& logits, const std::vector<double>& labels,
                 int valid, double pos_weight) {
  double s = 0.0;
  for (int t = 0; t < valid; ++t) {
    const double x = logits.at(t, 0);
    const double p = 1.0 / (1.0 + std::exp(-x));
    s += -(pos_weight * labels[t] * std::log(p) +
           (1.0 - labels[t]) * std::log(1.0 - p));
  }
  return s / valid;
}

double OracleGuided(const nn::Tensor& a, int valid, double g) {
  const int chars = a.dim(1);
  double s = 0.0;
  for (int n = 0; n < chars; ++n) {
    for (int t = 0; t < valid; ++t) {
      const double x = n / static_cast<double>(chars) - t / static_cast<double>(valid);
      s += (1.0 - std::exp(-x * x / (2.0 * g * g))) * a.at(t, n);
    }
  }
  return s / (chars * valid);
}

struct LossFixture {
  TtsOutputs outputs;
  TtsTarget target;
};

LossFixture RandomTransformerFixture(int frames, int chars, int alignments,
                                     std::mt19937_64& rng) {
  LossFixture f;
  f.target = MakeTarget(RandomMel(frames, rng));
  f.outputs.mel_pre = RandomTensor({frames, kMelBins}, rng);
  f.outputs.mel_post = RandomTensor({frames, kMelBins}, rng);
  f.outputs.stop_logits = RandomTensor({frames, 1}, rng, 3.0);
  for (int i = 0; i < alignments; ++i) {
    f.outputs.alignments.push_back(
        {i / 2, i % 2, RandomAlignment(frames, chars, rng)});
  }
  return f;
}

// ---- text and targets -------------------------------------------------------

TEST(CharVocabularyTest, EncodesKnownAndUnknownCharacters) {
  const auto vocab = CharVocabulary::FromTexts({"ba", "ab\xC3\xA9"});
  EXPECT_EQ(vocab.symbols(),
            (std::vector<std::string>{"a", "b", "\xC3\xA9"}));
  EXPECT_EQ(vocab.size(), 4);
  EXPECT_EQ(vocab.Encode("\xC3\xA9" "az").token_ids,
            (std::vector<int>{3, 1, 0}));
  EXPECT_THROW(vocab.Encode(""), DataError);
}

TEST(TtsTargetTest, ValidationCatchesBrokenInvariants) {
  std::mt19937_64 rng(1);
  TtsTarget t = MakeTarget(RandomMel(4, rng), std::vector<int>{1, 3});
  EXPECT_NO_THROW(ValidateTarget(t, 2));
  EXPECT_THROW(ValidateTarget(t, 3), DataError);
  auto bad_sum = t;
  bad_sum.durations = std::vector<int>{1, 2};
  EXPECT_THROW(ValidateTarget(bad_sum, 2), DataError);
  auto negative = t;
  negative.durations = std::vector<int>{-1, 5};
  EXPECT_THROW(ValidateTarget(negative, 2), DataError);
  auto no_stop = t;
  no_stop.stop_labels.back() = 0.0;
  EXPECT_THROW(ValidateTarget(no_stop, 2), DataError);
  auto padded = t;
  padded.frame_mask = {1, 1, 1, 0};
  padded.stop_labels = {0, 0, 1, 0};
  padded.durations = std::vector<int>{1, 2};
  EXPECT_NO_THROW(ValidateTarget(padded, 2));
}

// ---- transformer losses -----------------------------------------------------

TEST(TransformerLossTest, PerfectFitGivesZeroLoss) {
  std::mt19937_64 rng(2);
  const int n = 4;
  LossFixture f;
  f.target = MakeTarget(RandomMel(n, rng));
  f.outputs.mel_pre = f.target.mel.ToTensor();
  f.outputs.mel_post = f.target.mel.ToTensor();
  std::vector<double> logits(n, -20.0);
  logits.back() = 20.0;
  f.outputs.stop_logits = nn::Tensor::FromVector({n, 1}, logits);
  std::vector<double> diag(n * n, 0.0);
  for (int i = 0; i < n; ++i) diag[i * n + i] = 1.0;
  f.outputs.alignments.push_back({0, 0, nn::Tensor::FromVector({n, n}, diag)});
  const auto loss = TransformerConventionalLoss(f.outputs, f.target, {});
  EXPECT_EQ(loss.terms.at("l2_pre"), 0.0);
  EXPECT_EQ(loss.terms.at("l2_post"), 0.0);
  EXPECT_LT(loss.terms.at("stop_bce"), 1e-8);
  EXPECT_EQ(loss.terms.at("guided_attn"), 0.0);
}

TEST(TransformerLossTest, DoublingTheMelErrorQuadruplesL2) {
  std::mt19937_64 rng(3);
  const auto target = MakeTarget(RandomMel(7, rng));
  const nn::Tensor err = RandomTensor({7, kMelBins}, rng);
  const nn::Tensor truth = target.mel.ToTensor();
  const double one = MelL2(nn::Add(truth, err), target).item();
  const double two = MelL2(nn::Add(truth, nn::Scale(err, 2.0)), target).item();
  EXPECT_NEAR(two / one, 4.0, 1e-12);
}

TEST(TransformerLossTest, MatchesFromDefinitionRecomputation) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = RandomTransformerFixture(6 + trial, 3 + trial, 4, rng);
    TtsLossConfig config;
    config.guided_attention_weight = 0.7;
    const auto loss = TransformerConventionalLoss(f.outputs, f.target, config);
    const int v = f.target.mel.num_frames;
    const double pre = OracleL2(f.outputs.mel_pre, f.target.mel, v);
    const double post = OracleL2(f.outputs.mel_post, f.target.mel, v);
    const double bce = OracleBce(f.outputs.stop_logits, f.target.stop_labels,
                                 v, 5.0);
    double ga = 0.0;
    for (const auto& a : f.outputs.alignments) ga += OracleGuided(a.weights, v, 0.2);
    ga /= f.outputs.alignments.size();
    EXPECT_NEAR(loss.terms.at("l2_pre"), pre, 1e-6);
    EXPECT_NEAR(loss.terms.at("l2_post"), post, 1e-6);
    EXPECT_NEAR(loss.terms.at("stop_bce"), bce, 1e-6);
    EXPECT_NEAR(loss.terms.at("guided_attn"), ga, 1e-6);
    EXPECT_NEAR(loss.total.item(), pre + post + bce + 0.7 * ga, 1e-6);
  }
}

TEST(TransformerLossTest, TotalIsTheSumOfNonNegativeTerms) {
  std::mt19937_64 rng(5);
  const auto f = RandomTransformerFixture(5, 4, 2, rng);
  const auto loss = TransformerConventionalLoss(f.outputs, f.target, {});
  for (const auto& [name, value] : loss.terms) EXPECT_GE(value, 0.0) << name;
  const auto& t = loss.terms;
  EXPECT_EQ(loss.total.item(), t.at("l2_pre") + t.at("l2_post") +
                                   t.at("stop_bce") + t.at("guided_attn"));
}

TEST(TransformerLossTest, PaddedFramesDoNotChangeAnyTerm) {
  std::mt19937_64 rng(6);
  const auto f = RandomTransformerFixture(6, 4, 4, rng);
  const auto base = TransformerConventionalLoss(f.outputs, f.target, {});

  const int pad = 3;
  auto padded = f;
  auto garbage = [&](const nn::Tensor& x) {
    return nn::ConcatRows({x, RandomTensor({pad, x.dim(1)}, rng, 10.0)});
  };
  padded.outputs.mel_pre = garbage(f.outputs.mel_pre);
  padded.outputs.mel_post = garbage(f.outputs.mel_post);
  padded.outputs.stop_logits = garbage(f.outputs.stop_logits);
  for (auto& a : padded.outputs.alignments) {
    a.weights = nn::ConcatRows({a.weights, RandomAlignment(pad, 4, rng)});
  }
  const MelSpectrogram extra = RandomMel(pad, rng);
  padded.target.mel.frames.insert(padded.target.mel.frames.end(),
                                  extra.frames.begin(), extra.frames.end());
  padded.target.mel.num_frames += pad;
  padded.target.stop_labels.insert(padded.target.stop_labels.end(), pad, 1.0);
  padded.target.frame_mask.assign(6, 1.0);
  padded.target.frame_mask.insert(padded.target.frame_mask.end(), pad, 0.0);

  const auto masked = TransformerConventionalLoss(padded.outputs,
                                                  padded.target, {});
  for (const auto& [name, value] : base.terms) {
    EXPECT_NEAR(masked.terms.at(name), value, 1e-6) << name;
  }
  EXPECT_NEAR(masked.total.item(), base.total.item(), 1e-6);
}

TEST(TransformerLossTest, NonFiniteTermIsNamed) {
  std::mt19937_64 rng(7);
  auto f = RandomTransformerFixture(4, 3, 1, rng);
  nn::Tensor logits = f.outputs.stop_logits;
  logits.mutable_data()[0] = std::nan("");
  try {
    TransformerConventionalLoss(f.outputs, f.target, {});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("stop_bce"), std::string::npos);
  }
}

TEST(GuidedAttentionTest, SingleCellIsZero) {
  const auto a = nn::Tensor::FromVector({1, 1}, {1.0});
  EXPECT_EQ(GuidedAttentionLoss(a, 0.2, 1).item(), 0.0);
}

TEST(GuidedAttentionTest, ExactDiagonalIsZero) {
  for (int n : {2, 3, 7}) {
    std::vector<double> diag(n * n, 0.0);
    for (int i = 0; i < n; ++i) diag[i * n + i] = 1.0;
    EXPECT_EQ(GuidedAttentionLoss(nn::Tensor::FromVector({n, n}, diag), 0.2, n)
                  .item(),
              0.0);
  }
}

TEST(GuidedAttentionTest, UniformTwoByTwoMatchesHandEnumeration) {
  // Off-diagonal cells have |n/N - t/T| = 1/2, so W = 1 - exp(-3.125) there
  // and 0 on the diagonal; mean of W/2 over four cells.
  const auto a = nn::Tensor::FromVector({2, 2}, {0.5, 0.5, 0.5, 0.5});
  EXPECT_NEAR(GuidedAttentionLoss(a, 0.2, 2).item(), 0.2390158, 1e-6);
}

TEST(GuidedAttentionTest, TransposingASquareAlignmentKeepsTheLoss) {
  std::mt19937_64 rng(8);
  for (int n : {3, 5, 8}) {
    const nn::Tensor a = RandomAlignment(n, n, rng);
    const nn::Tensor at = nn::Transpose(a);
    EXPECT_NEAR(GuidedAttentionLoss(a, 0.2, n).item(),
                GuidedAttentionLoss(at, 0.2, n).item(), 1e-12);
    for (int t = 0; t < n; ++t) {
      for (int c = 0; c < n; ++c) {
        EXPECT_EQ(GuidedAttentionWeight(t, n, c, n, 0.2),
                  GuidedAttentionWeight(c, n, t, n, 0.2));
      }
    }
  }
}

TEST(GuidedAttentionTest, RejectsNonPositiveWidth) {
  const auto a = nn::Tensor::FromVector({1, 1}, {1.0});
  EXPECT_THROW(GuidedAttentionLoss(a, 0.0, 1), UsageError);
  EXPECT_THROW(GuidedAttentionLoss(a, -1.0, 1), UsageError);
}

// ---- FastSpeech losses ------------------------------------------------------

TEST(FastSpeechLossTest, PerfectFitReachesTheModeMinimum) {
  std::mt19937_64 rng(9);
  const std::vector<int> durations = {2, 0, 3};
  const auto target = MakeTarget(RandomMel(5, rng), durations);
  TtsOutputs out;
  out.mel_pre = target.mel.ToTensor();
  out.mel_post = target.mel.ToTensor();

  TtsLossConfig ce;
  std::vector<double> logits(3 * 51, 0.0);
  for (int i = 0; i < 3; ++i) logits[i * 51 + durations[i]] = 60.0;
  out.duration_out = nn::Tensor::FromVector({3, 51}, logits);
  auto loss = FastSpeechConventionalLoss(out, target, ce);
  EXPECT_EQ(loss.terms.at("l2_pre"), 0.0);
  EXPECT_EQ(loss.terms.at("l2_post"), 0.0);
  EXPECT_LT(loss.terms.at("duration_loss"), 1e-20);

  TtsLossConfig mse;
  mse.duration_loss = DurationLoss::kMseLog;
  std::vector<double> logd;
  for (int d : durations) logd.push_back(std::log(d + 1.0));
  out.duration_out = nn::Tensor::FromVector({3, 1}, logd);
  loss = FastSpeechConventionalLoss(out, target, mse);
  EXPECT_EQ(loss.terms.at("duration_loss"), 0.0);
  EXPECT_EQ(DecodeDurations(out.duration_out, DurationLoss::kMseLog),
            durations);
}

TEST(FastSpeechLossTest, MatchesFromDefinitionRecomputation) {
  std::mt19937_64 rng(10);
  const std::vector<int> durations = {1, 0, 4, 60, 2};
  const int frames = std::accumulate(durations.begin(), durations.end(), 0);
  const auto target = MakeTarget(RandomMel(frames, rng), durations);
  TtsOutputs out;
  out.mel_pre = RandomTensor({frames, kMelBins}, rng);
  out.mel_post = RandomTensor({frames, kMelBins}, rng);
  out.duration_out = RandomTensor({5, 51}, rng, 2.0);
  const auto loss = FastSpeechConventionalLoss(out, target, {});

  double ce = 0.0;
  for (int i = 0; i < 5; ++i) {
    double z = 0.0;
    for (int c = 0; c < 51; ++c) z += std::exp(out.duration_out.at(i, c));
    const int bucket = std::min(durations[i], 50);
    ce += std::log(z) - out.duration_out.at(i, bucket);
  }
  ce /= 5;
  const double pre = OracleL2(out.mel_pre, target.mel, frames);
  const double post = OracleL2(out.mel_post, target.mel, frames);
  EXPECT_NEAR(loss.terms.at("duration_loss"), ce, 1e-6);
  EXPECT_NEAR(loss.total.item(), pre + post + ce, 1e-6);

  TtsLossConfig mse;
  mse.duration_loss = DurationLoss::kMseLog;
  out.duration_out = RandomTensor({5, 1}, rng);
  double m = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double d = out.duration_out.at(i, 0) - std::log(durations[i] + 1.0);
    m += d * d;
  }
  EXPECT_NEAR(FastSpeechConventionalLoss(out, target, mse).terms.at(
                  "duration_loss"),
              m / 5, 1e-6);
}

TEST(FastSpeechLossTest, BatchOrderDoesNotMatter) {
  std::mt19937_64 rng(11);
  std::vector<ConventionalLoss> losses;
  for (int i = 0; i < 6; ++i) {
    const std::vector<int> d = {1 + i % 3, 2, i % 2};
    const int frames = std::accumulate(d.begin(), d.end(), 0);
    const auto target = MakeTarget(RandomMel(frames, rng), d);
    TtsOutputs out;
    out.mel_pre = RandomTensor({frames, kMelBins}, rng);
    out.mel_post = RandomTensor({frames, kMelBins}, rng);
    out.duration_out = RandomTensor({3, 51}, rng);
    losses.push_back(FastSpeechConventionalLoss(out, target, {}));
  }
  const double forward = MeanOverBatch(losses).total.item();
  std::reverse(losses.begin(), losses.end());
  std::swap(losses[1], losses[4]);
  EXPECT_NEAR(MeanOverBatch(losses).total.item(), forward, 1e-12);
}

TEST(FastSpeechLossTest, MissingDurationsIsAnError) {
  std::mt19937_64 rng(12);
  const auto target = MakeTarget(RandomMel(3, rng));
  TtsOutputs out;
  out.mel_pre = target.mel.ToTensor();
  out.mel_post = target.mel.ToTensor();
  out.duration_out = nn::Tensor::Zeros({2, 51});
  EXPECT_THROW(FastSpeechConventionalLoss(out, target, {}), DataError);
}

// ---- models -----------------------------------------------------------------

TtsExample MakeExample(const CharVocabulary& vocab, const std::string& text,
                       int frames, std::mt19937_64& rng) {
  TtsExample ex;
  ex.utt_id = "utt";
  ex.text = vocab.Encode(text);
  ex.target = MakeTarget(RandomMel(frames, rng));
  return ex;
}

TEST(TransformerTtsTest, TeacherForcedOutputsFollowTheTargetShape) {
  std::mt19937_64 rng(13);
  const auto vocab = TestVocabulary();
  TransformerTts model(TtsModelConfig{}, vocab, 1);
  for (int frames : {1, 5, 17}) {
    const auto ex = MakeExample(vocab, "abc de", frames, rng);
    const auto out = model.Forward(ex);
    EXPECT_EQ(out.mel_pre.shape(), (nn::Shape{frames, kMelBins}));
    EXPECT_EQ(out.mel_post.shape(), (nn::Shape{frames, kMelBins}));
    EXPECT_EQ(out.stop_logits.shape(), (nn::Shape{frames, 1}));
    ASSERT_EQ(out.alignments.size(), 6u);
    for (const auto& a : out.alignments) {
      ASSERT_EQ(a.weights.shape(), (nn::Shape{frames, 6}));
      for (int t = 0; t < frames; ++t) {
        double s = 0.0;
        for (int n = 0; n < 6; ++n) {
          EXPECT_GE(a.weights.at(t, n), 0.0);
          s += a.weights.at(t, n);
        }
        EXPECT_NEAR(s, 1.0, 1e-5);
      }
    }
    for (double v : out.mel_post.data()) ASSERT_TRUE(std::isfinite(v));
    for (double v : out.stop_logits.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(TransformerTtsTest, ZeroPostNetLeavesTheMelUnchanged) {
  std::mt19937_64 rng(14);
  const auto vocab = TestVocabulary();
  TransformerTts model(TtsModelConfig{}, vocab, 2);
  std::vector<MelSpectrogram> mels = {RandomMel(30, rng)};
  model.set_normalizer(FitMelNormalizer(mels));
  ZeroParameters(model, "postnet.");
  const auto out = model.Forward(MakeExample(vocab, "hello", 9, rng));
  const auto pre = out.mel_pre.data();
  const auto post = out.mel_post.data();
  EXPECT_TRUE(std::equal(pre.begin(), pre.end(), post.begin()));
}

TEST(TransformerTtsTest, DecoderStepIgnoresLaterTargetFrames) {
  std::mt19937_64 rng(15);
  const auto vocab = TestVocabulary();
  TransformerTts model(TtsModelConfig{}, vocab, 3);
  auto ex = MakeExample(vocab, "abc", 8, rng);
  const auto before = model.Forward(ex);
  for (int b = 0; b < kMelBins; ++b) ex.target.mel.frames[5 * kMelBins + b] += 3;
  const auto after = model.Forward(ex);
  for (int t = 0; t <= 5; ++t) {
    for (int b = 0; b < kMelBins; ++b) {
      EXPECT_EQ(before.mel_pre.at(t, b), after.mel_pre.at(t, b));
    }
  }
  EXPECT_NE(before.mel_pre.at(6, 0), after.mel_pre.at(6, 0));
}

TEST(TransformerTtsTest, EmptyTextIsAnError) {
  std::mt19937_64 rng(16);
  const auto vocab = TestVocabulary();
  TransformerTts model(TtsModelConfig{}, vocab, 3);
  TtsExample ex;
  ex.target = MakeTarget(RandomMel(3, rng));
  EXPECT_THROW(model.Forward(ex), DataError);
  ex.text.token_ids = {vocab.size()};
  EXPECT_THROW(model.Forward(ex), DataError);
}

TEST(TransformerTtsTest, SynthesisStopsOnTheFirstConfidentFrame) {
  const auto vocab = TestVocabulary();
  TransformerTts model(TtsModelConfig{}, vocab, 4);
  ZeroParameters(model, "decoder.stop_proj");
  SetParameter(model, "decoder.stop_proj.bias", {std::log(0.9 / 0.1)});
  const auto result = model.Synthesize(vocab.Encode("abcd"), {});
  EXPECT_EQ(result.mel.num_frames, 1);
  EXPECT_FALSE(result.truncated);
}

TEST(TransformerTtsTest, SynthesisHitsTheFrameCapWithATruncationFlag) {
  const auto vocab = TestVocabulary();
  TtsModelConfig config = TinyConfig();
  TransformerTts model(config, vocab, 5);
  ZeroParameters(model, "decoder.stop_proj");
  SetParameter(model, "decoder.stop_proj.bias", {-30.0});
  const auto result = model.Synthesize(vocab.Encode("abc"), {});
  EXPECT_EQ(result.mel.num_frames, 60);
  EXPECT_TRUE(result.truncated);
}

TEST(TransformerTtsTest, SynthesisIsDeterministic) {
  const auto vocab = TestVocabulary();
  TransformerTts a(TinyConfig(), vocab, 6);
  TransformerTts b(TinyConfig(), vocab, 6);
  SynthesisOptions options;
  options.max_frames_per_token = 4;
  const auto x = a.Synthesize(vocab.Encode("hi there"), options);
  const auto y = b.Synthesize(vocab.Encode("hi there"), options);
  EXPECT_EQ(x.mel.frames, y.mel.frames);
  EXPECT_EQ(x.truncated, y.truncated);
}

TEST(FastSpeechTest, OutputLengthFollowsTheDurations) {
  std::mt19937_64 rng(17);
  const auto vocab = TestVocabulary();
  FastSpeech model(TtsModelConfig{}, vocab, 7);
  const auto text = vocab.Encode("abcde");
  const auto unit = model.Run(text, {1, 1, 1, 1, 1}, nullptr);
  EXPECT_EQ(unit.mel_post.dim(0), 5);
  const auto twice = model.Run(text, {2, 2, 2, 2, 2}, nullptr);
  EXPECT_EQ(twice.mel_post.dim(0), 10);
  const auto mixed = model.Run(text, {0, 3, 1, 0, 4}, nullptr);
  EXPECT_EQ(mixed.mel_pre.dim(0), 8);
  EXPECT_EQ(mixed.duration_out.shape(), (nn::Shape{5, 51}));
  for (double v : mixed.mel_post.data()) ASSERT_TRUE(std::isfinite(v));
  EXPECT_THROW(model.Run(text, {0, 0, 0, 0, 0}, nullptr), DataError);
  EXPECT_THROW(model.Run(text, {1, 1}, nullptr), DataError);
}

TEST(FastSpeechTest, LengthRegulatorRepeatsRows) {
  EXPECT_EQ(LengthRegulatorIndex({2, 0, 1}), (std::vector<int>{0, 0, 2}));
  EXPECT_THROW(LengthRegulatorIndex({0, 0}), DataError);
  EXPECT_THROW(LengthRegulatorIndex({2, -1}), DataError);
}

TEST(FastSpeechTest, SynthesisExpandsByPredictedDurations) {
  const auto vocab = TestVocabulary();
  for (int d : {1, 3, 7}) {
    FastSpeech model(TinyConfig(), vocab, 8);
    ZeroParameters(model, "duration.out");
    std::vector<double> bias(51, 0.0);
    bias[d] = 5.0;
    SetParameter(model, "duration.out.bias", bias);
    const auto result = model.Synthesize(vocab.Encode("abcd"), {});
    EXPECT_EQ(result.mel.num_frames, 4 * d);
    EXPECT_EQ(result.durations, std::vector<int>(4, d));
    EXPECT_FALSE(result.truncated);
  }
}

TEST(FastSpeechTest, ZeroPredictedDurationsIsANumericFailure) {
  const auto vocab = TestVocabulary();
  FastSpeech model(TinyConfig(), vocab, 9);
  ZeroParameters(model, "duration.out");
  std::vector<double> bias(51, 0.0);
  bias[0] = 5.0;
  SetParameter(model, "duration.out.bias", bias);
  EXPECT_THROW(model.Synthesize(vocab.Encode("ab"), {}), NumericError);
}

TEST(FastSpeechTest, SynthesisTruncatesPastTheCap) {
  const auto vocab = TestVocabulary();
  FastSpeech model(TinyConfig(), vocab, 10);
  ZeroParameters(model, "duration.out");
  std::vector<double> bias(51, 0.0);
  bias[30] = 5.0;
  SetParameter(model, "duration.out.bias", bias);
  const auto result = model.Synthesize(vocab.Encode("ab"), {});
  EXPECT_EQ(result.mel.num_frames, 40);
  EXPECT_TRUE(result.truncated);
}

// ---- gradients --------------------------------------------------------------

using TermFn = std::function<nn::Tensor(const TtsOutputs&, const TtsTarget&)>;

double TermGradientError(TtsModel& model, const TtsExample& ex,
                         const TermFn& term, uint64_t seed) {
  std::mt19937_64 rng(seed);
  model.params().ZeroGrad();
  term(model.Forward(ex), ex.target).Backward();
  std::vector<double> analytic, numeric;
  auto f = [&] {
    nn::NoGradGuard guard;
    return term(model.Forward(ex), ex.target).item();
  };
  for (const auto& [name, tensor] : model.params().items()) {
    const auto entries = testing::SampleEntries(tensor.size(), 3, rng);
    const auto a = testing::Gather(tensor.grad(), entries);
    analytic.insert(analytic.end(), a.begin(), a.end());
    const auto n = testing::NumericGradient(tensor, entries, f, 1e-6);
    numeric.insert(numeric.end(), n.begin(), n.end());
  }
  return testing::RelativeError(analytic, numeric);
}

TEST(TtsGradientTest, TransformerTermsMatchFiniteDifferences) {
  std::mt19937_64 rng(18);
  const auto vocab = CharVocabulary::FromTexts({"ab"});
  TransformerTts model(TinyConfig(), vocab, 11);
  model.set_normalizer(FitMelNormalizer({RandomMel(8, rng)}));
  testing::JitterBiases(model.params(), rng);
  TtsExample ex = MakeExample(vocab, "ab", 4, rng);
  const std::vector<std::pair<std::string, TermFn>> terms = {
      {"l2_pre", [](const TtsOutputs& o, const TtsTarget& t) {
         return MelL2(o.mel_pre, t);
       }},
      {"l2_post", [](const TtsOutputs& o, const TtsTarget& t) {
         return MelL2(o.mel_post, t);
       }},
      {"stop_bce", [](const TtsOutputs& o, const TtsTarget& t) {
         return StopBce(o.stop_logits, t, 5.0);
       }},
      {"guided_attn", [](const TtsOutputs& o, const TtsTarget& t) {
         return MeanGuidedAttentionLoss(o.alignments, 0.2, t.valid_frames());
       }}};
  for (const auto& [name, fn] : terms) {
    EXPECT_LT(TermGradientError(model, ex, fn, 1), 1e-3) << name;
  }
}

TEST(TtsGradientTest, FastSpeechTermsMatchFiniteDifferences) {
  std::mt19937_64 rng(19);
  const auto vocab = CharVocabulary::FromTexts({"ab"});
  for (DurationLoss mode : {DurationLoss::kCrossEntropyBucketed,
                            DurationLoss::kMseLog}) {
    TtsModelConfig config = TinyConfig();
    config.loss.duration_loss = mode;
    config.loss.max_duration = 6;
    FastSpeech model(config, vocab, 12);
    model.set_normalizer(FitMelNormalizer({RandomMel(8, rng)}));
    testing::JitterBiases(model.params(), rng);
    TtsExample ex = MakeExample(vocab, "ab", 4, rng);
    ex.target.durations = std::vector<int>{1, 3};
    const TtsLossConfig loss = config.loss;
    const std::vector<std::pair<std::string, TermFn>> terms = {
        {"l2_pre", [](const TtsOutputs& o, const TtsTarget& t) {
           return MelL2(o.mel_pre, t);
         }},
        {"l2_post", [](const TtsOutputs& o, const TtsTarget& t) {
           return MelL2(o.mel_post, t);
         }},
        {"duration_loss", [loss](const TtsOutputs& o, const TtsTarget& t) {
           return DurationLossTerm(o.duration_out, *t.durations,
                                   loss.duration_loss, loss.max_duration);
         }}};
    for (const auto& [name, fn] : terms) {
      EXPECT_LT(TermGradientError(model, ex, fn, 2), 1e-3)
          << name << " " << DurationLossName(mode);
    }
  }
}

// ---- checkpoints ------------------------------------------------------------

TEST(TtsCheckpointTest, RoundTripPreservesOutputs) {
  std::mt19937_64 rng(20);
  const auto vocab = TestVocabulary();
  const auto dir = std::filesystem::temp_directory_path() / "ttscore_ckpt_test";
  for (ModelFamily family :
       {ModelFamily::kTransformer, ModelFamily::kFastSpeech}) {
    std::filesystem::remove_all(dir);
    auto model = CreateTtsModel(family, TinyConfig(), vocab, 13);
    model->set_normalizer(FitMelNormalizer({RandomMel(10, rng)}));
    SaveTtsModel(*model, dir, {{"epoch", 4}});
    const auto loaded = LoadTtsModel(dir);
    EXPECT_EQ(loaded->family(), family);
    EXPECT_EQ(loaded->params().Checksum(), model->params().Checksum());
    EXPECT_EQ(loaded->normalizer().mean, model->normalizer().mean);
    EXPECT_EQ(loaded->vocabulary().symbols(), vocab.symbols());
    auto ex = MakeExample(vocab, "abc", 6, rng);
    ex.target.durations = std::vector<int>{2, 2, 2};
    const auto x = model->Forward(ex);
    const auto y = loaded->Forward(ex);
    EXPECT_EQ(std::vector<double>(x.mel_post.data().begin(),
                                  x.mel_post.data().end()),
              std::vector<double>(y.mel_post.data().begin(),
                                  y.mel_post.data().end()));
  }
  std::filesystem::remove_all(dir);
  EXPECT_THROW(LoadTtsModel(dir), DataError);
}

// ---- distillation -----------------------------------------------------------

std::vector<int> BruteForceCounts(const std::vector<std::vector<double>>& a) {
  // a[t][n]; a character wins a frame when no other character has a larger
  // weight and no earlier character has an equal one.
  std::vector<int> counts(a[0].size(), 0);
  for (const auto& row : a) {
    for (size_t n = 0; n < row.size(); ++n) {
      bool wins = true;
      for (size_t m = 0; m < row.size(); ++m) {
        if (row[m] > row[n] || (m < n && row[m] == row[n])) wins = false;
      }
      if (wins) ++counts[n];
    }
  }
  return counts;
}

TEST(DistillTest, HandBuiltAlignmentMatchesColumnCounting) {
  // Three characters over five decoder steps, with a tie on step 2.
  const std::vector<std::vector<double>> a = {{0.8, 0.1, 0.1},
                                              {0.6, 0.3, 0.1},
                                              {0.4, 0.4, 0.2},
                                              {0.1, 0.7, 0.2},
                                              {0.1, 0.2, 0.7}};
  std::vector<double> flat;
  for (const auto& r : a) flat.insert(flat.end(), r.begin(), r.end());
  const auto d =
      DurationsFromAlignment(nn::Tensor::FromVector({5, 3}, flat), 5);
  EXPECT_EQ(d, BruteForceCounts(a));
  EXPECT_EQ(d, (std::vector<int>{3, 1, 1}));
}

TEST(DistillTest, RandomAlignmentsConserveFrames) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 30; ++trial) {
    const int frames = size(rng), chars = size(rng);
    const nn::Tensor a = RandomAlignment(frames, chars, rng);
    std::vector<std::vector<double>> rows(frames);
    for (int t = 0; t < frames; ++t) {
      for (int n = 0; n < chars; ++n) rows[t].push_back(a.at(t, n));
    }
    const auto d = DurationsFromAlignment(a, frames);
    EXPECT_EQ(std::accumulate(d.begin(), d.end(), 0), frames);
    EXPECT_EQ(d, BruteForceCounts(rows));
  }
}

TEST(DistillTest, DegenerateOnlyWithSeveralCharacters) {
  EXPECT_TRUE(IsDegenerateAlignment({0, 5, 0}));
  EXPECT_FALSE(IsDegenerateAlignment({1, 4, 0}));
  EXPECT_FALSE(IsDegenerateAlignment({5}));
}

TEST(DistillTest, PicksTheMostFocusedHead) {
  std::vector<AttentionAlignment> al;
  al.push_back({0, 0, nn::Tensor::FromVector({2, 2}, {0.5, 0.5, 0.5, 0.5})});
  al.push_back({0, 1, nn::Tensor::FromVector({2, 2}, {0.9, 0.1, 0.2, 0.8})});
  al.push_back({1, 0, nn::Tensor::FromVector({2, 2}, {0.9, 0.1, 0.2, 0.8})});
  EXPECT_EQ(SelectFocusedHead(al, 2), 1);
  EXPECT_NEAR(DiagonalFocus(al[1].weights, 2), 0.85, 1e-15);
}

TEST(DistillTest, TeacherTargetsRoundTripThroughSidecars) {
  std::mt19937_64 rng(22);
  const auto vocab = TestVocabulary();
  TransformerTts teacher(TinyConfig(), vocab, 14);
  std::vector<TtsExample> examples;
  for (int i = 0; i < 5; ++i) {
    auto ex = MakeExample(vocab, std::string("abcdefg").substr(0, 2 + i),
                          6 + 2 * i, rng);
    ex.utt_id = "utt" + std::to_string(i);
    examples.push_back(ex);
  }
  const auto result = DistillTargets(teacher, examples);
  EXPECT_EQ(result.utterances.size() + result.degenerate.size(), 5u);
  for (const auto& u : result.utterances) {
    const auto& d = *u.target.durations;
    EXPECT_EQ(static_cast<int>(d.size()), u.text.length());
    EXPECT_EQ(std::accumulate(d.begin(), d.end(), 0), u.target.mel.num_frames);
    EXPECT_TRUE(std::all_of(d.begin(), d.end(), [](int v) { return v >= 0; }));
  }
  for (const auto& id : result.degenerate) {
    EXPECT_TRUE(std::none_of(
        result.utterances.begin(), result.utterances.end(),
        [&](const DistilledUtterance& u) { return u.utt_id == id; }));
  }
  // The stored mel is the teacher's post-net output.
  ASSERT_FALSE(result.utterances.empty());
  const auto& first = result.utterances[0];
  const auto& source = *std::find_if(
      examples.begin(), examples.end(),
      [&](const TtsExample& e) { return e.utt_id == first.utt_id; });
  const auto teacher_out = teacher.Forward(source);
  EXPECT_EQ(first.target.mel.frames,
            std::vector<double>(teacher_out.mel_post.data().begin(),
                                teacher_out.mel_post.data().end()));

  const auto dir = std::filesystem::temp_directory_path() / "distill_test";
  std::filesystem::remove_all(dir);
  WriteDistilledTargets(dir, result.utterances);
  const auto loaded = ReadDistilledTargets(dir);
  ASSERT_EQ(loaded.size(), result.utterances.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].first, result.utterances[i].utt_id);
    EXPECT_EQ(loaded[i].second.durations, result.utterances[i].target.durations);
    EXPECT_EQ(loaded[i].second.mel.num_frames,
              result.utterances[i].target.mel.num_frames);
  }
  std::filesystem::remove_all(dir);
}

TEST(DistillTest, DegenerateAlignmentsAreExcludedAndReported) {
  std::mt19937_64 rng(23);
  const auto vocab = TestVocabulary();
  TransformerTts teacher(TinyConfig(), vocab, 15);
  // Zeroed cross-attention gives uniform rows; argmax ties then send every
  // frame to the first character.
  for (const auto& [name, tensor] : teacher.params().items()) {
    if (name.find("cross_attn.q") != std::string::npos) {
      nn::Tensor t = tensor;
      for (double& v : t.mutable_data()) v = 0.0;
    }
  }
  auto ex = MakeExample(vocab, "abc", 7, rng);
  ex.utt_id = "flat";
  const auto result = DistillTargets(teacher, {ex});
  EXPECT_TRUE(result.utterances.empty());
  EXPECT_EQ(result.degenerate, std::vector<std::string>{"flat"});
}

TEST(DistillTest, StudentFitsTeacherOutputsBetterThanGroundTruth) {
  std::mt19937_64 rng(24);
  const auto vocab = TestVocabulary();
  TtsModelConfig config = TinyConfig();
  TransformerTts teacher(config, vocab, 16);
  std::vector<TtsExample> examples;
  std::vector<MelSpectrogram> mels;
  for (int i = 0; i < 4; ++i) {
    auto ex = MakeExample(vocab, std::string("abcdef").substr(i, 3), 9, rng);
    ex.utt_id = "u" + std::to_string(i);
    examples.push_back(ex);
    mels.push_back(ex.target.mel);
  }
  teacher.set_normalizer(FitMelNormalizer(mels));
  // Force a clean diagonal so no utterance is degenerate.
  auto distilled = DistillTargets(teacher, examples);
  for (auto& u : distilled.utterances) {
    u.target.durations = std::vector<int>{3, 3, 3};
  }
  ASSERT_FALSE(distilled.utterances.empty());

  FastSpeech student(config, vocab, 17);
  student.set_normalizer(teacher.normalizer());
  nn::Adam adam(student.params().tensors(), 3e-3);
  for (int step = 0; step < 150; ++step) {
    adam.ZeroGrad();
    for (const auto& u : distilled.utterances) {
      TtsExample ex{u.utt_id, u.text, u.target};
      const auto out = student.Forward(ex);
      nn::Add(MelL2(out.mel_pre, u.target), MelL2(out.mel_post, u.target))
          .Backward();
    }
    adam.Step();
  }
  double vs_teacher = 0.0, vs_truth = 0.0;
  for (const auto& u : distilled.utterances) {
    const auto& source = *std::find_if(
        examples.begin(), examples.end(),
        [&](const TtsExample& e) { return e.utt_id == u.utt_id; });
    TtsExample ex{u.utt_id, u.text, u.target};
    const auto out = student.Forward(ex);
    vs_teacher += MelL2(out.mel_post, u.target).item();
    TtsTarget truth = source.target;
    truth.durations = u.target.durations;
    vs_truth += MelL2(out.mel_post, truth).item();
  }
  EXPECT_LT(vs_teacher, vs_truth);
}

}  // namespace
}  // namespace percept::ttscore
