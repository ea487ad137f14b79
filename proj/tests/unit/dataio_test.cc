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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "common/error.h"
#include "dataio/augment.h"
#include "dataio/manifest.h"
#include "dataio/mel.h"
#include "dataio/mel_cache.h"
#include "dataio/wav.h"

namespace percept::dataio {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("percept_dataio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

MelSpectrogram ConstantMel(int frames, double value) {
  MelSpectrogram mel;
  mel.num_frames = frames;
  mel.frames.assign(static_cast<size_t>(frames) * kMelBins, value);
  return mel;
}

std::vector<RatedUtterance> MosSet(int n) {
  std::vector<RatedUtterance> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({"mos_" + std::to_string(i), ConstantMel(1, i * 0.01),
                   1.0 + (i % 9) * 0.5, Origin::kMosCorpus});
  }
  return out;
}

AudioManifest TtsManifest(int n) {
  AudioManifest m;
  for (int i = 0; i < n; ++i) {
    m.entries.push_back({"tts_" + std::to_string(i), "a.wav", "text", {}});
  }
  return m;
}

MelSpectrogram FakeLoader(const ManifestEntry&) { return ConstantMel(2, 0.5); }

// ---- mel extraction -------------------------------------------------------

TEST(ExtractMelTest, SilenceGivesLogFloor) {
  MelConfig config;
  std::vector<double> silence(config.sample_rate, 0.0);
  const auto mel = ExtractMel(silence, config.sample_rate, config);
  ASSERT_GT(mel.num_frames, 0);
  for (double v : mel.frames) EXPECT_EQ(v, std::log(config.log_floor));
}

TEST(ExtractMelTest, SingleWindowGivesOneFrame) {
  MelConfig config;
  std::vector<double> wave(config.win_length, 0.1);
  const auto mel = ExtractMel(wave, config.sample_rate, config);
  EXPECT_EQ(mel.num_frames, 1);
  EXPECT_EQ(mel.frames.size(), static_cast<size_t>(kMelBins));
}

TEST(ExtractMelTest, FrameCountFormula) {
  MelConfig config;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(config.win_length, 30000);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = len(rng);
    std::vector<double> wave(n, 0.0);
    const auto mel = ExtractMel(wave, config.sample_rate, config);
    EXPECT_EQ(mel.num_frames, 1 + (n - config.win_length) / config.hop_length);
  }
}

TEST(ExtractMelTest, ShorterThanWindowIsError) {
  MelConfig config;
  std::vector<double> wave(config.win_length - 1, 0.0);
  EXPECT_THROW(ExtractMel(wave, config.sample_rate, config), DataError);
  EXPECT_THROW(ExtractMel({}, config.sample_rate, config), DataError);
}

TEST(ExtractMelTest, SampleRateMismatchIsError) {
  MelConfig config;
  std::vector<double> wave(4096, 0.0);
  EXPECT_THROW(ExtractMel(wave, 16000, config), DataError);
}

TEST(ExtractMelTest, SineLandsInNearestCenterBin) {
  MelConfig config;
  // Independent filter centres from the HTK mel formula.
  auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double lo = to_mel(config.fmin), hi = to_mel(config.fmax);
  int nearest = 0;
  double best = 1e300;
  for (int m = 0; m < kMelBins; ++m) {
    const double centre = to_hz(lo + (hi - lo) * (m + 1) / (kMelBins + 1));
    if (std::abs(centre - 1000.0) < best) {
      best = std::abs(centre - 1000.0);
      nearest = m;
    }
  }
  std::vector<double> wave(config.sample_rate);
  for (size_t i = 0; i < wave.size(); ++i) {
    wave[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * i /
                             config.sample_rate);
  }
  const auto mel = ExtractMel(wave, config.sample_rate, config);
  std::vector<double> mean(kMelBins, 0.0);
  for (int t = 0; t < mel.num_frames; ++t) {
    for (int b = 0; b < kMelBins; ++b) mean[b] += mel.at(t, b) / mel.num_frames;
  }
  const int argmax = static_cast<int>(
      std::max_element(mean.begin(), mean.end()) - mean.begin());
  EXPECT_EQ(argmax, nearest);
}

TEST(ExtractMelTest, RepeatedCallsAreBitIdentical) {
  MelConfig config;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> wave(5000);
  for (double& s : wave) s = noise(rng);
  const auto a = ExtractMel(wave, config.sample_rate, config);
  const auto b = ExtractMel(wave, config.sample_rate, config);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  EXPECT_EQ(0, std::memcmp(a.frames.data(), b.frames.data(),
                           a.frames.size() * sizeof(double)));
}

TEST(ExtractMelTest, CenteredFramingAddsPadding) {
  MelConfig config;
  config.center = true;
  std::vector<double> wave(2048, 0.01);
  const auto mel = ExtractMel(wave, config.sample_rate, config);
  EXPECT_EQ(mel.num_frames, 1 + 2048 / config.hop_length);
}

// ---- WAV and mel cache ----------------------------------------------------

TEST(WavTest, RoundTripWithin16BitPrecision) {
  const auto dir = TempDir("wav");
  std::vector<double> wave(1000);
  for (size_t i = 0; i < wave.size(); ++i) wave[i] = std::sin(0.01 * i) * 0.9;
  WriteWav(dir / "x.wav", wave, 22050);
  const auto back = ReadWav(dir / "x.wav");
  EXPECT_EQ(back.sample_rate, 22050);
  ASSERT_EQ(back.samples.size(), wave.size());
  for (size_t i = 0; i < wave.size(); ++i) {
    EXPECT_NEAR(back.samples[i], wave[i], 1.0 / 32768.0 + 1e-9);
  }
  EXPECT_THROW(ReadWav(dir / "missing.wav"), DataError);
}

TEST(MelCacheTest, HeaderLayoutAndRoundTrip) {
  const auto dir = TempDir("cache");
  MelSpectrogram mel = ConstantMel(3, 0.0);
  for (size_t i = 0; i < mel.frames.size(); ++i) mel.frames[i] = 0.25 * i;
  WriteMelCache(dir / "m.mel", mel);
  EXPECT_EQ(fs::file_size(dir / "m.mel"), 16u + 3u * 80u * 4u);

  std::ifstream is(dir / "m.mel", std::ios::binary);
  uint32_t header[4];
  is.read(reinterpret_cast<char*>(header), 16);
  EXPECT_EQ(header[0], 3u);
  EXPECT_EQ(header[1], 80u);
  float rate;
  std::memcpy(&rate, &header[2], 4);
  EXPECT_EQ(rate, 22050.0f);
  EXPECT_EQ(header[3], 256u);

  const auto back = ReadMelCache(dir / "m.mel");
  EXPECT_EQ(back.num_frames, 3);
  EXPECT_EQ(back.frames, mel.frames);  // multiples of 0.25 are exact in f32
}

// ---- manifest and ratings -------------------------------------------------

TEST(ManifestTest, EmptyFileGivesEmptyManifest) {
  EXPECT_TRUE(ParseManifest("", "m").entries.empty());
  EXPECT_TRUE(ParseManifest("# only a comment\n\n", "m").entries.empty());
}

TEST(ManifestTest, ParsesOptionalPhones) {
  const auto m = ParseManifest(
      "u1\ta.wav\thello\th e l o\nu2\tb.wav\tworld\n", "m");
  ASSERT_EQ(m.entries.size(), 2u);
  ASSERT_TRUE(m.entries[0].phones.has_value());
  EXPECT_EQ(m.entries[0].phones->size(), 4u);
  EXPECT_FALSE(m.entries[1].phones.has_value());
}

TEST(ManifestTest, ErrorsCarryLineNumbers) {
  try {
    ParseManifest("u1\ta.wav\thi\n# c\nu1\tb.wav\tthere\n", "m.tsv");
    FAIL() << "duplicate accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("m.tsv:3"), std::string::npos);
  }
  EXPECT_THROW(ParseManifest("u1\ta.wav\n", "m"), DataError);
  EXPECT_THROW(ParseManifest("u1\ta.wav\t\n", "m"), DataError);
  EXPECT_THROW(ParseManifest("u1\ta.wav\thi\t  \n", "m"), DataError);
}

TEST(RatingsTest, RejectsOutOfRangeNaturalness) {
  const std::string header = "system_id,utt_id,rater_id,test,score\n";
  try {
    ParseRatings(header + "s,u,r,naturalness,5.5\n", "r.csv");
    FAIL() << "5.5 accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("r.csv:2"), std::string::npos);
  }
  EXPECT_THROW(ParseRatings(header + "s,u,r,naturalness,3.25\n", "r"),
               DataError);
  EXPECT_THROW(ParseRatings(header + "s,u,r,intelligibility,2.5\n", "r"),
               DataError);
  EXPECT_THROW(ParseRatings(header + "s,u,r,other,3\n", "r"), DataError);
  EXPECT_THROW(ParseRatings("bad header\n", "r"), DataError);
  EXPECT_EQ(ParseRatings(header + "s,u,r,naturalness,4.5\n", "r")[0].score,
            4.5);
}

TEST(RatingsTest, FiveHundredRowsForOneSystem) {
  std::ostringstream csv;
  csv << "system_id,utt_id,rater_id,test,score\n";
  for (int rater = 0; rater < 20; ++rater) {
    for (int utt = 0; utt < 25; ++utt) {
      csv << "sys,u" << utt << ",r" << rater << ",naturalness,"
          << 1.0 + 0.5 * ((rater + utt) % 9) << "\n";
    }
  }
  const auto records = ParseRatings(csv.str(), "r");
  EXPECT_EQ(records.size(), 500u);
  EXPECT_EQ(MeanScoreByUtterance(records, TestKind::kNaturalness).size(), 25u);
}

// ---- augmentation ---------------------------------------------------------

TEST(AugmentTest, EmptyManifestIsIdentity) {
  const auto mos = MosSet(100);
  const auto out = AugmentMosDataset(mos, AudioManifest{}, FakeLoader);
  ASSERT_EQ(out.size(), 100u);
  for (size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].utt_id, mos[i].utt_id);
}

TEST(AugmentTest, AppendsTtsItemsWithMosFive) {
  const auto mos = MosSet(100);
  const auto before = mos[0].mos;
  const auto out = AugmentMosDataset(mos, TtsManifest(50), FakeLoader);
  ASSERT_EQ(out.size(), 150u);
  int tts = 0;
  for (const auto& item : out) {
    if (item.origin == Origin::kTtsCorpus) {
      ++tts;
      EXPECT_EQ(item.mos, 5.0);
      ValidateRatedUtterance(item);
    }
  }
  EXPECT_EQ(tts, 50);
  EXPECT_EQ(out[0].utt_id, "mos_0");
  EXPECT_EQ(out[100].utt_id, "tts_0");
  EXPECT_EQ(mos[0].mos, before);
}

TEST(AugmentTest, DisabledReturnsMosSet) {
  const auto mos = MosSet(10);
  AugmentOptions options;
  options.enabled = false;
  EXPECT_EQ(AugmentMosDataset(mos, TtsManifest(5), FakeLoader, options).size(),
            10u);
}

TEST(AugmentTest, AssumedMosIsConfigurable) {
  AugmentOptions options;
  options.assumed_tts_mos = 4.5;
  const auto out = AugmentMosDataset({}, TtsManifest(2), FakeLoader, options);
  EXPECT_EQ(out[0].mos, 4.5);
}

TEST(AugmentTest, UnreadableAudioNamesEntry) {
  AudioManifest manifest = TtsManifest(1);
  manifest.base_dir = TempDir("augment");
  try {
    AugmentMosDataset({}, manifest, MelConfig{});
    FAIL() << "missing audio accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("tts_0"), std::string::npos);
  }
}

TEST(AugmentTest, RejectsNonMosCorpusInput) {
  auto mos = MosSet(1);
  mos[0].origin = Origin::kTtsCorpus;
  EXPECT_THROW(AugmentMosDataset(mos, TtsManifest(1), FakeLoader), UsageError);
}

TEST(AugmentTest, DoubleAugmentationDeduplicatesToSameSet) {
  const auto mos = MosSet(30);
  const auto manifest = TtsManifest(12);
  const auto once = AugmentMosDataset(mos, manifest, FakeLoader);
  std::vector<RatedUtterance> mos_part(once.begin(), once.begin() + 30);
  auto twice = AugmentMosDataset(mos_part, manifest, FakeLoader);
  twice.insert(twice.end(), once.begin() + 30, once.end());
  const auto dedup = DeduplicateByKey(twice);
  ASSERT_EQ(dedup.size(), once.size());
  for (size_t i = 0; i < dedup.size(); ++i) {
    EXPECT_EQ(dedup[i].utt_id, once[i].utt_id);
    EXPECT_EQ(dedup[i].origin, once[i].origin);
  }
}

TEST(AugmentTest, DeduplicationKeyIncludesOrigin) {
  auto mos = MosSet(1);
  mos[0].utt_id = "shared";
  AudioManifest manifest;
  manifest.entries.push_back({"shared", "a.wav", "t", {}});
  const auto out = DeduplicateByKey(AugmentMosDataset(mos, manifest, FakeLoader));
  EXPECT_EQ(out.size(), 2u);
}

TEST(RatedUtteranceTest, InvariantsEnforced) {
  RatedUtterance item{"x", ConstantMel(1, 0.0), 4.0, Origin::kTtsCorpus};
  EXPECT_THROW(ValidateRatedUtterance(item), DataError);
  item.origin = Origin::kMosCorpus;
  EXPECT_NO_THROW(ValidateRatedUtterance(item));
  item.mos = 5.5;
  EXPECT_THROW(ValidateRatedUtterance(item), DataError);
}

}  // namespace
}  // namespace percept::dataio
