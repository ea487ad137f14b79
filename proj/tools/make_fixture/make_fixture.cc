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

// Writes the small bundled corpus used by the smoke pipeline: harmonic-tone
// "speech" for TTS training, a degraded and rated corpus for the MOS
// predictor, and rating/phone tables for evaluation. Output is a pure
// function of the seed.
//
// Usage: make_fixture <out_dir> [seed]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dataio/manifest.h"
#include "dataio/types.h"
#include "dataio/wav.h"

namespace {

namespace fs = std::filesystem;
using percept::dataio::AudioManifest;
using percept::dataio::ManifestEntry;
using percept::dataio::RatingRecord;
using percept::dataio::TestKind;

constexpr int kSampleRate = 22050;
constexpr int kHop = 256;
constexpr char kLetters[] = "abcdefgh";

std::string RandomText(std::mt19937_64& rng, int min_chars, int max_chars) {
  std::uniform_int_distribution<int> total(min_chars, max_chars);
  std::uniform_int_distribution<int> word(2, 4);
  std::uniform_int_distribution<int> letter(0, 7);
  const int n = total(rng);
  std::string text;
  while (static_cast<int>(text.size()) < n) {
    if (!text.empty()) text += ' ';
    for (int i = word(rng); i > 0 && static_cast<int>(text.size()) < n; --i) {
      text += kLetters[letter(rng)];
    }
  }
  while (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

// Each letter is a short harmonic tone with its own pitch and length; a space
// is a pause.
std::vector<double> Render(const std::string& text) {
  std::vector<double> out(1024, 0.0);
  double phase = 0.0;
  for (char c : text) {
    if (c == ' ') {
      out.insert(out.end(), 3 * kHop, 0.0);
      continue;
    }
    const int idx = c - 'a';
    const double f0 = 140.0 + 30.0 * idx;
    const int len = (3 + idx % 3) * kHop;
    for (int n = 0; n < len; ++n) {
      const double env = std::sin(std::numbers::pi * (n + 0.5) / len);
      double v = 0.0;
      for (int k = 1; k <= 4; ++k) v += std::sin(k * phase) / k;
      out.push_back(0.3 * env * v);
      phase += 2.0 * std::numbers::pi * f0 / kSampleRate;
    }
  }
  out.insert(out.end(), 1024, 0.0);
  return out;
}

// Degradation level 0 (clean) to 5: white noise, clipping and dropouts.
std::vector<double> Degrade(std::vector<double> x, int level,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 0.02 * level);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double clip = 0.3 - 0.045 * level;
  for (size_t i = 0; i < x.size(); ++i) {
    double v = std::clamp(x[i], -clip, clip) + noise(rng);
    if (level >= 3 && (i / kHop) % 7 == 0 && u(rng) < 0.1 * level) v = 0.0;
    x[i] = v;
  }
  return x;
}

double HalfStep(double v) {
  return std::clamp(std::round(v * 2.0) / 2.0, 1.0, 5.0);
}

AudioManifest WriteCorpus(const fs::path& dir, const std::string& prefix,
                          int count, std::mt19937_64& rng,
                          std::vector<int>* levels) {
  fs::create_directories(dir / "wav");
  AudioManifest manifest;
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s%03d", prefix.c_str(), i + 1);
    ManifestEntry e;
    e.utt_id = id;
    e.audio_path = "wav/" + e.utt_id + ".wav";
    e.text = RandomText(rng, 6, 10);
    std::vector<double> audio = Render(e.text);
    if (levels != nullptr) {
      const int level = i % 6;
      levels->push_back(level);
      audio = Degrade(std::move(audio), level, rng);
    }
    percept::dataio::WriteWav(dir / e.audio_path, audio, kSampleRate);
    manifest.entries.push_back(std::move(e));
  }
  percept::dataio::SaveManifest(manifest, dir / "manifest.tsv");
  return manifest;
}

std::vector<double> HistogramScores(const std::array<int, 5>& counts) {
  std::vector<double> s;
  for (int k = 0; k < 5; ++k) s.insert(s.end(), counts[k], k + 1.0);
  return s;
}

void WriteEvalFixtures(const fs::path& dir, std::mt19937_64& rng) {
  fs::create_directories(dir);
  std::vector<RatingRecord> ratings;
  // Intelligibility: one rating per sentence, 500 per system.
  const std::array<int, 5> base_hist = {60, 87, 106, 150, 97};
  const std::array<int, 5> perc_hist = {2, 3, 37, 200, 258};
  for (const auto& [system, hist] :
       {std::pair{"baseline", base_hist}, std::pair{"perceptual", perc_hist}}) {
    std::vector<double> scores = HistogramScores(hist);
    std::shuffle(scores.begin(), scores.end(), rng);
    for (size_t i = 0; i < scores.size(); ++i) {
      ratings.push_back({system, "s" + std::to_string(i + 1), "r1",
                         TestKind::kIntelligibility, scores[i]});
    }
  }
  // Naturalness: 50 sentences, 4 raters each, paired across systems.
  std::normal_distribution<double> rater(0.0, 0.6);
  std::normal_distribution<double> sentence(0.0, 0.4);
  for (int i = 0; i < 50; ++i) {
    const double shift = sentence(rng);
    for (int r = 0; r < 4; ++r) {
      const std::string utt = "n" + std::to_string(i + 1);
      const std::string id = "r" + std::to_string(r + 1);
      ratings.push_back({"baseline", utt, id, TestKind::kNaturalness,
                         HalfStep(2.7 + shift + rater(rng))});
      ratings.push_back({"perceptual", utt, id, TestKind::kNaturalness,
                         HalfStep(3.75 + shift + rater(rng))});
    }
  }
  percept::dataio::SaveRatings(ratings, dir / "ratings.csv");

  // Phone strings: ten long and ten short sentences; hypotheses corrupt
  // phones at different rates.
  const std::vector<std::string> phones = {"a", "e", "i", "o", "u", "k",
                                           "t", "p", "s", "n", "m", "r"};
  std::uniform_int_distribution<int> pick(0, phones.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::ofstream ref(dir / "ref_phones.tsv"), cls(dir / "classes.tsv");
  std::ofstream hyp_b(dir / "baseline_phones.tsv");
  std::ofstream hyp_p(dir / "perceptual_phones.tsv");
  for (int i = 0; i < 20; ++i) {
    const bool is_long = i < 10;
    const int len = is_long ? 40 + pick(rng) : 8 + pick(rng) / 2;
    std::vector<std::string> seq(len);
    for (auto& p : seq) p = phones[pick(rng)];
    const std::string id = "p" + std::to_string(i + 1);
    cls << id << '\t' << (is_long ? "long" : "short") << '\n';
    auto emit = [&](std::ofstream& os, double rate) {
      os << id << '\t';
      bool first = true;
      for (const auto& p : seq) {
        const double r = u(rng);
        if (r < rate / 3) continue;  // deletion
        os << (first ? "" : " ") << (r < 2 * rate / 3 ? phones[pick(rng)] : p);
        first = false;
        if (r > 1.0 - rate / 3) os << ' ' << phones[pick(rng)];  // insertion
      }
      os << '\n';
    };
    ref << id << '\t';
    for (int k = 0; k < len; ++k) ref << (k ? " " : "") << seq[k];
    ref << '\n';
    emit(hyp_b, is_long ? 0.4 : 0.3);
    emit(hyp_p, is_long ? 0.3 : 0.25);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::cerr << "usage: make_fixture <out_dir> [seed]\n";
    return 1;
  }
  const fs::path out = argv[1];
  const uint64_t seed = argc == 3 ? std::stoull(argv[2]) : 2026;
  std::mt19937_64 rng(seed);

  WriteCorpus(out / "tts", "tts", 20, rng, nullptr);

  std::vector<int> levels;
  const AudioManifest mos = WriteCorpus(out / "mos", "mos", 24, rng, &levels);
  std::normal_distribution<double> rater(0.0, 0.4);
  std::vector<RatingRecord> ratings;
  for (size_t i = 0; i < mos.entries.size(); ++i) {
    const double truth = 4.6 - 0.7 * levels[i];
    for (int r = 0; r < 3; ++r) {
      ratings.push_back({"mos_corpus", mos.entries[i].utt_id,
                         "r" + std::to_string(r + 1), TestKind::kNaturalness,
                         HalfStep(truth + rater(rng))});
    }
  }
  percept::dataio::SaveRatings(ratings, out / "mos" / "ratings.csv");

  WriteEvalFixtures(out / "eval", rng);
  std::cout << "fixture written to " << out.string() << '\n';
  return 0;
}
