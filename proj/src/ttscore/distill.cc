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

#include "ttscore/distill.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "common/error.h"
#include "dataio/augment.h"
#include "dataio/mel_cache.h"
#include "nn/ops.h"

namespace percept::ttscore {

namespace {

void CheckAlignment(const nn::Tensor& weights, int valid_frames) {
  if (weights.rank() != 2 || valid_frames < 1 ||
      weights.dim(0) < valid_frames || weights.dim(1) < 1) {
    throw ShapeError("alignment " + nn::ShapeString(weights.shape()) +
                     " does not cover " + std::to_string(valid_frames) +
                     " frames");
  }
}

}  // namespace

double DiagonalFocus(const nn::Tensor& weights, int valid_frames) {
  CheckAlignment(weights, valid_frames);
  double total = 0.0;
  for (int t = 0; t < valid_frames; ++t) {
    double best = weights.at(t, 0);
    for (int n = 1; n < weights.dim(1); ++n) best = std::max(best, weights.at(t, n));
    total += best;
  }
  return total / valid_frames;
}

int SelectFocusedHead(const std::vector<AttentionAlignment>& alignments,
                      int valid_frames) {
  if (alignments.empty()) throw UsageError("no alignments to choose from");
  int best = 0;
  double best_focus = DiagonalFocus(alignments[0].weights, valid_frames);
  for (size_t i = 1; i < alignments.size(); ++i) {
    const double f = DiagonalFocus(alignments[i].weights, valid_frames);
    if (f > best_focus) {
      best_focus = f;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<int> DurationsFromAlignment(const nn::Tensor& weights,
                                        int valid_frames) {
  CheckAlignment(weights, valid_frames);
  std::vector<int> counts(weights.dim(1), 0);
  for (int t = 0; t < valid_frames; ++t) {
    int arg = 0;
    for (int n = 1; n < weights.dim(1); ++n) {
      if (weights.at(t, n) > weights.at(t, arg)) arg = n;
    }
    ++counts[arg];
  }
  return counts;
}

bool IsDegenerateAlignment(const std::vector<int>& durations) {
  if (durations.size() < 2) return false;
  const int total = std::accumulate(durations.begin(), durations.end(), 0);
  return std::any_of(durations.begin(), durations.end(),
                     [total](int d) { return d == total; });
}

DistillationResult DistillTargets(const TransformerTts& teacher,
                                  const std::vector<TtsExample>& examples) {
  nn::NoGradGuard no_grad;
  DistillationResult result;
  for (const auto& ex : examples) {
    const TtsOutputs out = teacher.Forward(ex);
    const int valid = ex.target.valid_frames();
    const int pick = SelectFocusedHead(out.alignments, valid);
    const auto& chosen = out.alignments[pick];
    std::vector<int> durations = DurationsFromAlignment(chosen.weights, valid);
    if (IsDegenerateAlignment(durations)) {
      result.degenerate.push_back(ex.utt_id);
      continue;
    }
    DistilledUtterance u;
    u.utt_id = ex.utt_id;
    u.text = ex.text;
    u.layer = chosen.layer;
    u.head = chosen.head;
    u.focus = DiagonalFocus(chosen.weights, valid);
    const nn::Tensor mel = nn::SliceRows(out.mel_post, 0, valid);
    u.target = MakeTarget(
        dataio::MelSpectrogram::FromTensor(mel, ex.target.mel.sample_rate,
                                           ex.target.mel.hop_length),
        std::move(durations));
    ValidateTarget(u.target, ex.text.length());
    result.utterances.push_back(std::move(u));
  }
  return result;
}

DistillationResult DistillTargets(const TransformerTts& teacher,
                                  const dataio::AudioManifest& manifest,
                                  const dataio::MelConfig& mel_config) {
  const dataio::MelLoader loader = dataio::AudioMelLoader(manifest, mel_config);
  std::vector<TtsExample> examples;
  for (const auto& entry : manifest.entries) {
    TtsExample ex;
    ex.utt_id = entry.utt_id;
    ex.text = teacher.vocabulary().Encode(entry.text);
    ex.target = MakeTarget(loader(entry));
    examples.push_back(std::move(ex));
  }
  return DistillTargets(teacher, examples);
}

void WriteDistilledTargets(const std::filesystem::path& dir,
                           const std::vector<DistilledUtterance>& utterances) {
  std::filesystem::create_directories(dir);
  for (const auto& u : utterances) {
    dataio::WriteMelCache(dir / (u.utt_id + ".mel"), u.target.mel);
    std::ofstream os(dir / (u.utt_id + ".dur"));
    if (!os) throw DataError("cannot write durations for " + u.utt_id);
    os << u.utt_id;
    for (int d : *u.target.durations) os << ' ' << d;
    os << '\n';
  }
}

std::vector<std::pair<std::string, TtsTarget>> ReadDistilledTargets(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("distilled target directory " + dir.string() +
                    " does not exist");
  }
  std::vector<std::filesystem::path> sidecars;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".dur") sidecars.push_back(e.path());
  }
  std::sort(sidecars.begin(), sidecars.end());
  std::vector<std::pair<std::string, TtsTarget>> out;
  for (const auto& path : sidecars) {
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    std::istringstream fields(line);
    std::string utt_id;
    fields >> utt_id;
    if (utt_id.empty()) throw DataError(path.string() + ": missing utt_id");
    std::vector<int> durations;
    int d;
    while (fields >> d) durations.push_back(d);
    if (!fields.eof()) throw DataError(path.string() + ": bad duration");
    const dataio::MelSpectrogram mel =
        dataio::ReadMelCache(dir / (utt_id + ".mel"));
    TtsTarget target = MakeTarget(mel, durations);
    try {
      ValidateTarget(target, static_cast<int>(durations.size()));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    out.emplace_back(utt_id, std::move(target));
  }
  return out;
}

}  // namespace percept::ttscore
