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

#ifndef PERCEPT_TOOLS_COMMANDS_H_
#define PERCEPT_TOOLS_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "config.h"

namespace percept::cli {

// State shared by one command invocation. All randomness comes from `rng`.
struct Context {
  RunConfig config;
  std::filesystem::path root;
  bool timestamps = true;
  std::mt19937_64 rng;
  std::ostream* out = nullptr;
};

Context MakeContext(const RunConfig& config, bool timestamps,
                    std::ostream& out);

// Extracts and caches mels for the configured corpora under
// <root>/mels/{tts,mos}/ and checks the ratings table. Per-entry failures are
// listed in <root>/prepare_report.txt and raise DataError afterwards.
void CmdPrepare(Context& ctx);

// Trains the MOS predictor; labels are per-utterance mean naturalness
// ratings. Writes <root>/mos/{checkpoint/, metrics.json, train_items.tsv,
// train_log.jsonl}.
void CmdTrainMos(Context& ctx, bool no_augment);

struct TrainTtsOptions {
  std::optional<bool> perceptual;  // overrides perceptual.enabled
  std::filesystem::path teacher;
  std::filesystem::path distilled_dir;
  std::filesystem::path predictor;
  std::string name;  // run directory under <root>/tts/
};
// Returns the run directory.
std::filesystem::path CmdTrainTts(Context& ctx, const TrainTtsOptions& opts);

// Writes "<utt>.mel" and "<utt>.dur" per utterance plus degenerate.txt.
void CmdDistill(Context& ctx, const std::filesystem::path& teacher,
                const std::filesystem::path& out_dir);

struct SynthOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;  // defaults to the TTS manifest
  std::filesystem::path out_dir;   // defaults to <root>/synth/<system>
  std::string system;
  std::filesystem::path predictor;
};
void CmdSynth(Context& ctx, const SynthOptions& opts);

struct EvalOptions {
  std::vector<std::filesystem::path> ratings;
  std::filesystem::path per_ref;
  std::filesystem::path per_class;
  std::vector<std::string> per_hyp;  // "system=path"
  std::filesystem::path report;      // defaults to <root>/eval/report.txt
  std::filesystem::path chart;       // defaults to <root>/eval/intelligibility.svg
  bool no_chart = false;
};
void CmdEval(Context& ctx, const EvalOptions& opts);

// Stacked bar chart of intelligibility ratings per system.
void CmdPlot(Context& ctx, const std::vector<std::filesystem::path>& ratings,
             const std::filesystem::path& out);

}  // namespace percept::cli

#endif  // PERCEPT_TOOLS_COMMANDS_H_
