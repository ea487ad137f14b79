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

#ifndef PERCEPT_TOOLS_CONFIG_H_
#define PERCEPT_TOOLS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dataio/mel.h"
#include "json.hpp"
#include "mosnet/mosnet.h"
#include "mosnet/trainer.h"
#include "perceptual/objective.h"
#include "perceptual/trainer.h"
#include "ttscore/model.h"

namespace percept::cli {

inline constexpr char kHomeEnv[] = "PERCEPT_TTS_HOME";

struct DataPaths {
  std::filesystem::path tts_manifest;
  std::filesystem::path mos_manifest;
  std::filesystem::path mos_ratings;
};

struct MosSection {
  mosnet::MosPredictorConfig model;
  int epochs = 30;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double frame_loss_weight = 1.0;
  int patience = 10;
  bool augment = true;
  double assumed_tts_mos = 5.0;
  double validation_fraction = 0.2;
};

struct TtsSection {
  ttscore::ModelFamily family = ttscore::ModelFamily::kTransformer;
  ttscore::TtsModelConfig model;
  int epochs = 50;
  int batch_size = 4;
  double learning_rate = 1e-3;
  double grad_clip = 1.0;
  int keep_checkpoints = 2;
  double validation_fraction = 0.1;
  std::filesystem::path distilled_dir;  // precomputed FastSpeech targets
};

// Typed view of the run configuration. Relative paths are resolved against
// the config file's directory (the working directory without a file).
struct RunConfig {
  uint64_t seed = 1;
  std::filesystem::path output_dir;
  DataPaths data;
  dataio::MelConfig mel;
  MosSection mos;
  TtsSection tts;
  perceptual::PerceptualConfig perceptual;
  ttscore::SynthesisOptions synth;
};

// Defaults as JSON; every key a config file may set.
nlohmann::json DefaultConfigJson();

// Applies "a.b.c=value" to `doc`. The value is parsed as JSON when it is
// valid JSON and taken as a string otherwise. Throws UsageError for a
// malformed override.
void ApplyOverride(nlohmann::json& doc, const std::string& assignment);

// Loads `path` (may be empty) over the defaults, applies overrides in order
// and converts. Unknown top-level keys are rejected.
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides);

RunConfig FromJson(const nlohmann::json& doc,
                   const std::filesystem::path& base_dir);

// Config output_dir, else $PERCEPT_TTS_HOME, else ./percept_tts_out.
std::filesystem::path OutputRoot(const RunConfig& config);

}  // namespace percept::cli

#endif  // PERCEPT_TOOLS_CONFIG_H_
