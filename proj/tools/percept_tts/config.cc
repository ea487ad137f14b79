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

#include "config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "common/error.h"

namespace percept::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path Resolve(const json& value, const fs::path& base) {
  const std::string s = value.get<std::string>();
  if (s.empty()) return {};
  fs::path p(s);
  return p.is_absolute() ? p : base / p;
}

void MergeInto(json& dst, const json& src, const std::string& where) {
  for (const auto& [key, value] : src.items()) {
    if (!dst.contains(key)) {
      throw UsageError("unknown config key " + where + key);
    }
    if (dst[key].is_object() && value.is_object() &&
        !dst[key].empty()) {
      MergeInto(dst[key], value, where + key + ".");
    } else {
      dst[key] = value;
    }
  }
}

}  // namespace

json DefaultConfigJson() {
  const MosSection mos;
  const TtsSection tts;
  json j;
  j["seed"] = 1;
  j["output_dir"] = "";
  j["data"] = {{"tts_manifest", ""}, {"mos_manifest", ""}, {"mos_ratings", ""}};
  j["mel"] = dataio::MelConfig{};
  j["mos"] = {{"model", mos.model},
              {"epochs", mos.epochs},
              {"batch_size", mos.batch_size},
              {"learning_rate", mos.learning_rate},
              {"frame_loss_weight", mos.frame_loss_weight},
              {"patience", mos.patience},
              {"augment", mos.augment},
              {"assumed_tts_mos", mos.assumed_tts_mos},
              {"validation_fraction", mos.validation_fraction}};
  ttscore::TtsModelConfig model;
  json model_json = model;
  model_json.erase("vocab_size");
  j["tts"] = {{"family", ttscore::FamilyName(tts.family)},
              {"model", model_json},
              {"epochs", tts.epochs},
              {"batch_size", tts.batch_size},
              {"learning_rate", tts.learning_rate},
              {"grad_clip", tts.grad_clip},
              {"keep_checkpoints", tts.keep_checkpoints},
              {"validation_fraction", tts.validation_fraction},
              {"distilled_dir", ""}};
  perceptual::PerceptualConfig pc;
  json pj = pc;
  pj["enabled"] = pc.enabled;
  j["perceptual"] = pj;
  j["synth"] = {{"stop_threshold", 0.5}, {"max_frames_per_token", 20}};
  return j;
}

void ApplyOverride(json& doc, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty() || !node->is_object() || !node->contains(parts[i])) {
      throw UsageError("unknown config key '" + key + "'");
    }
    node = &(*node)[parts[i]];
  }
  *node = value;
}

RunConfig FromJson(const json& doc, const fs::path& base_dir) {
  RunConfig c;
  try {
    c.seed = doc.at("seed").get<uint64_t>();
    c.output_dir = Resolve(doc.at("output_dir"), base_dir);
    const auto& data = doc.at("data");
    c.data.tts_manifest = Resolve(data.at("tts_manifest"), base_dir);
    c.data.mos_manifest = Resolve(data.at("mos_manifest"), base_dir);
    c.data.mos_ratings = Resolve(data.at("mos_ratings"), base_dir);
    doc.at("mel").get_to(c.mel);
    c.mel.Validate();

    const auto& mos = doc.at("mos");
    mos.at("model").get_to(c.mos.model);
    c.mos.model.Validate();
    c.mos.epochs = mos.at("epochs").get<int>();
    c.mos.batch_size = mos.at("batch_size").get<int>();
    c.mos.learning_rate = mos.at("learning_rate").get<double>();
    c.mos.frame_loss_weight = mos.at("frame_loss_weight").get<double>();
    c.mos.patience = mos.at("patience").get<int>();
    c.mos.augment = mos.at("augment").get<bool>();
    c.mos.assumed_tts_mos = mos.at("assumed_tts_mos").get<double>();
    c.mos.validation_fraction = mos.at("validation_fraction").get<double>();

    const auto& tts = doc.at("tts");
    c.tts.family = ttscore::ParseFamily(tts.at("family").get<std::string>());
    tts.at("model").get_to(c.tts.model);
    c.tts.epochs = tts.at("epochs").get<int>();
    c.tts.batch_size = tts.at("batch_size").get<int>();
    c.tts.learning_rate = tts.at("learning_rate").get<double>();
    c.tts.grad_clip = tts.at("grad_clip").get<double>();
    c.tts.keep_checkpoints = tts.at("keep_checkpoints").get<int>();
    c.tts.validation_fraction = tts.at("validation_fraction").get<double>();
    c.tts.distilled_dir = Resolve(tts.at("distilled_dir"), base_dir);

    doc.at("perceptual").get_to(c.perceptual);
    c.perceptual.enabled = doc.at("perceptual").at("enabled").get<bool>();
    if (!c.perceptual.predictor_checkpoint.empty()) {
      c.perceptual.predictor_checkpoint =
          Resolve(c.perceptual.predictor_checkpoint, base_dir).string();
    }
    c.perceptual.schedule.Validate();

    c.synth.stop_threshold = doc.at("synth").at("stop_threshold").get<double>();
    c.synth.max_frames_per_token =
        doc.at("synth").at("max_frames_per_token").get<int>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  for (double f : {c.mos.validation_fraction, c.tts.validation_fraction}) {
    if (!(f >= 0.0 && f < 1.0)) {
      throw UsageError("validation_fraction must be in [0, 1)");
    }
  }
  if (c.mos.epochs < 1 || c.tts.epochs < 1 || c.mos.batch_size < 1 ||
      c.tts.batch_size < 1) {
    throw UsageError("epochs and batch sizes must be positive");
  }
  return c;
}

RunConfig LoadRunConfig(const fs::path& path,
                        const std::vector<std::string>& overrides) {
  json doc = DefaultConfigJson();
  fs::path base = fs::current_path();
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open config " + path.string());
    json file;
    try {
      file = json::parse(is);
    } catch (const json::parse_error& e) {
      throw UsageError("config " + path.string() + ": " + e.what());
    }
    if (!file.is_object()) throw UsageError("config must be a JSON object");
    MergeInto(doc, file, "");
    base = fs::absolute(path).parent_path();
  }
  for (const auto& o : overrides) ApplyOverride(doc, o);
  return FromJson(doc, base);
}

fs::path OutputRoot(const RunConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* home = std::getenv(kHomeEnv); home != nullptr && *home) {
    return fs::path(home);
  }
  return fs::current_path() / "percept_tts_out";
}

}  // namespace percept::cli
