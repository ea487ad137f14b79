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

// percept_tts: data preparation, MOS predictor training, TTS training with
// the perceptual objective, distillation, synthesis and evaluation.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "common/error.h"
#include "config.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using namespace percept;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptually guided TTS training and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  bool no_timestamp = false;
  app.add_option("-c,--config", config_path, "JSON run configuration");
  app.add_option("--set", overrides, "Override a config key: a.b=value")
      ->expected(1)
      ->take_all();
  app.add_flag("--no-timestamp", no_timestamp,
               "Omit wall-clock times from logs");

  auto* prepare = app.add_subcommand("prepare", "Extract and cache mels");

  bool no_augment = false;
  auto* train_mos = app.add_subcommand("train-mos", "Train the MOS predictor");
  train_mos->add_flag("--no-augment", no_augment,
                      "Train on the MOS corpus only");

  std::string perceptual_flag;
  cli::TrainTtsOptions tts_opts;
  std::string teacher, distilled, predictor, run_name;
  auto* train_tts = app.add_subcommand("train-tts", "Train a TTS model");
  train_tts->add_option("--perceptual", perceptual_flag, "on or off")
      ->check(CLI::IsMember({"on", "off"}));
  train_tts->add_option("--teacher", teacher,
                        "Transformer checkpoint for FastSpeech distillation");
  train_tts->add_option("--distilled", distilled,
                        "Directory of precomputed distilled targets");
  train_tts->add_option("--predictor", predictor, "MOS predictor checkpoint");
  train_tts->add_option("--name", run_name, "Run directory name");

  std::string distill_teacher, distill_out;
  auto* distill = app.add_subcommand("distill", "Extract durations and mels "
                                                "from a teacher");
  distill->add_option("--teacher", distill_teacher, "Teacher checkpoint")
      ->required();
  distill->add_option("--out", distill_out, "Output directory");

  cli::SynthOptions synth_opts;
  std::string synth_ckpt, synth_manifest, synth_out, synth_predictor;
  auto* synth = app.add_subcommand("synth", "Synthesize mels");
  synth->add_option("--checkpoint", synth_ckpt,
                    "Checkpoint or training run directory")
      ->required();
  synth->add_option("--manifest", synth_manifest, "Texts to synthesize");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--system", synth_opts.system, "System label");
  synth->add_option("--predictor", synth_predictor,
                    "Score outputs with this MOS predictor");

  cli::EvalOptions eval_opts;
  std::vector<std::string> eval_ratings;
  std::string per_ref, per_class, report, chart;
  auto* eval = app.add_subcommand("eval", "Metric report from ratings and PER");
  eval->add_option("--ratings", eval_ratings, "Ratings CSV files");
  eval->add_option("--per", eval_opts.per_hyp,
                   "Hypothesis phones per system: system=path");
  eval->add_option("--per-ref", per_ref, "Reference phones");
  eval->add_option("--per-class", per_class, "Sentence classes");
  eval->add_option("--report", report, "Report path");
  eval->add_option("--chart", chart, "Chart path");
  eval->add_flag("--no-chart", eval_opts.no_chart, "Skip the chart");

  std::vector<std::string> plot_ratings;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Stacked bar chart of "
                                          "intelligibility ratings");
  plot->add_option("--ratings", plot_ratings, "Ratings CSV files")->required();
  plot->add_option("--out", plot_out, "SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const cli::RunConfig config = cli::LoadRunConfig(config_path, overrides);
    cli::Context ctx = cli::MakeContext(config, !no_timestamp, std::cout);
    if (prepare->parsed()) {
      cli::CmdPrepare(ctx);
    } else if (train_mos->parsed()) {
      cli::CmdTrainMos(ctx, no_augment);
    } else if (train_tts->parsed()) {
      if (!perceptual_flag.empty()) {
        tts_opts.perceptual = perceptual_flag == "on";
      }
      tts_opts.teacher = teacher;
      tts_opts.distilled_dir = distilled;
      tts_opts.predictor = predictor;
      tts_opts.name = run_name;
      cli::CmdTrainTts(ctx, tts_opts);
    } else if (distill->parsed()) {
      cli::CmdDistill(ctx, distill_teacher, distill_out);
    } else if (synth->parsed()) {
      synth_opts.checkpoint = synth_ckpt;
      synth_opts.manifest = synth_manifest;
      synth_opts.out_dir = synth_out;
      synth_opts.predictor = synth_predictor;
      cli::CmdSynth(ctx, synth_opts);
    } else if (eval->parsed()) {
      for (const auto& r : eval_ratings) eval_opts.ratings.emplace_back(r);
      eval_opts.per_ref = per_ref;
      eval_opts.per_class = per_class;
      eval_opts.report = report;
      eval_opts.chart = chart;
      cli::CmdEval(ctx, eval_opts);
    } else if (plot->parsed()) {
      std::vector<fs::path> files(plot_ratings.begin(), plot_ratings.end());
      cli::CmdPlot(ctx, files, plot_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    // DataError, ShapeError, filesystem and I/O failures.
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
