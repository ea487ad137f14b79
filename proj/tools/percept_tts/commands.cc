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

#include "commands.h"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>

#include "common/error.h"
#include "dataio/augment.h"
#include "dataio/manifest.h"
#include "dataio/mel_cache.h"
#include "dataio/wav.h"
#include "evalkit/chart.h"
#include "evalkit/per.h"
#include "evalkit/report.h"
#include "mosnet/metrics.h"
#include "ttscore/distill.h"
#include "ttscore/transformer_tts.h"

namespace percept::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  return os;
}

const fs::path& Require(const fs::path& p, const std::string& key) {
  if (p.empty()) throw UsageError("config key " + key + " is not set");
  return p;
}

dataio::AudioManifest LoadTtsManifest(const Context& ctx) {
  return dataio::LoadManifest(
      Require(ctx.config.data.tts_manifest, "data.tts_manifest"));
}

// Cached mel when prepare has run, fresh extraction otherwise.
dataio::MelLoader CachedLoader(const Context& ctx,
                               const dataio::AudioManifest& manifest,
                               const std::string& corpus) {
  const fs::path cache_dir = ctx.root / "mels" / corpus;
  const dataio::MelConfig mel = ctx.config.mel;
  return [&manifest, cache_dir, mel](const dataio::ManifestEntry& e) {
    const fs::path cached = cache_dir / (e.utt_id + ".mel");
    if (fs::exists(cached)) return dataio::ReadMelCache(cached);
    const dataio::Waveform wav = dataio::ReadWav(manifest.ResolveAudio(e));
    return dataio::ExtractMel(wav.samples, wav.sample_rate, mel);
  };
}

// Shuffled split; `fraction` of the items (rounded, at least one when the
// fraction is positive) go to the second part.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> Split(std::vector<T> items,
                                                double fraction,
                                                std::mt19937_64& rng) {
  std::shuffle(items.begin(), items.end(), rng);
  size_t n_val = static_cast<size_t>(std::lround(fraction * items.size()));
  if (fraction > 0.0 && n_val == 0) n_val = 1;
  n_val = std::min(n_val, items.size());
  std::vector<T> val(items.end() - n_val, items.end());
  items.resize(items.size() - n_val);
  return {std::move(items), std::move(val)};
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json Optional(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

fs::path DefaultPredictor(const Context& ctx, const fs::path& flag) {
  if (!flag.empty()) return flag;
  if (!ctx.config.perceptual.predictor_checkpoint.empty()) {
    return ctx.config.perceptual.predictor_checkpoint;
  }
  const fs::path trained = ctx.root / "mos" / "checkpoint";
  return fs::exists(trained / "meta.json") ? trained : fs::path();
}

std::vector<ttscore::TtsExample> BuildExamples(
    const Context& ctx, const dataio::AudioManifest& manifest,
    const ttscore::CharVocabulary& vocab) {
  const auto loader = CachedLoader(ctx, manifest, "tts");
  std::vector<ttscore::TtsExample> out;
  for (const auto& e : manifest.entries) {
    ttscore::TtsExample ex;
    ex.utt_id = e.utt_id;
    ex.text = vocab.Encode(e.text);
    ex.target = ttscore::MakeTarget(loader(e));
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::string> Texts(const dataio::AudioManifest& manifest) {
  std::vector<std::string> texts;
  for (const auto& e : manifest.entries) texts.push_back(e.text);
  return texts;
}

std::unique_ptr<ttscore::TtsModel> LoadTeacher(const fs::path& path) {
  auto model = ttscore::LoadTtsModel(perceptual::ResolveTtsCheckpoint(path));
  if (model->family() != ttscore::ModelFamily::kTransformer) {
    throw UsageError("teacher must be a transformer checkpoint");
  }
  return model;
}

std::vector<dataio::RatingRecord> LoadAllRatings(
    const std::vector<fs::path>& files) {
  std::vector<dataio::RatingRecord> all;
  for (const auto& f : files) {
    auto r = dataio::LoadRatings(f);
    all.insert(all.end(), r.begin(), r.end());
  }
  return all;
}

std::vector<evalkit::ChartRow> IntelligibilityRows(
    const std::vector<dataio::RatingRecord>& ratings) {
  std::map<std::string, std::vector<double>> scores;
  for (const auto& r : ratings) {
    if (r.test == dataio::TestKind::kIntelligibility) {
      scores[r.system_id].push_back(r.score);
    }
  }
  std::vector<evalkit::ChartRow> rows;
  for (const auto& [system, s] : scores) {
    rows.push_back({system, evalkit::ScoreHistogram::FromScores(s)});
  }
  return rows;
}

}  // namespace

Context MakeContext(const RunConfig& config, bool timestamps,
                    std::ostream& out) {
  Context ctx;
  ctx.config = config;
  ctx.root = OutputRoot(config);
  ctx.timestamps = timestamps;
  ctx.rng.seed(config.seed);
  ctx.out = &out;
  return ctx;
}

void CmdPrepare(Context& ctx) {
  struct Corpus {
    std::string name;
    fs::path manifest;
  };
  std::vector<Corpus> corpora;
  if (!ctx.config.data.tts_manifest.empty()) {
    corpora.push_back({"tts", ctx.config.data.tts_manifest});
  }
  if (!ctx.config.data.mos_manifest.empty()) {
    corpora.push_back({"mos", ctx.config.data.mos_manifest});
  }
  if (corpora.empty()) {
    throw UsageError("no corpus manifest configured (data.tts_manifest, "
                     "data.mos_manifest)");
  }
  std::ofstream report = OpenOut(ctx.root / "prepare_report.txt");
  int failures = 0;
  for (const auto& corpus : corpora) {
    const auto manifest = dataio::LoadManifest(corpus.manifest);
    const fs::path dir = ctx.root / "mels" / corpus.name;
    fs::create_directories(dir);
    int written = 0;
    for (const auto& e : manifest.entries) {
      try {
        const auto wav = dataio::ReadWav(manifest.ResolveAudio(e));
        const auto mel =
            dataio::ExtractMel(wav.samples, wav.sample_rate, ctx.config.mel);
        dataio::WriteMelCache(dir / (e.utt_id + ".mel"), mel);
        report << corpus.name << '\t' << e.utt_id << "\tok\t"
               << mel.num_frames << '\n';
        ++written;
      } catch (const Error& err) {
        report << corpus.name << '\t' << e.utt_id << "\tfailed\t"
               << err.what() << '\n';
        *ctx.out << "prepare: " << corpus.name << '/' << e.utt_id << ": "
                 << err.what() << '\n';
        ++failures;
      }
    }
    *ctx.out << "prepare: " << corpus.name << ": " << written << " of "
             << manifest.entries.size() << " mel caches written\n";
  }
  if (!ctx.config.data.mos_ratings.empty()) {
    const auto ratings = dataio::LoadRatings(ctx.config.data.mos_ratings);
    *ctx.out << "prepare: " << ratings.size() << " rating records ok\n";
  }
  if (failures > 0) {
    throw DataError(std::to_string(failures) + " entries failed; see " +
                    (ctx.root / "prepare_report.txt").string());
  }
}

void CmdTrainMos(Context& ctx, bool no_augment) {
  const auto& cfg = ctx.config.mos;
  const auto manifest = dataio::LoadManifest(
      Require(ctx.config.data.mos_manifest, "data.mos_manifest"));
  const auto ratings = dataio::LoadRatings(
      Require(ctx.config.data.mos_ratings, "data.mos_ratings"));
  const auto labels = dataio::MeanScoreByUtterance(
      ratings, dataio::TestKind::kNaturalness);
  const auto loader = CachedLoader(ctx, manifest, "mos");

  std::vector<dataio::RatedUtterance> items;
  for (const auto& e : manifest.entries) {
    auto it = labels.find(e.utt_id);
    if (it == labels.end()) {
      throw DataError("no naturalness ratings for MOS-corpus entry " +
                      e.utt_id);
    }
    dataio::RatedUtterance u{e.utt_id, loader(e), it->second,
                             dataio::Origin::kMosCorpus};
    dataio::ValidateRatedUtterance(u);
    items.push_back(std::move(u));
  }
  auto [train, heldout] = Split(items, cfg.validation_fraction, ctx.rng);
  if (train.empty()) throw DataError("empty MOS training split");
  if (heldout.empty()) throw DataError("empty MOS held-out split");

  const bool augment = cfg.augment && !no_augment;
  if (augment) {
    const auto tts_manifest = LoadTtsManifest(ctx);
    dataio::AugmentOptions opt;
    opt.assumed_tts_mos = cfg.assumed_tts_mos;
    train = dataio::AugmentMosDataset(
        train, tts_manifest, CachedLoader(ctx, tts_manifest, "tts"), opt);
  }

  const fs::path dir = ctx.root / "mos";
  fs::create_directories(dir);
  {
    std::ofstream os = OpenOut(dir / "train_items.tsv");
    for (const auto& u : train) {
      os << u.utt_id << '\t' << dataio::OriginName(u.origin) << '\t' << u.mos
         << '\n';
    }
  }

  mosnet::MosPredictor model(cfg.model, ctx.rng());
  mosnet::MosTrainHyper hyper;
  hyper.epochs = cfg.epochs;
  hyper.batch_size = cfg.batch_size;
  hyper.learning_rate = cfg.learning_rate;
  hyper.frame_loss_weight = cfg.frame_loss_weight;
  hyper.patience = cfg.patience;
  hyper.seed = ctx.rng();
  std::ofstream log = OpenOut(dir / "train_log.jsonl");
  hyper.on_epoch = [&](int epoch, double loss, double val) {
    nlohmann::ordered_json j;
    j["epoch"] = epoch;
    j["train_loss"] = loss;
    j["val_mse"] = std::isnan(val) ? json(nullptr) : json(val);
    if (ctx.timestamps) j["time"] = UtcTimestamp();
    log << j.dump() << '\n';
    log.flush();
    *ctx.out << "train-mos: epoch " << epoch << " loss " << loss << '\n';
  };
  const auto result = mosnet::TrainMos(model, train, heldout, hyper);
  const auto metrics = mosnet::EvaluateMosPredictor(model, heldout);

  nlohmann::ordered_json m;
  m["lcc"] = Optional(metrics.lcc);
  m["srcc"] = Optional(metrics.srcc);
  m["mse"] = metrics.mse;
  m["n_train"] = train.size();
  m["n_heldout"] = heldout.size();
  m["augmented"] = augment;
  m["best_epoch"] = result.best_epoch;
  m["final_train_mse"] = result.final_train_mse;
  OpenOut(dir / "metrics.json") << m.dump(2) << '\n';
  mosnet::SaveMosPredictor(model, dir / "checkpoint",
                           {{"metrics", json::parse(m.dump())}});
  *ctx.out << "train-mos: held-out mse " << metrics.mse << " over "
           << heldout.size() << " utterances\n";
}

fs::path CmdTrainTts(Context& ctx, const TrainTtsOptions& opts) {
  const auto manifest = LoadTtsManifest(ctx);
  const auto family = ctx.config.tts.family;
  perceptual::PerceptualConfig pcfg = ctx.config.perceptual;
  if (opts.perceptual) pcfg.enabled = *opts.perceptual;

  const std::string name =
      !opts.name.empty()
          ? opts.name
          : ttscore::FamilyName(family) +
                (pcfg.enabled ? "_perceptual" : "_baseline");
  const fs::path run_dir = ctx.root / "tts" / name;

  ttscore::CharVocabulary vocab;
  std::vector<ttscore::TtsExample> examples;
  if (family == ttscore::ModelFamily::kTransformer) {
    vocab = ttscore::CharVocabulary::FromTexts(Texts(manifest));
    examples = BuildExamples(ctx, manifest, vocab);
  } else {
    const fs::path distilled = !opts.distilled_dir.empty()
                                   ? opts.distilled_dir
                                   : ctx.config.tts.distilled_dir;
    if (!opts.teacher.empty()) {
      auto teacher = LoadTeacher(opts.teacher);
      vocab = teacher->vocabulary();
      const auto result = ttscore::DistillTargets(
          static_cast<const ttscore::TransformerTts&>(*teacher),
          BuildExamples(ctx, manifest, vocab));
      for (const auto& id : result.degenerate) {
        *ctx.out << "train-tts: degenerate alignment, excluded: " << id
                 << '\n';
      }
      ttscore::WriteDistilledTargets(run_dir / "distilled", result.utterances);
      for (const auto& u : result.utterances) {
        examples.push_back({u.utt_id, u.text, u.target});
      }
    } else if (!distilled.empty()) {
      vocab = ttscore::CharVocabulary::FromTexts(Texts(manifest));
      std::map<std::string, std::string> text_of;
      for (const auto& e : manifest.entries) text_of[e.utt_id] = e.text;
      for (auto& [id, target] : ttscore::ReadDistilledTargets(distilled)) {
        auto it = text_of.find(id);
        if (it == text_of.end()) {
          throw DataError("distilled target " + id + " is not in the manifest");
        }
        ttscore::TtsExample ex{id, vocab.Encode(it->second), target};
        ttscore::ValidateTarget(ex.target, ex.text.length());
        examples.push_back(std::move(ex));
      }
    } else {
      throw UsageError(
          "fastspeech training needs --teacher or distilled targets");
    }
  }
  if (examples.empty()) throw DataError("no TTS training examples");

  std::optional<mosnet::MosPredictor> predictor;
  const fs::path predictor_path = DefaultPredictor(ctx, opts.predictor);
  if (!predictor_path.empty()) {
    predictor.emplace(mosnet::LoadMosPredictor(predictor_path));
    predictor->Freeze();
  } else if (pcfg.enabled) {
    throw UsageError("--perceptual on needs a predictor checkpoint "
                     "(--predictor or perceptual.predictor_checkpoint)");
  }

  auto [train, validation] =
      Split(examples, ctx.config.tts.validation_fraction, ctx.rng);
  if (train.empty()) throw DataError("empty TTS training split");

  auto model =
      ttscore::CreateTtsModel(family, ctx.config.tts.model, vocab, ctx.rng());
  perceptual::TtsTrainHyper hyper;
  hyper.epochs = ctx.config.tts.epochs;
  hyper.batch_size = ctx.config.tts.batch_size;
  hyper.learning_rate = ctx.config.tts.learning_rate;
  hyper.grad_clip = ctx.config.tts.grad_clip;
  hyper.keep_checkpoints = ctx.config.tts.keep_checkpoints;
  hyper.seed = ctx.rng();
  hyper.output_dir = run_dir;
  hyper.timestamps = ctx.timestamps;
  hyper.on_epoch = [&](const perceptual::EpochLog& e) {
    *ctx.out << "train-tts: epoch " << e.epoch << ' '
             << e.ToJsonLine(false) << '\n';
  };
  const auto result = perceptual::TrainTts(
      *model, train, validation, predictor ? &*predictor : nullptr, pcfg,
      hyper);
  *ctx.out << "train-tts: best epoch " << result.best_epoch << " in "
           << run_dir.string() << '\n';
  return run_dir;
}

void CmdDistill(Context& ctx, const fs::path& teacher_path,
                const fs::path& out_dir) {
  if (teacher_path.empty()) throw UsageError("distill needs --teacher");
  auto teacher = LoadTeacher(teacher_path);
  const auto manifest = LoadTtsManifest(ctx);
  const auto result = ttscore::DistillTargets(
      static_cast<const ttscore::TransformerTts&>(*teacher),
      BuildExamples(ctx, manifest, teacher->vocabulary()));
  const fs::path dir = out_dir.empty() ? ctx.root / "distill" : out_dir;
  ttscore::WriteDistilledTargets(dir, result.utterances);
  std::ofstream os = OpenOut(dir / "degenerate.txt");
  for (const auto& id : result.degenerate) {
    os << id << '\n';
    *ctx.out << "distill: degenerate alignment, excluded: " << id << '\n';
  }
  *ctx.out << "distill: " << result.utterances.size() << " targets, "
           << result.degenerate.size() << " degenerate, in " << dir.string()
           << '\n';
  if (result.utterances.empty()) {
    throw DataError("every alignment was degenerate");
  }
}

void CmdSynth(Context& ctx, const SynthOptions& opts) {
  if (opts.checkpoint.empty()) throw UsageError("synth needs --checkpoint");
  const fs::path ckpt = perceptual::ResolveTtsCheckpoint(opts.checkpoint);
  auto model = ttscore::LoadTtsModel(ckpt);
  const auto manifest = dataio::LoadManifest(
      !opts.manifest.empty()
          ? opts.manifest
          : Require(ctx.config.data.tts_manifest, "data.tts_manifest"));
  const std::string system =
      !opts.system.empty() ? opts.system
                           : fs::absolute(opts.checkpoint).filename().string();
  const fs::path dir =
      !opts.out_dir.empty() ? opts.out_dir : ctx.root / "synth" / system;
  fs::create_directories(dir);

  std::optional<mosnet::MosPredictor> predictor;
  if (const auto p = DefaultPredictor(ctx, opts.predictor); !p.empty()) {
    predictor.emplace(mosnet::LoadMosPredictor(p));
  }
  std::ofstream index = OpenOut(dir / "synth_index.tsv");
  index << "utt_id\tframes\ttruncated" << (predictor ? "\tpredicted_mos" : "")
        << '\n';
  double score_sum = 0.0;
  for (const auto& e : manifest.entries) {
    const auto text = model->vocabulary().Encode(e.text);
    const auto result = model->Synthesize(text, ctx.config.synth);
    dataio::WriteMelCache(dir / (e.utt_id + ".mel"), result.mel);
    index << e.utt_id << '\t' << result.mel.num_frames << '\t'
          << (result.truncated ? 1 : 0);
    if (predictor) {
      const double s = predictor->Score(result.mel);
      score_sum += s;
      index << '\t' << s;
    }
    index << '\n';
    if (result.truncated) {
      *ctx.out << "synth: " << e.utt_id << " hit the frame cap\n";
    }
  }
  *ctx.out << "synth: " << manifest.entries.size() << " utterances in "
           << dir.string() << '\n';
  if (predictor && !manifest.entries.empty()) {
    *ctx.out << "synth: mean predicted MOS "
             << score_sum / manifest.entries.size() << '\n';
  }
}

void CmdEval(Context& ctx, const EvalOptions& opts) {
  if (opts.ratings.empty() && opts.per_hyp.empty()) {
    throw UsageError("eval needs --ratings or --per");
  }
  const auto ratings = LoadAllRatings(opts.ratings);

  std::map<std::string, evalkit::PerResult> per;
  if (!opts.per_hyp.empty()) {
    if (opts.per_ref.empty() || opts.per_class.empty()) {
      throw UsageError("--per needs --per-ref and --per-class");
    }
    const auto refs = evalkit::LoadPhoneFile(opts.per_ref);
    const auto classes = evalkit::LoadClassFile(opts.per_class);
    for (const auto& spec : opts.per_hyp) {
      const size_t eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw UsageError("--per expects system=path, got '" + spec + "'");
      }
      const auto hyps = evalkit::LoadPhoneFile(spec.substr(eq + 1));
      per[spec.substr(0, eq)] =
          evalkit::PerBreakdown(evalkit::JoinPerInputs(refs, hyps, classes));
    }
  }
  const auto report = evalkit::BuildReport(ratings, per);
  const fs::path report_path =
      !opts.report.empty() ? opts.report : ctx.root / "eval" / "report.txt";
  evalkit::WriteReport(report, report_path);
  *ctx.out << evalkit::FormatReport(report);
  *ctx.out << "eval: report written to " << report_path.string() << '\n';

  const auto rows = IntelligibilityRows(ratings);
  if (!opts.no_chart && !rows.empty()) {
    const fs::path chart = !opts.chart.empty()
                               ? opts.chart
                               : ctx.root / "eval" / "intelligibility.svg";
    evalkit::WriteStackedBarChart(rows, chart, "Intelligibility");
    *ctx.out << "eval: chart written to " << chart.string() << '\n';
  }
}

void CmdPlot(Context& ctx, const std::vector<fs::path>& ratings,
             const fs::path& out) {
  if (ratings.empty()) throw UsageError("plot needs --ratings");
  const auto rows = IntelligibilityRows(LoadAllRatings(ratings));
  if (rows.empty()) throw DataError("no intelligibility ratings to plot");
  const fs::path path =
      !out.empty() ? out : ctx.root / "plots" / "intelligibility.svg";
  evalkit::WriteStackedBarChart(rows, path, "Intelligibility");
  *ctx.out << "plot: chart written to " << path.string() << '\n';
}

}  // namespace percept::cli
