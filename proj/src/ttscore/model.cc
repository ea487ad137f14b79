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

#include "ttscore/model.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"
#include "ttscore/fastspeech.h"
#include "ttscore/transformer_tts.h"

namespace percept::ttscore {

std::string FamilyName(ModelFamily family) {
  return family == ModelFamily::kTransformer ? "transformer" : "fastspeech";
}

ModelFamily ParseFamily(const std::string& name) {
  if (name == "transformer") return ModelFamily::kTransformer;
  if (name == "fastspeech") return ModelFamily::kFastSpeech;
  throw UsageError("unknown model family '" + name + "'");
}

std::string DurationLossName(DurationLoss mode) {
  return mode == DurationLoss::kCrossEntropyBucketed ? "cross_entropy_bucketed"
                                                     : "mse_log";
}

DurationLoss ParseDurationLoss(const std::string& name) {
  if (name == "cross_entropy_bucketed") {
    return DurationLoss::kCrossEntropyBucketed;
  }
  if (name == "mse_log") return DurationLoss::kMseLog;
  throw UsageError("unknown duration loss '" + name + "'");
}

void TtsModelConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("tts config: " + what);
  };
  require(vocab_size >= 1, "vocab_size must be positive");
  require(d_model >= 1 && heads >= 1 && d_model % heads == 0,
          "d_model must be a positive multiple of heads");
  require(ffn_dim >= 1 && prenet_dim >= 1, "hidden sizes must be positive");
  require(encoder_layers >= 1 && decoder_layers >= 1,
          "need at least one encoder and decoder layer");
  require(postnet_layers >= 1 && postnet_channels >= 1,
          "post-net must have at least one layer");
  require(postnet_kernel % 2 == 1 && conv_kernel % 2 == 1 &&
              duration_kernel % 2 == 1,
          "kernels must be odd");
  require(duration_channels >= 1, "duration_channels must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(sample_rate > 0 && hop_length > 0, "bad frame rate");
  require(loss.guided_attention_sigma > 0.0,
          "guided attention width must be positive");
  require(loss.stop_pos_weight > 0.0, "stop_pos_weight must be positive");
  require(loss.max_duration >= 1, "max_duration must be positive");
}

void to_json(nlohmann::json& j, const TtsLossConfig& c) {
  j = {{"guided_attention_weight", c.guided_attention_weight},
       {"guided_attention_sigma", c.guided_attention_sigma},
       {"stop_pos_weight", c.stop_pos_weight},
       {"duration_loss", DurationLossName(c.duration_loss)},
       {"duration_weight", c.duration_weight},
       {"max_duration", c.max_duration}};
}

void from_json(const nlohmann::json& j, TtsLossConfig& c) {
  c.guided_attention_weight =
      j.value("guided_attention_weight", c.guided_attention_weight);
  c.guided_attention_sigma =
      j.value("guided_attention_sigma", c.guided_attention_sigma);
  c.stop_pos_weight = j.value("stop_pos_weight", c.stop_pos_weight);
  if (j.contains("duration_loss")) {
    c.duration_loss = ParseDurationLoss(j.at("duration_loss").get<std::string>());
  }
  c.duration_weight = j.value("duration_weight", c.duration_weight);
  c.max_duration = j.value("max_duration", c.max_duration);
}

void to_json(nlohmann::json& j, const TtsModelConfig& c) {
  j = {{"vocab_size", c.vocab_size},
       {"d_model", c.d_model},
       {"heads", c.heads},
       {"ffn_dim", c.ffn_dim},
       {"encoder_layers", c.encoder_layers},
       {"decoder_layers", c.decoder_layers},
       {"prenet_dim", c.prenet_dim},
       {"postnet_channels", c.postnet_channels},
       {"postnet_layers", c.postnet_layers},
       {"postnet_kernel", c.postnet_kernel},
       {"conv_kernel", c.conv_kernel},
       {"duration_channels", c.duration_channels},
       {"duration_kernel", c.duration_kernel},
       {"dropout", c.dropout},
       {"sample_rate", c.sample_rate},
       {"hop_length", c.hop_length},
       {"loss", c.loss}};
}

void from_json(const nlohmann::json& j, TtsModelConfig& c) {
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.d_model = j.value("d_model", c.d_model);
  c.heads = j.value("heads", c.heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
  c.prenet_dim = j.value("prenet_dim", c.prenet_dim);
  c.postnet_channels = j.value("postnet_channels", c.postnet_channels);
  c.postnet_layers = j.value("postnet_layers", c.postnet_layers);
  c.postnet_kernel = j.value("postnet_kernel", c.postnet_kernel);
  c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
  c.duration_channels = j.value("duration_channels", c.duration_channels);
  c.duration_kernel = j.value("duration_kernel", c.duration_kernel);
  c.dropout = j.value("dropout", c.dropout);
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.hop_length = j.value("hop_length", c.hop_length);
  if (j.contains("loss")) j.at("loss").get_to(c.loss);
}

TtsModel::TtsModel(const TtsModelConfig& config, CharVocabulary vocabulary)
    : config_(config),
      vocabulary_(std::move(vocabulary)),
      normalizer_(MelNormalizer::Identity(dataio::kMelBins)) {
  config_.vocab_size = vocabulary_.size();
  config_.Validate();
}

void TtsModel::set_normalizer(MelNormalizer normalizer) {
  if (normalizer.mean.size() != dataio::kMelBins ||
      normalizer.stddev.size() != dataio::kMelBins) {
    throw ShapeError("mel normaliser must have one entry per bin");
  }
  for (double s : normalizer.stddev) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw NumericError("mel normaliser scale must be positive");
    }
  }
  normalizer_ = std::move(normalizer);
}

void TtsModel::CheckTokens(const TextSequence& text) const {
  if (text.token_ids.empty()) throw DataError("empty input text");
  for (int id : text.token_ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw DataError("token id " + std::to_string(id) +
                      " outside the vocabulary");
    }
  }
}

dataio::MelSpectrogram TtsModel::ToMel(const nn::Tensor& frames) const {
  for (double v : frames.data()) {
    if (!std::isfinite(v)) throw NumericError("synthesised mel is not finite");
  }
  return dataio::MelSpectrogram::FromTensor(frames, config_.sample_rate,
                                            config_.hop_length);
}

std::unique_ptr<TtsModel> CreateTtsModel(ModelFamily family,
                                         const TtsModelConfig& config,
                                         const CharVocabulary& vocabulary,
                                         uint64_t seed) {
  if (family == ModelFamily::kTransformer) {
    return std::make_unique<TransformerTts>(config, vocabulary, seed);
  }
  return std::make_unique<FastSpeech>(config, vocabulary, seed);
}

MelNormalizer FitMelNormalizer(
    const std::vector<dataio::MelSpectrogram>& mels) {
  const int bins = dataio::kMelBins;
  std::vector<double> sum(bins, 0.0), sq(bins, 0.0);
  long count = 0;
  for (const auto& m : mels) {
    for (int t = 0; t < m.num_frames; ++t) {
      for (int b = 0; b < bins; ++b) {
        const double v = m.at(t, b);
        sum[b] += v;
        sq[b] += v * v;
      }
    }
    count += m.num_frames;
  }
  if (count == 0) throw DataError("no frames to fit the mel normaliser");
  MelNormalizer norm;
  norm.mean.resize(bins);
  norm.stddev.resize(bins);
  for (int b = 0; b < bins; ++b) {
    norm.mean[b] = sum[b] / count;
    const double var = std::max(0.0, sq[b] / count - norm.mean[b] * norm.mean[b]);
    norm.stddev[b] = std::max(std::sqrt(var), 1e-3);
  }
  return norm;
}

void SaveTtsModel(const TtsModel& model, const std::filesystem::path& dir,
                  const nlohmann::json& extra) {
  nlohmann::json meta = extra;
  meta["family"] = FamilyName(model.family());
  meta["config"] = model.config();
  meta["vocabulary"] = model.vocabulary().symbols();
  meta["mel_mean"] = model.normalizer().mean;
  meta["mel_std"] = model.normalizer().stddev;
  nn::SaveCheckpoint(dir, kTtsCheckpointMagic, meta, model.params());
}

std::unique_ptr<TtsModel> LoadTtsModel(const std::filesystem::path& dir) {
  const nlohmann::json meta = nn::ReadCheckpointMeta(dir, kTtsCheckpointMagic);
  try {
    const ModelFamily family = ParseFamily(meta.at("family").get<std::string>());
    const TtsModelConfig config = meta.at("config").get<TtsModelConfig>();
    const CharVocabulary vocab(
        meta.at("vocabulary").get<std::vector<std::string>>());
    auto model = CreateTtsModel(family, config, vocab, 0);
    if (model->config().vocab_size != config.vocab_size) {
      throw DataError("vocabulary does not match the stored vocab_size");
    }
    model->set_normalizer({meta.at("mel_mean").get<std::vector<double>>(),
                           meta.at("mel_std").get<std::vector<double>>()});
    nn::LoadCheckpointParams(dir, kTtsCheckpointMagic, model->params());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed tts checkpoint " + dir.string() + ": " +
                    e.what());
  } catch (const UsageError& e) {
    throw DataError("malformed tts checkpoint " + dir.string() + ": " +
                    e.what());
  }
}

}  // namespace percept::ttscore
