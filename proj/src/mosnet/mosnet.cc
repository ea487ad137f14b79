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

#include "mosnet/mosnet.h"

#include <algorithm>
#include <string>

#include "common/error.h"
#include "nn/ops.h"

namespace percept::mosnet {

using nn::Tensor;

void MosPredictorConfig::Validate() const {
  if (input_bins != dataio::kMelBins) {
    throw UsageError("MOS predictor input_bins must be 80");
  }
  if (n_conv_layers < 1) throw UsageError("n_conv_layers must be >= 1");
  if (static_cast<int>(conv_channels.size()) != n_conv_layers ||
      static_cast<int>(conv_freq_strides.size()) != n_conv_layers) {
    throw UsageError("conv channel and stride plans must have n_conv_layers entries");
  }
  for (int c : conv_channels) {
    if (c < 1) throw UsageError("conv channels must be positive");
  }
  for (int s : conv_freq_strides) {
    if (s < 1) throw UsageError("conv strides must be positive");
  }
  if (blstm_units < 1) throw UsageError("blstm_units must be >= 1");
  if (fc_sizes.first < 1 || fc_sizes.second != 1) {
    throw UsageError("fc_sizes must be (hidden >= 1, 1)");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw UsageError("dropout must be in [0, 1)");
}

int MosPredictorConfig::ConvOutputBins() const {
  int f = input_bins;
  for (int s : conv_freq_strides) f = (f + s - 1) / s;
  return f;
}

void to_json(nlohmann::json& j, const MosPredictorConfig& c) {
  j = nlohmann::json{{"n_conv_layers", c.n_conv_layers},
                     {"conv_channels", c.conv_channels},
                     {"conv_freq_strides", c.conv_freq_strides},
                     {"blstm_units", c.blstm_units},
                     {"fc_sizes", {c.fc_sizes.first, c.fc_sizes.second}},
                     {"input_bins", c.input_bins},
                     {"dropout", c.dropout}};
}

void from_json(const nlohmann::json& j, MosPredictorConfig& c) {
  const MosPredictorConfig d;
  c.n_conv_layers = j.value("n_conv_layers", d.n_conv_layers);
  c.conv_channels = j.value("conv_channels", d.conv_channels);
  c.conv_freq_strides = j.value("conv_freq_strides", d.conv_freq_strides);
  c.blstm_units = j.value("blstm_units", d.blstm_units);
  if (j.contains("fc_sizes")) {
    const auto& fc = j.at("fc_sizes");
    if (!fc.is_array() || fc.size() != 2) {
      throw UsageError("fc_sizes must be a pair");
    }
    c.fc_sizes = {fc[0].get<int>(), fc[1].get<int>()};
  }
  c.input_bins = j.value("input_bins", d.input_bins);
  c.dropout = j.value("dropout", d.dropout);
}

MelBatch MelBatch::FromMels(const std::vector<dataio::MelSpectrogram>& mels) {
  MelBatch batch;
  for (const auto& m : mels) {
    m.Validate();
    batch.max_frames = std::max(batch.max_frames, m.num_frames);
    batch.lengths.push_back(m.num_frames);
  }
  const size_t stride = static_cast<size_t>(batch.max_frames) * dataio::kMelBins;
  batch.data.assign(stride * mels.size(), 0.0);
  for (size_t b = 0; b < mels.size(); ++b) {
    std::copy(mels[b].frames.begin(), mels[b].frames.end(),
              batch.data.begin() + b * stride);
  }
  return batch;
}

MosPredictor::MosPredictor(const MosPredictorConfig& config, uint64_t seed)
    : config_(config) {
  config_.Validate();
  std::mt19937_64 rng(seed);
  int c_in = 1;
  for (int i = 0; i < config_.n_conv_layers; ++i) {
    const int c_out = config_.conv_channels[i];
    const std::string name = "conv" + std::to_string(i);
    ConvLayer layer;
    layer.weight = params_.Add(name + ".weight",
                               nn::HeUniform({9 * c_in, c_out}, 9 * c_in, rng));
    layer.bias = params_.Add(name + ".bias", Tensor::Zeros({c_out}));
    layer.stride_f = config_.conv_freq_strides[i];
    conv_.push_back(layer);
    c_in = c_out;
  }
  const int features = config_.ConvOutputBins() * c_in;
  const int h = config_.blstm_units;
  for (int dir = 0; dir < 2; ++dir) {
    const std::string name = dir == 0 ? "blstm.fwd" : "blstm.bwd";
    lstm_[dir].input =
        params_.Add(name + ".input", nn::XavierUniform(features, 4 * h, rng));
    lstm_[dir].recurrent =
        params_.Add(name + ".recurrent", nn::XavierUniform(h, 4 * h, rng));
    std::vector<double> bias(4 * h, 0.0);
    std::fill(bias.begin() + h, bias.begin() + 2 * h, 1.0);  // forget gate
    lstm_[dir].bias =
        params_.Add(name + ".bias", Tensor::FromVector({4 * h}, bias));
  }
  fc_hidden_ = nn::Linear::Create(params_, "fc1", 2 * h, config_.fc_sizes.first, rng);
  fc_out_ = nn::Linear::Create(params_, "fc2", config_.fc_sizes.first, 1, rng);
  // Start predictions mid-scale.
  fc_out_.bias.mutable_data()[0] = 3.0;
}

Tensor MosPredictor::RunLstm(const Tensor& x, int direction) const {
  const auto& w = lstm_[direction];
  const int t_len = x.dim(0);
  const int h = config_.blstm_units;
  const Tensor gates_in = Add(MatMul(x, w.input), w.bias);
  Tensor state_h = Tensor::Zeros({1, h});
  Tensor state_c = Tensor::Zeros({1, h});
  std::vector<Tensor> outputs(t_len);
  for (int step = 0; step < t_len; ++step) {
    const int t = direction == 0 ? step : t_len - 1 - step;
    const Tensor g =
        Add(SliceRows(gates_in, t, t + 1), MatMul(state_h, w.recurrent));
    const Tensor in_gate = Sigmoid(SliceCols(g, 0, h));
    const Tensor forget = Sigmoid(SliceCols(g, h, 2 * h));
    const Tensor cand = Tanh(SliceCols(g, 2 * h, 3 * h));
    const Tensor out_gate = Sigmoid(SliceCols(g, 3 * h, 4 * h));
    state_c = Add(Mul(forget, state_c), Mul(in_gate, cand));
    state_h = Mul(out_gate, Tanh(state_c));
    outputs[t] = state_h;
  }
  return ConcatRows(outputs);
}

MosPredictor::Output MosPredictor::Forward(const Tensor& mel,
                                           std::mt19937_64* dropout_rng) const {
  if (mel.rank() != 2 || mel.dim(1) != config_.input_bins) {
    throw ShapeError("MOS predictor expects [T, 80] input, got " +
                     nn::ShapeString(mel.shape()));
  }
  const int t_len = mel.dim(0);
  if (t_len < 1) throw ShapeError("MOS predictor input has no frames");
  Tensor x = Scale(AddScalar(mel, -input_mean_), 1.0 / input_scale_);
  x = Reshape(x, {t_len, config_.input_bins, 1});
  for (const auto& layer : conv_) {
    x = Relu(Conv2d(x, layer.weight, layer.bias, 3, 3, layer.stride_f));
  }
  x = Reshape(x, {t_len, x.dim(1) * x.dim(2)});
  const Tensor features = nn::ConcatCols({RunLstm(x, 0), RunLstm(x, 1)});
  Tensor hidden = Relu(fc_hidden_(features));
  if (dropout_rng != nullptr) hidden = Dropout(hidden, config_.dropout, *dropout_rng);
  Output out;
  out.frame_scores = fc_out_(hidden);
  out.utterance_score = Mean(out.frame_scores);
  out.frame_features = features;
  return out;
}

std::vector<MosPredictor::Output> MosPredictor::ForwardBatch(
    const MelBatch& batch) const {
  std::vector<Output> out;
  const size_t stride = static_cast<size_t>(batch.max_frames) * dataio::kMelBins;
  for (int b = 0; b < batch.size(); ++b) {
    const int len = batch.lengths[b];
    std::vector<double> item(batch.data.begin() + b * stride,
                             batch.data.begin() + b * stride +
                                 static_cast<size_t>(len) * dataio::kMelBins);
    out.push_back(Forward(Tensor::FromVector({len, dataio::kMelBins}, item)));
  }
  return out;
}

double MosPredictor::Score(const dataio::MelSpectrogram& mel) const {
  nn::NoGradGuard guard;
  return Forward(mel.ToTensor()).utterance_score.item();
}

void MosPredictor::Freeze() {
  params_.SetRequiresGrad(false);
  params_.ZeroGrad();
  frozen_ = true;
}

void MosPredictor::SetInputNormalization(double mean, double scale) {
  if (!(scale > 0.0)) throw UsageError("input normalization scale must be > 0");
  input_mean_ = mean;
  input_scale_ = scale;
  has_norm_ = true;
}

void SaveMosPredictor(const MosPredictor& model,
                      const std::filesystem::path& dir,
                      const nlohmann::json& extra) {
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["config"] = model.config();
  meta["input_norm"] = {{"mean", model.input_mean()},
                        {"scale", model.input_scale()}};
  nn::SaveCheckpoint(dir, kMosCheckpointMagic, meta, model.params());
}

MosPredictor LoadMosPredictor(const std::filesystem::path& dir) {
  const auto meta = nn::ReadCheckpointMeta(dir, kMosCheckpointMagic);
  MosPredictorConfig config;
  try {
    config = meta.at("config").get<MosPredictorConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad MOS predictor config in " + dir.string() + ": " +
                    e.what());
  }
  MosPredictor model(config, 0);
  nn::LoadCheckpointParams(dir, kMosCheckpointMagic, model.params());
  if (meta.contains("input_norm")) {
    model.SetInputNormalization(meta["input_norm"].value("mean", 0.0),
                                meta["input_norm"].value("scale", 1.0));
  }
  return model;
}

}  // namespace percept::mosnet
