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

#include "nn/parameters.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "common/error.h"
#include "nn/ops.h"

namespace percept::nn {

namespace {

template <typename T>
void WritePod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("truncated parameter archive");
  return v;
}

}  // namespace

Tensor ParameterSet::Add(const std::string& name, Tensor value) {
  if (Contains(name)) throw UsageError("duplicate parameter name: " + name);
  value.set_requires_grad(true);
  items_.emplace_back(name, value);
  return value;
}

const Tensor& ParameterSet::Get(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw UsageError("unknown parameter: " + name);
}

bool ParameterSet::Contains(const std::string& name) const {
  for (const auto& item : items_) {
    if (item.first == name) return true;
  }
  return false;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto& item : items_) out.push_back(item.second);
  return out;
}

size_t ParameterSet::NumValues() const {
  size_t n = 0;
  for (const auto& item : items_) n += item.second.size();
  return n;
}

void ParameterSet::ZeroGrad() {
  for (auto& item : items_) item.second.ZeroGrad();
}

void ParameterSet::SetRequiresGrad(bool flag) {
  for (auto& item : items_) item.second.set_requires_grad(flag);
}

uint64_t ParameterSet::Checksum() const {
  uint64_t h = 1469598103934665603ULL;
  for (const auto& item : items_) {
    for (double v : item.second.data()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

void ParameterSet::WriteArchive(std::ostream& os,
                                std::string_view magic) const {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  WritePod<uint32_t>(os, static_cast<uint32_t>(items_.size()));
  for (const auto& [name, t] : items_) {
    WritePod<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    WritePod<uint32_t>(os, static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) WritePod<uint32_t>(os, static_cast<uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
}

void ParameterSet::ReadArchive(std::istream& is, std::string_view magic) {
  std::string found(magic.size(), '\0');
  is.read(found.data(), static_cast<std::streamsize>(found.size()));
  if (!is || found != magic) {
    throw DataError("parameter archive magic mismatch, expected " +
                    std::string(magic));
  }
  const auto count = ReadPod<uint32_t>(is);
  if (count != items_.size()) {
    throw DataError("parameter archive holds " + std::to_string(count) +
                    " tensors, model expects " +
                    std::to_string(items_.size()));
  }
  for (auto& [name, t] : items_) {
    const auto name_len = ReadPod<uint32_t>(is);
    std::string stored(name_len, '\0');
    is.read(stored.data(), name_len);
    if (stored != name) {
      throw DataError("parameter archive: expected " + name + ", found " +
                      stored);
    }
    const auto rank = ReadPod<uint32_t>(is);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<int>(ReadPod<uint32_t>(is));
    if (shape != t.shape()) {
      throw DataError("parameter " + name + " has shape " + ShapeString(shape) +
                      ", model expects " + ShapeString(t.shape()));
    }
    is.read(reinterpret_cast<char*>(t.mutable_data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!is) throw DataError("truncated data for parameter " + name);
  }
}

Tensor XavierUniform(int fan_in, int fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> v(static_cast<size_t>(fan_in) * fan_out);
  for (double& x : v) x = dist(rng);
  return Tensor::FromVector({fan_in, fan_out}, std::move(v));
}

Tensor HeUniform(const Shape& shape, int fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = dist(rng);
  return Tensor::FromVector(shape, std::move(v));
}

Linear Linear::Create(ParameterSet& params, const std::string& name, int in,
                      int out, std::mt19937_64& rng) {
  Linear layer;
  layer.weight = params.Add(name + ".weight", XavierUniform(in, out, rng));
  layer.bias = params.Add(name + ".bias", Tensor::Zeros({out}));
  return layer;
}

Tensor Linear::operator()(const Tensor& x) const {
  return Add(MatMul(x, weight), bias);
}

LayerNorm LayerNorm::Create(ParameterSet& params, const std::string& name,
                            int width) {
  LayerNorm norm;
  norm.gain = params.Add(name + ".gain", Tensor::Full({width}, 1.0));
  norm.bias = params.Add(name + ".bias", Tensor::Zeros({width}));
  return norm;
}

Tensor LayerNorm::operator()(const Tensor& x) const {
  return LayerNormRows(x, gain, bias);
}

void SaveCheckpoint(const std::filesystem::path& dir, std::string_view magic,
                    const nlohmann::json& meta, const ParameterSet& params) {
  std::filesystem::create_directories(dir);
  nlohmann::json full = meta;
  full["format"] = std::string(magic);
  {
    std::ofstream os(dir / "meta.json");
    if (!os) throw DataError("cannot write " + (dir / "meta.json").string());
    os << full.dump(2) << "\n";
  }
  std::ofstream os(dir / "params.bin", std::ios::binary);
  if (!os) throw DataError("cannot write " + (dir / "params.bin").string());
  params.WriteArchive(os, magic);
}

nlohmann::json ReadCheckpointMeta(const std::filesystem::path& dir,
                                  std::string_view magic) {
  std::ifstream is(dir / "meta.json");
  if (!is) throw DataError("missing checkpoint metadata in " + dir.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint metadata in " + dir.string() + ": " +
                    e.what());
  }
  if (meta.value("format", "") != magic) {
    throw DataError("checkpoint " + dir.string() + " is not a " +
                    std::string(magic) + " checkpoint");
  }
  return meta;
}

void LoadCheckpointParams(const std::filesystem::path& dir,
                          std::string_view magic, ParameterSet& params) {
  std::ifstream is(dir / "params.bin", std::ios::binary);
  if (!is) throw DataError("missing parameter archive in " + dir.string());
  params.ReadArchive(is, magic);
}

}  // namespace percept::nn
