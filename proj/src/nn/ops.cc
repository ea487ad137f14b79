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

#include "nn/ops.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "common/error.h"

namespace percept::nn {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

enum class Broadcast { kSame, kScalar, kRow };

Broadcast ResolveBroadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.size() == 1) return Broadcast::kScalar;
  if (a.rank() == 2 && b.size() == static_cast<size_t>(a.dim(1)) &&
      (b.rank() == 1 || (b.rank() == 2 && b.dim(0) == 1))) {
    return Broadcast::kRow;
  }
  throw ShapeError(std::string(op) + ": cannot broadcast " +
                   ShapeString(b.shape()) + " onto " + ShapeString(a.shape()));
}

inline size_t BIndex(Broadcast mode, size_t i, size_t cols) {
  switch (mode) {
    case Broadcast::kSame:
      return i;
    case Broadcast::kScalar:
      return 0;
    case Broadcast::kRow:
      return i % cols;
  }
  return i;
}

size_t Cols(const Tensor& a) {
  return a.rank() == 2 ? static_cast<size_t>(a.dim(1)) : 1;
}

void RequireRank2(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw ShapeError(std::string(op) + " expects a matrix, got " +
                     ShapeString(a.shape()));
  }
}

// Elementwise unary op given f(x) and f'(x, y) where y = f(x).
template <typename F, typename DF>
Tensor Unary(const Tensor& a, F f, DF df) {
  std::vector<double> out(a.size());
  const auto x = a.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  return MakeResult(a.shape(), std::move(out), {a}, [df](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * df(in.value[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  const Broadcast mode = ResolveBroadcast(a, b, "Add");
  const size_t cols = Cols(a);
  std::vector<double> out(a.size());
  const auto x = a.data();
  const auto y = b.data();
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = x[i] + y[BIndex(mode, i, cols)];
  }
  return MakeResult(a.shape(), std::move(out), {a, b},
                    [mode, cols](Node& self) {
                      Node& na = *self.inputs[0];
                      Node& nb = *self.inputs[1];
                      if (na.requires_grad) {
                        auto& g = na.EnsureGrad();
                        for (size_t i = 0; i < g.size(); ++i) {
                          g[i] += self.grad[i];
                        }
                      }
                      if (nb.requires_grad) {
                        auto& g = nb.EnsureGrad();
                        for (size_t i = 0; i < self.grad.size(); ++i) {
                          g[BIndex(mode, i, cols)] += self.grad[i];
                        }
                      }
                    });
}

Tensor Sub(const Tensor& a, const Tensor& b) { return Add(a, Neg(b)); }

Tensor Mul(const Tensor& a, const Tensor& b) {
  const Broadcast mode = ResolveBroadcast(a, b, "Mul");
  const size_t cols = Cols(a);
  std::vector<double> out(a.size());
  const auto x = a.data();
  const auto y = b.data();
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = x[i] * y[BIndex(mode, i, cols)];
  }
  return MakeResult(
      a.shape(), std::move(out), {a, b}, [mode, cols](Node& self) {
        Node& na = *self.inputs[0];
        Node& nb = *self.inputs[1];
        if (na.requires_grad) {
          auto& g = na.EnsureGrad();
          for (size_t i = 0; i < g.size(); ++i) {
            g[i] += self.grad[i] * nb.value[BIndex(mode, i, cols)];
          }
        }
        if (nb.requires_grad) {
          auto& g = nb.EnsureGrad();
          for (size_t i = 0; i < self.grad.size(); ++i) {
            g[BIndex(mode, i, cols)] += self.grad[i] * na.value[i];
          }
        }
      });
}

Tensor Scale(const Tensor& a, double factor) {
  return Unary(
      a, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor AddScalar(const Tensor& a, double offset) {
  return Unary(
      a, [offset](double x) { return x + offset; },
      [](double, double) { return 1.0; });
}

Tensor Neg(const Tensor& a) { return Scale(a, -1.0); }

Tensor Relu(const Tensor& a) {
  return Unary(
      a, [](double x) { return x > 0.0 || std::isnan(x) ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor Tanh(const Tensor& a) {
  return Unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor Sigmoid(const Tensor& a) {
  return Unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor Exp(const Tensor& a) {
  return Unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor Log(const Tensor& a) {
  return Unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor Abs(const Tensor& a) {
  return Unary(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor Square(const Tensor& a) {
  return Unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Tensor Softplus(const Tensor& a) {
  return Unary(
      a,
      [](double x) {
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      },
      [](double x, double) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      });
}

Tensor Sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return MakeResult({1}, {total}, {a}, [](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor Mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("Mean of an empty tensor");
  return Scale(Sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank2(a, "MatMul");
  RequireRank2(b, "MatMul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("MatMul: " + ShapeString(a.shape()) + " x " +
                     ShapeString(b.shape()));
  }
  std::vector<double> out(static_cast<size_t>(m) * n);
  MatMap(out.data(), m, n).noalias() =
      ConstMatMap(a.data().data(), m, k) * ConstMatMap(b.data().data(), k, n);
  return MakeResult({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    ConstMatMap dy(self.grad.data(), m, n);
    if (na.requires_grad) {
      MatMap(na.EnsureGrad().data(), m, k).noalias() +=
          dy * ConstMatMap(nb.value.data(), k, n).transpose();
    }
    if (nb.requires_grad) {
      MatMap(nb.EnsureGrad().data(), k, n).noalias() +=
          ConstMatMap(na.value.data(), m, k).transpose() * dy;
    }
  });
}

Tensor Transpose(const Tensor& a) {
  RequireRank2(a, "Transpose");
  const int m = a.dim(0), n = a.dim(1);
  std::vector<double> out(a.size());
  MatMap(out.data(), n, m) = ConstMatMap(a.data().data(), m, n).transpose();
  return MakeResult({n, m}, std::move(out), {a}, [m, n](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    MatMap(in.EnsureGrad().data(), m, n) +=
        ConstMatMap(self.grad.data(), n, m).transpose();
  });
}

Tensor Reshape(const Tensor& a, const Shape& shape) {
  if (NumElements(shape) != a.size()) {
    throw ShapeError("Reshape " + ShapeString(a.shape()) + " -> " +
                     ShapeString(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return MakeResult(shape, std::move(out), {a}, [](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor SoftmaxRows(const Tensor& a, bool causal) {
  RequireRank2(a, "SoftmaxRows");
  const int m = a.dim(0), n = a.dim(1);
  std::vector<double> out(a.size(), 0.0);
  const auto x = a.data();
  for (int i = 0; i < m; ++i) {
    const int limit = causal ? std::min(n, i + 1) : n;
    const double* row = x.data() + static_cast<size_t>(i) * n;
    double* y = out.data() + static_cast<size_t>(i) * n;
    const double peak = *std::max_element(row, row + limit);
    double z = 0.0;
    for (int j = 0; j < limit; ++j) {
      y[j] = std::exp(row[j] - peak);
      z += y[j];
    }
    for (int j = 0; j < limit; ++j) y[j] /= z;
  }
  return MakeResult(a.shape(), std::move(out), {a}, [m, n](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (int i = 0; i < m; ++i) {
      const size_t off = static_cast<size_t>(i) * n;
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += self.grad[off + j] * self.value[off + j];
      for (int j = 0; j < n; ++j) {
        g[off + j] += self.value[off + j] * (self.grad[off + j] - dot);
      }
    }
  });
}

Tensor LogSoftmaxRows(const Tensor& a) {
  RequireRank2(a, "LogSoftmaxRows");
  const int m = a.dim(0), n = a.dim(1);
  std::vector<double> out(a.size());
  const auto x = a.data();
  for (int i = 0; i < m; ++i) {
    const double* row = x.data() + static_cast<size_t>(i) * n;
    const double peak = *std::max_element(row, row + n);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(row[j] - peak);
    const double lse = peak + std::log(z);
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] = row[j] - lse;
  }
  return MakeResult(a.shape(), std::move(out), {a}, [m, n](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (int i = 0; i < m; ++i) {
      const size_t off = static_cast<size_t>(i) * n;
      double total = 0.0;
      for (int j = 0; j < n; ++j) total += self.grad[off + j];
      for (int j = 0; j < n; ++j) {
        g[off + j] += self.grad[off + j] - std::exp(self.value[off + j]) * total;
      }
    }
  });
}

Tensor LayerNormRows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                     double eps) {
  RequireRank2(x, "LayerNormRows");
  const int m = x.dim(0), n = x.dim(1);
  if (gamma.size() != static_cast<size_t>(n) ||
      beta.size() != static_cast<size_t>(n)) {
    throw ShapeError("LayerNormRows: gain/bias size mismatch for " +
                     ShapeString(x.shape()));
  }
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(m);
  std::vector<double> out(x.size());
  const auto xv = x.data();
  const auto gv = gamma.data();
  const auto bv = beta.data();
  for (int i = 0; i < m; ++i) {
    const size_t off = static_cast<size_t>(i) * n;
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += xv[off + j];
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (xv[off + j] - mu) * (xv[off + j] - mu);
    var /= n;
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) {
      xhat[off + j] = (xv[off + j] - mu) * inv_std[i];
      out[off + j] = xhat[off + j] * gv[j] + bv[j];
    }
  }
  return MakeResult(
      x.shape(), std::move(out), {x, gamma, beta},
      [m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        Node& nx = *self.inputs[0];
        Node& ng = *self.inputs[1];
        Node& nb = *self.inputs[2];
        if (ng.requires_grad || nb.requires_grad) {
          auto& gg = ng.EnsureGrad();
          auto& gb = nb.EnsureGrad();
          for (int i = 0; i < m; ++i) {
            const size_t off = static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
              gg[j] += self.grad[off + j] * xhat[off + j];
              gb[j] += self.grad[off + j];
            }
          }
        }
        if (!nx.requires_grad) return;
        auto& gx = nx.EnsureGrad();
        std::vector<double> dxhat(n);
        for (int i = 0; i < m; ++i) {
          const size_t off = static_cast<size_t>(i) * n;
          double sum = 0.0, sum_x = 0.0;
          for (int j = 0; j < n; ++j) {
            dxhat[j] = self.grad[off + j] * ng.value[j];
            sum += dxhat[j];
            sum_x += dxhat[j] * xhat[off + j];
          }
          for (int j = 0; j < n; ++j) {
            gx[off + j] += inv_std[i] / n *
                           (n * dxhat[j] - sum - xhat[off + j] * sum_x);
          }
        }
      });
}

Tensor ConcatCols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("ConcatCols of nothing");
  const int m = parts[0].dim(0);
  std::vector<int> offsets;
  int n = 0;
  for (const auto& p : parts) {
    RequireRank2(p, "ConcatCols");
    if (p.dim(0) != m) throw ShapeError("ConcatCols: row count mismatch");
    offsets.push_back(n);
    n += p.dim(1);
  }
  std::vector<double> out(static_cast<size_t>(m) * n);
  for (size_t k = 0; k < parts.size(); ++k) {
    const int w = parts[k].dim(1);
    const auto src = parts[k].data();
    for (int i = 0; i < m; ++i) {
      std::copy_n(src.data() + static_cast<size_t>(i) * w, w,
                  out.data() + static_cast<size_t>(i) * n + offsets[k]);
    }
  }
  return MakeResult({m, n}, std::move(out), parts, [m, n, offsets](Node& self) {
    for (size_t k = 0; k < self.inputs.size(); ++k) {
      Node& in = *self.inputs[k];
      if (!in.requires_grad) continue;
      const int w = in.shape[1];
      auto& g = in.EnsureGrad();
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < w; ++j) {
          g[static_cast<size_t>(i) * w + j] +=
              self.grad[static_cast<size_t>(i) * n + offsets[k] + j];
        }
      }
    }
  });
}

Tensor ConcatRows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("ConcatRows of nothing");
  const int n = parts[0].dim(1);
  int m = 0;
  for (const auto& p : parts) {
    RequireRank2(p, "ConcatRows");
    if (p.dim(1) != n) throw ShapeError("ConcatRows: column count mismatch");
    m += p.dim(0);
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(m) * n);
  for (const auto& p : parts) {
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return MakeResult({m, n}, std::move(out), parts, [](Node& self) {
    size_t offset = 0;
    for (auto& input : self.inputs) {
      Node& in = *input;
      if (in.requires_grad) {
        auto& g = in.EnsureGrad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offset + i];
      }
      offset += in.value.size();
    }
  });
}

Tensor SliceRows(const Tensor& a, int begin, int end) {
  RequireRank2(a, "SliceRows");
  const int n = a.dim(1);
  if (begin < 0 || end > a.dim(0) || begin > end) {
    throw ShapeError("SliceRows [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") of " + ShapeString(a.shape()));
  }
  const auto src = a.data();
  std::vector<double> out(src.begin() + static_cast<size_t>(begin) * n,
                          src.begin() + static_cast<size_t>(end) * n);
  return MakeResult({end - begin, n}, std::move(out), {a},
                    [begin, n](Node& self) {
                      Node& in = *self.inputs[0];
                      if (!in.requires_grad) return;
                      auto& g = in.EnsureGrad();
                      const size_t off = static_cast<size_t>(begin) * n;
                      for (size_t i = 0; i < self.grad.size(); ++i) {
                        g[off + i] += self.grad[i];
                      }
                    });
}

Tensor SliceCols(const Tensor& a, int begin, int end) {
  RequireRank2(a, "SliceCols");
  const int m = a.dim(0), n = a.dim(1);
  if (begin < 0 || end > n || begin > end) {
    throw ShapeError("SliceCols [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") of " + ShapeString(a.shape()));
  }
  const int w = end - begin;
  std::vector<double> out(static_cast<size_t>(m) * w);
  const auto src = a.data();
  for (int i = 0; i < m; ++i) {
    std::copy_n(src.data() + static_cast<size_t>(i) * n + begin, w,
                out.data() + static_cast<size_t>(i) * w);
  }
  return MakeResult({m, w}, std::move(out), {a}, [m, n, w, begin](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < w; ++j) {
        g[static_cast<size_t>(i) * n + begin + j] +=
            self.grad[static_cast<size_t>(i) * w + j];
      }
    }
  });
}

Tensor GatherRows(const Tensor& a, const std::vector<int>& index) {
  RequireRank2(a, "GatherRows");
  const int rows = a.dim(0), n = a.dim(1);
  const int m = static_cast<int>(index.size());
  std::vector<double> out(static_cast<size_t>(m) * n);
  const auto src = a.data();
  for (int i = 0; i < m; ++i) {
    if (index[i] < 0 || index[i] >= rows) {
      throw ShapeError("GatherRows: index " + std::to_string(index[i]) +
                       " out of range for " + ShapeString(a.shape()));
    }
    std::copy_n(src.data() + static_cast<size_t>(index[i]) * n, n,
                out.data() + static_cast<size_t>(i) * n);
  }
  return MakeResult({m, n}, std::move(out), {a}, [index, n](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (size_t i = 0; i < index.size(); ++i) {
      for (int j = 0; j < n; ++j) {
        g[static_cast<size_t>(index[i]) * n + j] += self.grad[i * n + j];
      }
    }
  });
}

Tensor SelectPerRow(const Tensor& a, const std::vector<int>& index) {
  RequireRank2(a, "SelectPerRow");
  const int m = a.dim(0), n = a.dim(1);
  if (static_cast<int>(index.size()) != m) {
    throw ShapeError("SelectPerRow: index length mismatch");
  }
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) {
    if (index[i] < 0 || index[i] >= n) {
      throw ShapeError("SelectPerRow: column out of range");
    }
    out[i] = a.at(i, index[i]);
  }
  return MakeResult({m, 1}, std::move(out), {a}, [index, n](Node& self) {
    Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    auto& g = in.EnsureGrad();
    for (size_t i = 0; i < index.size(); ++i) {
      g[i * n + index[i]] += self.grad[i];
    }
  });
}

Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kt, int kf, int stride_f) {
  if (x.rank() != 3) {
    throw ShapeError("Conv2d expects [T, F, C], got " + ShapeString(x.shape()));
  }
  if (kt % 2 == 0 || stride_f < 1) {
    throw ShapeError("Conv2d: time kernel must be odd, stride positive");
  }
  const int t_len = x.dim(0), f_in = x.dim(1), c_in = x.dim(2);
  const int patch = kt * kf * c_in;
  if (weight.rank() != 2 || weight.dim(0) != patch) {
    throw ShapeError("Conv2d: weight " + ShapeString(weight.shape()) +
                     " does not match patch size " + std::to_string(patch));
  }
  const int c_out = weight.dim(1);
  if (bias.size() != static_cast<size_t>(c_out)) {
    throw ShapeError("Conv2d: bias size mismatch");
  }
  const int f_out = (f_in + stride_f - 1) / stride_f;
  const int pad_f = std::max((f_out - 1) * stride_f + kf - f_in, 0) / 2;
  const int pad_t = (kt - 1) / 2;
  const int rows = t_len * f_out;

  // im2col: one row per output position, one column per (dt, df, ci).
  std::vector<double> cols(static_cast<size_t>(rows) * patch, 0.0);
  const auto xv = x.data();
  for (int t = 0; t < t_len; ++t) {
    for (int fo = 0; fo < f_out; ++fo) {
      double* dst = cols.data() + (static_cast<size_t>(t) * f_out + fo) * patch;
      for (int dt = 0; dt < kt; ++dt) {
        const int ts = t + dt - pad_t;
        if (ts < 0 || ts >= t_len) continue;
        for (int df = 0; df < kf; ++df) {
          const int fs = fo * stride_f + df - pad_f;
          if (fs < 0 || fs >= f_in) continue;
          std::copy_n(xv.data() + (static_cast<size_t>(ts) * f_in + fs) * c_in,
                      c_in, dst + (dt * kf + df) * c_in);
        }
      }
    }
  }
  std::vector<double> out(static_cast<size_t>(rows) * c_out);
  MatMap out_map(out.data(), rows, c_out);
  out_map.noalias() = ConstMatMap(cols.data(), rows, patch) *
                      ConstMatMap(weight.data().data(), patch, c_out);
  out_map.rowwise() +=
      Eigen::Map<const Eigen::RowVectorXd>(bias.data().data(), c_out);

  return MakeResult(
      {t_len, f_out, c_out}, std::move(out), {x, weight, bias},
      [=, cols = std::move(cols)](Node& self) {
        Node& nx = *self.inputs[0];
        Node& nw = *self.inputs[1];
        Node& nb = *self.inputs[2];
        ConstMatMap dy(self.grad.data(), rows, c_out);
        ConstMatMap col_map(cols.data(), rows, patch);
        if (nw.requires_grad) {
          MatMap(nw.EnsureGrad().data(), patch, c_out).noalias() +=
              col_map.transpose() * dy;
        }
        if (nb.requires_grad) {
          Eigen::Map<Eigen::RowVectorXd>(nb.EnsureGrad().data(), c_out) +=
              dy.colwise().sum();
        }
        if (!nx.requires_grad) return;
        RowMat dcols = dy * ConstMatMap(nw.value.data(), patch, c_out).transpose();
        auto& gx = nx.EnsureGrad();
        for (int t = 0; t < t_len; ++t) {
          for (int fo = 0; fo < f_out; ++fo) {
            const double* src = dcols.data() +
                                (static_cast<size_t>(t) * f_out + fo) * patch;
            for (int dt = 0; dt < kt; ++dt) {
              const int ts = t + dt - pad_t;
              if (ts < 0 || ts >= t_len) continue;
              for (int df = 0; df < kf; ++df) {
                const int fs = fo * stride_f + df - pad_f;
                if (fs < 0 || fs >= f_in) continue;
                double* dst =
                    gx.data() + (static_cast<size_t>(ts) * f_in + fs) * c_in;
                const double* s = src + (dt * kf + df) * c_in;
                for (int c = 0; c < c_in; ++c) dst[c] += s[c];
              }
            }
          }
        }
      });
}

Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kernel) {
  RequireRank2(x, "Conv1d");
  const int t_len = x.dim(0), c_in = x.dim(1);
  Tensor y = Conv2d(Reshape(x, {t_len, 1, c_in}), weight, bias, kernel, 1, 1);
  return Reshape(y, {t_len, y.dim(2)});
}

Tensor Dropout(const Tensor& a, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw UsageError("dropout probability must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> mask(a.size());
  for (double& m : mask) m = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  return Mul(a, Tensor::FromVector(a.shape(), std::move(mask)));
}

}  // namespace percept::nn
