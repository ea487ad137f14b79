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

#ifndef PERCEPT_NN_OPS_H_
#define PERCEPT_NN_OPS_H_

#include <random>
#include <vector>

#include "nn/tensor.h"

// Differentiable tensor operations. Matrices are rank-2 row-major tensors;
// sequence tensors are laid out time-major ([T, C] or [T, F, C]).
namespace percept::nn {

// Elementwise binary ops. `b` may have the same shape as `a`, be a single
// element, or (for rank-2 `a` of shape [m, n]) hold n elements broadcast
// over rows.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);

Tensor Scale(const Tensor& a, double factor);
Tensor AddScalar(const Tensor& a, double offset);
Tensor Neg(const Tensor& a);

Tensor Relu(const Tensor& a);
Tensor Tanh(const Tensor& a);
Tensor Sigmoid(const Tensor& a);
Tensor Exp(const Tensor& a);
Tensor Log(const Tensor& a);
Tensor Abs(const Tensor& a);
Tensor Square(const Tensor& a);
// log(1 + exp(a)), computed stably.
Tensor Softplus(const Tensor& a);

Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);

Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);
Tensor Reshape(const Tensor& a, const Shape& shape);

// Row-wise softmax. With `causal`, entry (i, j) for j > i is excluded.
Tensor SoftmaxRows(const Tensor& a, bool causal = false);
Tensor LogSoftmaxRows(const Tensor& a);
Tensor LayerNormRows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                     double eps = 1e-5);

Tensor ConcatCols(const std::vector<Tensor>& parts);
Tensor ConcatRows(const std::vector<Tensor>& parts);
Tensor SliceRows(const Tensor& a, int begin, int end);
Tensor SliceCols(const Tensor& a, int begin, int end);
// out[i] = a[index[i]] (rows); repeated indices accumulate on backward.
Tensor GatherRows(const Tensor& a, const std::vector<int>& index);
// out[i, 0] = a[i, index[i]].
Tensor SelectPerRow(const Tensor& a, const std::vector<int>& index);

// 2-D convolution over a [T, F, Cin] input with weights laid out as
// [kt * kf * Cin, Cout]. Time uses stride 1 and symmetric padding (kt odd);
// frequency uses `stride_f` with TensorFlow-style "same" padding, so the
// output is [T, ceil(F / stride_f), Cout].
Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kt, int kf, int stride_f);

// 1-D convolution over time: [T, Cin] -> [T, Cout], odd kernel, same padding.
Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kernel);

// Inverted dropout; identity when p == 0.
Tensor Dropout(const Tensor& a, double p, std::mt19937_64& rng);

}  // namespace percept::nn

#endif  // PERCEPT_NN_OPS_H_
