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

#ifndef PERCEPT_NN_OPTIM_H_
#define PERCEPT_NN_OPTIM_H_

#include <vector>

#include "nn/tensor.h"

namespace percept::nn {

class Optimizer {
 public:
  explicit Optimizer(std::vector<Tensor> params) : params_(std::move(params)) {}
  virtual ~Optimizer() = default;

  virtual void Step() = 0;
  void ZeroGrad();

  // Rescales all gradients so their joint L2 norm is at most max_norm.
  // Returns the norm before clipping.
  double ClipGradNorm(double max_norm);

 protected:
  std::vector<Tensor> params_;
};

class Sgd : public Optimizer {
 public:
  Sgd(std::vector<Tensor> params, double lr)
      : Optimizer(std::move(params)), lr_(lr) {}
  void Step() override;

 private:
  double lr_;
};

class Adam : public Optimizer {
 public:
  Adam(std::vector<Tensor> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);
  void Step() override;
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace percept::nn

#endif  // PERCEPT_NN_OPTIM_H_
