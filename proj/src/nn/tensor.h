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

#ifndef PERCEPT_NN_TENSOR_H_
#define PERCEPT_NN_TENSOR_H_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace percept::nn {

using Shape = std::vector<int>;

std::string ShapeString(const Shape& shape);
size_t NumElements(const Shape& shape);

// A node of the reverse-mode autodiff graph. Values are float64 and stored
// row-major. `backward` reads this node's grad and accumulates into the grads
// of `inputs`.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<double>& EnsureGrad();
};

// Value-semantic handle onto a graph node. Copies share the node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor Zeros(const Shape& shape);
  static Tensor Full(const Shape& shape, double value);
  static Tensor FromVector(const Shape& shape, std::vector<double> values);
  static Tensor Scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const;
  size_t size() const { return node_->value.size(); }

  std::span<const double> data() const { return node_->value; }
  std::span<double> mutable_data() { return node_->value; }
  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->EnsureGrad(); }

  double item() const;
  double at(int row, int col) const;

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool flag);
  void ZeroGrad();

  // Runs reverse accumulation from this scalar tensor (d self / d self = 1).
  void Backward() const;

  // Fresh leaf holding a copy of the value; no history.
  Tensor Detach() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

// Builds an op result. History is recorded only when grad mode is on and at
// least one input requires grad.
Tensor MakeResult(Shape shape, std::vector<double> value,
                  std::vector<Tensor> inputs,
                  std::function<void(Node&)> backward);

}  // namespace percept::nn

#endif  // PERCEPT_NN_TENSOR_H_
