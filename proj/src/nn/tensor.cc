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

#include "nn/tensor.h"

#include <sstream>
#include <unordered_set>
#include <utility>

#include "common/error.h"

namespace percept::nn {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

size_t NumElements(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in " + ShapeString(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

std::vector<double>& Node::EnsureGrad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::Zeros(const Shape& shape) { return Full(shape, 0.0); }

Tensor Tensor::Full(const Shape& shape, double value) {
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value.assign(NumElements(shape), value);
  return Tensor(std::move(node));
}

Tensor Tensor::FromVector(const Shape& shape, std::vector<double> values) {
  if (values.size() != NumElements(shape)) {
    throw ShapeError("FromVector: " + std::to_string(values.size()) +
                     " values for shape " + ShapeString(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::Scalar(double value) { return Full({1}, value); }

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw ShapeError("axis out of range for " + ShapeString(shape()));
  }
  return node_->shape[axis];
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() on tensor of shape " + ShapeString(shape()));
  }
  return node_->value[0];
}

double Tensor::at(int row, int col) const {
  return node_->value[static_cast<size_t>(row) * dim(1) + col];
}

Tensor& Tensor::set_requires_grad(bool flag) {
  node_->requires_grad = flag;
  return *this;
}

void Tensor::ZeroGrad() { node_->grad.clear(); }

void Tensor::Backward() const {
  if (size() != 1) {
    throw ShapeError("Backward() needs a scalar, got " +
                     ShapeString(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->EnsureGrad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

Tensor Tensor::Detach() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->value = node_->value;
  return Tensor(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool GradEnabled() { return g_grad_enabled; }

Tensor MakeResult(Shape shape, std::vector<double> value,
                  std::vector<Tensor> inputs,
                  std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (GradEnabled()) {
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (auto& in : inputs) node->inputs.push_back(in.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

}  // namespace percept::nn
