// Copyright 2026 The Polyglot Distill Authors
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

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyglot/numerics/tensor.hpp"

namespace polyglot::numerics {

class Tape;
class Gradients;
Gradients backward(const Tape& tape, struct Var loss);

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Accumulates gradients for tape nodes during the backward sweep.
class GradSink {
 public:
  explicit GradSink(const Tape& tape);

  /// Zero-initialised on first access; sized to the node's value.
  std::vector<double>& buffer(std::size_t node);
  bool wants(std::size_t node) const;
  bool has(std::size_t node) const { return !grads_[node].empty(); }
  std::vector<double> take(std::size_t node) { return std::move(grads_[node]); }

 private:
  const Tape& tape_;
  std::vector<std::vector<double>> grads_;
};

/// Ordered record of primitive ops. Nodes are appended in evaluation order,
/// so every node's inputs precede it and reverse order is a valid
/// topological order for the backward sweep.
class Tape {
 public:
  using BackwardFn = std::function<void(const Tape& tape, const std::vector<double>& grad_out, GradSink& sink)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  /// Appends an op output. `inputs` are node ids; `backward` may be empty
  /// when no input requires a gradient.
  Var record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  bool any_requires_grad(std::span<const std::size_t> ids) const;
  const std::string& op(std::size_t id) const { return nodes_.at(id).op; }
  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Gradients;
  friend Gradients backward(const Tape& tape, Var loss);

  struct Node {
    std::string op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

/// Result of a backward sweep. Unreached nodes report zero gradients.
class Gradients {
 public:
  Gradients() = default;
  Tensor wrt(Var v) const;
  std::size_t visited() const { return visited_; }

 private:
  friend Gradients backward(const Tape& tape, Var loss);
  const Tape* tape_ = nullptr;
  std::vector<std::vector<double>> grads_;
  std::size_t visited_ = 0;
};

/// Reverse-mode sweep from a scalar loss node.
Gradients backward(const Tape& tape, Var loss);

/// Named trainable tensors.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor init);
  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const Tensor& value(std::size_t i) const { return values_.at(i); }
  void set(std::size_t i, Tensor v);
  std::optional<std::size_t> find(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  std::size_t scalar_count() const;
  const std::vector<Tensor>& values() const { return values_; }
  void assign(std::vector<Tensor> values);

  /// Places every parameter on the tape as a variable, in index order.
  std::vector<Var> bind(Tape& tape) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

std::vector<Tensor> parameter_gradients(const Gradients& grads, std::span<const Var> bound);

}  // namespace polyglot::numerics
