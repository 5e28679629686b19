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

#include "polyglot/numerics/tape.hpp"

#include <algorithm>

namespace polyglot::numerics {

const Tensor& Var::value() const {
  if (tape == nullptr) throw NumericError("unbound Var");
  return tape->value(id);
}

GradSink::GradSink(const Tape& tape) : tape_(tape), grads_(tape.size()) {}

std::vector<double>& GradSink::buffer(std::size_t node) {
  auto& g = grads_.at(node);
  if (g.empty()) g.assign(tape_.value(node).size(), 0.0);
  return g;
}

bool GradSink::wants(std::size_t node) const { return tape_.requires_grad(node); }

Var Tape::constant(Tensor value) {
  value.require_finite("constant");
  nodes_.push_back(Node{"const", std::move(value), {}, {}, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  value.require_finite("variable");
  nodes_.push_back(Node{"var", std::move(value), {}, {}, true});
  return Var{this, nodes_.size() - 1};
}

bool Tape::any_requires_grad(std::span<const std::size_t> ids) const {
  return std::any_of(ids.begin(), ids.end(), [&](std::size_t i) { return nodes_.at(i).requires_grad; });
}

Var Tape::record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  value.require_finite(op);
  for (auto i : inputs) {
    if (i >= nodes_.size()) throw NumericError(std::string(op) + ": input node does not exist");
  }
  const bool rg = any_requires_grad(inputs) && static_cast<bool>(backward);
  nodes_.push_back(Node{op, std::move(value), std::move(inputs), rg ? std::move(backward) : BackwardFn{}, rg});
  return Var{this, nodes_.size() - 1};
}

Gradients backward(const Tape& tape, Var loss) {
  if (loss.tape != &tape) throw NumericError("loss node belongs to a different tape");
  const Tensor& lv = tape.value(loss.id);
  if (lv.size() != 1) throw NumericError("backward requires a scalar loss, got shape " + shape_to_string(lv.shape()));

  Gradients out;
  out.tape_ = &tape;
  GradSink sink(tape);
  if (tape.requires_grad(loss.id)) {
    sink.buffer(loss.id)[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      const auto& node = tape.nodes_[i];
      if (!node.requires_grad || !sink.has(i)) continue;
      ++out.visited_;
      if (node.backward) {
        auto g = sink.take(i);
        node.backward(tape, g, sink);
        // keep the gradient readable afterwards
        sink.buffer(i) = std::move(g);
      }
    }
  }
  out.grads_.resize(tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i) {
    if (sink.has(i)) out.grads_[i] = sink.take(i);
  }
  return out;
}

Tensor Gradients::wrt(Var v) const {
  if (tape_ == nullptr || v.tape != tape_) throw NumericError("gradient requested for a foreign Var");
  const auto& shape = tape_->value(v.id).shape();
  if (v.id >= grads_.size() || grads_[v.id].empty()) return Tensor(shape);
  return Tensor(shape, grads_[v.id]);
}

std::size_t ParameterSet::add(std::string name, Tensor init) {
  if (find(name)) throw NumericError("duplicate parameter name: " + name);
  init.require_finite("parameter init");
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return values_.size() - 1;
}

void ParameterSet::set(std::size_t i, Tensor v) {
  if (v.shape() != values_.at(i).shape()) {
    throw NumericError("parameter " + names_[i] + " shape change " + shape_to_string(values_[i].shape()) + " -> " +
                       shape_to_string(v.shape()));
  }
  values_[i] = std::move(v);
}

void ParameterSet::assign(std::vector<Tensor> values) {
  if (values.size() != values_.size()) throw NumericError("parameter count mismatch on assign");
  for (std::size_t i = 0; i < values.size(); ++i) set(i, std::move(values[i]));
}

std::optional<std::size_t> ParameterSet::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const Tensor& ParameterSet::get(const std::string& name) const {
  auto i = find(name);
  if (!i) throw NumericError("unknown parameter: " + name);
  return values_[*i];
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

std::vector<Var> ParameterSet::bind(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(values_.size());
  for (const auto& v : values_) vars.push_back(tape.variable(v));
  return vars;
}

std::vector<Tensor> parameter_gradients(const Gradients& grads, std::span<const Var> bound) {
  std::vector<Tensor> out;
  out.reserve(bound.size());
  for (const auto& v : bound) out.push_back(grads.wrt(v));
  return out;
}

}  // namespace polyglot::numerics
