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

#include "polyglot/flow_vc/flow_model.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "polyglot/flow_vc/conditioning.hpp"
#include "polyglot/numerics/ops.hpp"
#include "polyglot/numerics/rng.hpp"

namespace polyglot::flow_vc {

namespace ops = numerics::ops;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

namespace {

constexpr double kBound = 5.0;

double softplus_scalar(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// sp(5) - sp(-5) evaluated exactly as the tape evaluates it, so r = 0 gives 0.
const double kScaleOffset = softplus_scalar(kBound) - softplus_scalar(-kBound);

std::vector<std::size_t> reversal(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = n - 1 - j;
  return p;
}

// Reversal between layers, plus one after the last when needed to keep the
// total count even: the net permutation is then the identity.
bool reverse_after(std::size_t k, std::size_t layers) {
  return k + 1 < layers || (layers - 1) % 2 == 1;
}

std::vector<Var> constants(Tape& tape, const numerics::ParameterSet& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (const auto& v : params.values()) out.push_back(tape.constant(v));
  return out;
}

struct CouplingOut {
  Var log_s;
  Var shift;
};

CouplingOut coupling_net(const FlowConfig& cfg, std::span<const Var> p, Var a, Var c) {
  const std::size_t half = cfg.channels / 2;
  Var in = a;
  if (cfg.cond_dim > 0) {
    const std::array<Var, 2> parts{a, c};
    in = ops::concat_cols(parts);
  }
  Var h = ops::tanh(ops::conv1d(in, p[0], p[1]));
  Var o = ops::conv1d(h, p[2], p[3]);
  return {bounded_log_scale(ops::slice_cols(o, 0, half)), ops::slice_cols(o, half, cfg.channels)};
}

}  // namespace

Var bounded_log_scale(Var raw) {
  Var hi = ops::softplus(ops::add_scalar(raw, kBound));
  Var lo = ops::softplus(ops::add_scalar(raw, -kBound));
  return ops::add_scalar(ops::sub(hi, lo), -kScaleOffset);
}

double bounded_log_scale(double raw) {
  return (softplus_scalar(raw + kBound) - softplus_scalar(raw - kBound)) - kScaleOffset;
}

Var prior_nll(Var z, Var logdet) {
  const double n = static_cast<double>(z.value().size());
  Var energy = ops::sub(ops::scale(ops::sum(ops::square(z)), 0.5), logdet);
  return ops::add_scalar(ops::scale(energy, 1.0 / n), 0.5 * std::log(2.0 * std::numbers::pi));
}

void FlowConfig::check() const {
  if (channels < 2 || channels % 2 != 0) throw VcError("flow channels must be even and at least 2");
  if (layers == 0) throw VcError("flow needs at least one layer");
  if (hidden == 0) throw VcError("flow hidden width must be positive");
  if (kernel % 2 == 0) throw VcError("flow kernel must be odd");
  if (!(init_std >= 0.0)) throw VcError("flow init_std must be non-negative");
}

nlohmann::json FlowConfig::to_json() const {
  return {{"channels", channels}, {"cond_dim", cond_dim}, {"layers", layers},
          {"hidden", hidden},     {"kernel", kernel},     {"init_std", init_std}};
}

FlowConfig FlowConfig::from_json(const nlohmann::json& j) {
  FlowConfig c;
  c.channels = j.value("channels", c.channels);
  c.cond_dim = j.value("cond_dim", c.cond_dim);
  c.layers = j.value("layers", c.layers);
  c.hidden = j.value("hidden", c.hidden);
  c.kernel = j.value("kernel", c.kernel);
  c.init_std = j.value("init_std", c.init_std);
  c.check();
  return c;
}

FlowModel::FlowModel(FlowConfig config, std::uint64_t seed) : config_(config) {
  config_.check();
  const std::size_t half = config_.channels / 2;
  const std::size_t cin = half + config_.cond_dim;
  const double std = config_.init_std / std::sqrt(static_cast<double>(config_.kernel * cin));
  numerics::Rng root(seed);
  for (std::size_t k = 0; k < config_.layers; ++k) {
    auto rng = root.split(k);
    std::vector<double> w1(config_.kernel * cin * config_.hidden);
    for (auto& v : w1) v = rng.normal(0.0, std);
    const std::string p = "flow.l" + std::to_string(k) + ".";
    params_.add(p + "w1", Tensor({config_.kernel, cin, config_.hidden}, std::move(w1)));
    params_.add(p + "b1", Tensor::zeros({config_.hidden}));
    params_.add(p + "w2", Tensor::zeros({config_.kernel, config_.hidden, config_.channels}));
    params_.add(p + "b2", Tensor::zeros({config_.channels}));
  }
}

void FlowModel::check_shapes(const Tensor& x, const Tensor& c) const {
  if (x.rank() != 2 || x.cols() != config_.channels) {
    throw VcError("flow input must be [frames, " + std::to_string(config_.channels) + "], got " +
                  numerics::shape_to_string(x.shape()));
  }
  if (x.rows() == 0) throw VcError("flow input has no frames");
  if (config_.cond_dim > 0 && (c.rank() != 2 || c.rows() != x.rows() || c.cols() != config_.cond_dim)) {
    throw VcError("conditioning must be [" + std::to_string(x.rows()) + ", " + std::to_string(config_.cond_dim) +
                  "], got " + numerics::shape_to_string(c.shape()));
  }
}

FlowVars FlowModel::forward(std::span<const Var> bound, Var x, Var c) const {
  if (bound.size() != params_.size()) throw VcError("flow parameter count mismatch");
  check_shapes(x.value(), config_.cond_dim > 0 ? c.value() : Tensor());
  const std::size_t half = config_.channels / 2;
  const auto perm = reversal(config_.channels);
  Var logdet{};
  for (std::size_t k = 0; k < config_.layers; ++k) {
    Var a = ops::slice_cols(x, 0, half);
    Var b = ops::slice_cols(x, half, config_.channels);
    auto net = coupling_net(config_, bound.subspan(k * kParamsPerLayer, kParamsPerLayer), a, c);
    Var b2 = ops::add(ops::mul(b, ops::exp(net.log_s)), net.shift);
    const std::array<Var, 2> parts{a, b2};
    x = ops::concat_cols(parts);
    if (reverse_after(k, config_.layers)) x = ops::permute_cols(x, perm);
    Var ld = ops::sum(net.log_s);
    logdet = k == 0 ? ld : ops::add(logdet, ld);
  }
  return {x, logdet};
}

Var FlowModel::nll(std::span<const Var> bound, Var x, Var c) const {
  auto out = forward(bound, x, c);
  return prior_nll(out.z, out.logdet);
}

FlowOutput FlowModel::forward(const Tensor& x, const Tensor& c) const {
  check_shapes(x, c);
  Tape tape;
  const auto bound = constants(tape, params_);
  const std::size_t half = config_.channels / 2;
  const auto perm = reversal(config_.channels);
  Var xv = tape.constant(x);
  Var cv = tape.constant(c);
  FlowOutput out;
  for (std::size_t k = 0; k < config_.layers; ++k) {
    Var a = ops::slice_cols(xv, 0, half);
    Var b = ops::slice_cols(xv, half, config_.channels);
    auto net = coupling_net(config_, std::span(bound).subspan(k * kParamsPerLayer, kParamsPerLayer), a, cv);
    const std::array<Var, 2> parts{a, ops::add(ops::mul(b, ops::exp(net.log_s)), net.shift)};
    xv = ops::concat_cols(parts);
    if (reverse_after(k, config_.layers)) xv = ops::permute_cols(xv, perm);
    double ld = 0.0;
    for (double v : net.log_s.value().data()) ld += v;
    out.layer_logdets.push_back(ld);
    out.logdet += ld;
  }
  out.z = xv.value();
  return out;
}

Tensor FlowModel::inverse(const Tensor& z, const Tensor& c) const {
  check_shapes(z, c);
  Tape tape;
  const auto bound = constants(tape, params_);
  const std::size_t half = config_.channels / 2;
  const auto perm = reversal(config_.channels);
  Var y = tape.constant(z);
  Var cv = tape.constant(c);
  for (std::size_t k = config_.layers; k-- > 0;) {
    if (reverse_after(k, config_.layers)) y = ops::permute_cols(y, perm);
    Var a = ops::slice_cols(y, 0, half);
    Var b2 = ops::slice_cols(y, half, config_.channels);
    auto net = coupling_net(config_, std::span(bound).subspan(k * kParamsPerLayer, kParamsPerLayer), a, cv);
    Var b = ops::mul(ops::sub(b2, net.shift), ops::exp(ops::scale(net.log_s, -1.0)));
    const std::array<Var, 2> parts{a, b};
    y = ops::concat_cols(parts);
  }
  return y.value();
}

double FlowModel::nll(const Tensor& x, const Tensor& c) const {
  auto out = forward(x, c);
  double sq = 0.0;
  for (double v : out.z.data()) sq += v * v;
  const double n = static_cast<double>(out.z.size());
  return (0.5 * sq - out.logdet) / n + 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace polyglot::flow_vc
