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
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "polyglot/dsp/features.hpp"
#include "polyglot/numerics/tape.hpp"

namespace polyglot::flow_vc {

struct FlowConfig {
  std::size_t channels = dsp::kMelBins;  // must be even
  std::size_t cond_dim = 0;
  std::size_t layers = 8;
  std::size_t hidden = 64;
  std::size_t kernel = 3;  // odd
  double init_std = 1.0;   // first-conv weights ~ N(0, init_std^2 / fan_in)

  void check() const;
  nlohmann::json to_json() const;
  static FlowConfig from_json(const nlohmann::json& j);
  bool operator==(const FlowConfig&) const = default;
};

struct FlowOutput {
  numerics::Tensor z;
  double logdet = 0.0;
  std::vector<double> layer_logdets;
};

struct FlowVars {
  numerics::Var z;
  numerics::Var logdet;
};

/// Stack of conditional affine coupling layers with a channel reversal
/// between consecutive layers and a fixed N(0, 1) prior.
///
/// Layer k splits x into halves (a, b) and computes
///   h = tanh(conv(concat(a, c))), [r, t] = conv(h),
///   log_s = softplus(r + 5) - softplus(r - 5) - 5,
///   b' = b * exp(log_s) + t.
/// log_s lies in (-5, 5) and is exactly 0 where r = 0.
class FlowModel {
 public:
  static constexpr std::size_t kParamsPerLayer = 4;

  FlowModel() = default;
  /// Output convolutions start at zero, so the fresh model is the identity.
  FlowModel(FlowConfig config, std::uint64_t seed);

  const FlowConfig& config() const { return config_; }
  numerics::ParameterSet& params() { return params_; }
  const numerics::ParameterSet& params() const { return params_; }

  /// x is [frames, channels], c is [frames, cond_dim].
  FlowOutput forward(const numerics::Tensor& x, const numerics::Tensor& c) const;
  numerics::Tensor inverse(const numerics::Tensor& z, const numerics::Tensor& c) const;
  /// Negative log-likelihood per frame and channel.
  double nll(const numerics::Tensor& x, const numerics::Tensor& c) const;

  /// Differentiable versions; `bound` holds the flow parameters in index order.
  FlowVars forward(std::span<const numerics::Var> bound, numerics::Var x, numerics::Var c) const;
  numerics::Var nll(std::span<const numerics::Var> bound, numerics::Var x, numerics::Var c) const;

 private:
  void check_shapes(const numerics::Tensor& x, const numerics::Tensor& c) const;

  FlowConfig config_;
  numerics::ParameterSet params_;
};

/// softplus(r + 5) - softplus(r - 5) - 5, elementwise.
numerics::Var bounded_log_scale(numerics::Var raw);
double bounded_log_scale(double raw);

/// Per-element NLL under the prior for a flow output: (sum(z^2)/2 - logdet)/n + ln(2 pi)/2.
numerics::Var prior_nll(numerics::Var z, numerics::Var logdet);

}  // namespace polyglot::flow_vc
