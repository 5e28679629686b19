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

#include "polyglot/numerics/adam.hpp"

#include <cmath>
#include <string>

namespace polyglot::numerics {

std::vector<Tensor> adam_step(OptimizerState& state, std::span<const Tensor> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw NumericError("adam_step: " + std::to_string(params.size()) + " params but " + std::to_string(grads.size()) +
                       " gradients");
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) throw NumericError("adam_step: optimizer state tracks other params");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() || state.first_moment[i].size() != params[i].size()) {
      throw NumericError("adam_step: shape mismatch for parameter " + std::to_string(i) + " " +
                         shape_to_string(params[i].shape()) + " vs gradient " + shape_to_string(grads[i].shape()));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);

  std::vector<Tensor> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads[i].values();
    std::vector<double> p(params[i].values());
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
    Tensor updated(params[i].shape(), std::move(p));
    updated.require_finite("adam_step");
    out.push_back(std::move(updated));
  }
  return out;
}

void adam_step(OptimizerState& state, ParameterSet& params, std::span<const Tensor> grads) {
  params.assign(adam_step(state, params.values(), grads));
}

}  // namespace polyglot::numerics
