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

#include <cstdint>
#include <span>
#include <vector>

#include "polyglot/numerics/tape.hpp"

namespace polyglot::numerics {

struct OptimizerState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// Bias-corrected Adam. Moments are created lazily on the first step and
/// must keep the parameters' shapes afterwards.
std::vector<Tensor> adam_step(OptimizerState& state, std::span<const Tensor> params, std::span<const Tensor> grads);
void adam_step(OptimizerState& state, ParameterSet& params, std::span<const Tensor> grads);

}  // namespace polyglot::numerics
