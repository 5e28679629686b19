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
#include <span>
#include <vector>

#include "polyglot/numerics/tape.hpp"

namespace polyglot::numerics {

/// Builds a scalar loss on `tape` from the bound parameters.
using LossBuilder = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckReport {
  std::vector<double> max_relative_error;  // one entry per parameter tensor
  double worst = 0.0;
  std::size_t coordinates_checked = 0;
};

/// Central-difference check of the tape gradient. Relative error per
/// coordinate is |a - n| / max(|a|, |n|, 1e-8). `max_coords` limits the
/// number of coordinates probed per tensor (0 = all), chosen with a fixed
/// stride so the result is deterministic.
GradCheckReport grad_check(const LossBuilder& loss, std::span<const Tensor> params, double eps = 1e-5,
                           std::size_t max_coords = 0);

}  // namespace polyglot::numerics
