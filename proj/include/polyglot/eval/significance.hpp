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
#include <utility>
#include <vector>

namespace polyglot::eval {

/// Largest effective sample size for which the null distribution is enumerated.
inline constexpr std::size_t kExactWilcoxonMax = 12;

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;       // sum of ranks of positive differences
  std::size_t n_effective = 0;  // pairs with a non-zero difference
  bool exact = false;
  bool degenerate = false;  // every difference was zero
};

/// Two-sided signed-rank test on paired scores. Zero differences are dropped,
/// ties get average ranks. Exact for n <= 12 under the observed tie pattern,
/// otherwise normal with tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs);

struct HolmDecision {
  double adjusted = 1.0;
  bool reject = false;
};

/// Step-down Holm correction; results are in input order.
std::vector<HolmDecision> holm_bonferroni(const std::vector<double>& p_values, double alpha = 0.05);

}  // namespace polyglot::eval
