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

#include "polyglot/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace polyglot::numerics {

namespace {

double evaluate(const LossBuilder& loss, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.variable(p));
  const double v = loss(tape, vars).value().item();
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, std::span<const Tensor> params, double eps,
                           std::size_t max_coords) {
  if (!(eps > 0.0 && eps <= 1e-2)) throw NumericError("grad_check: eps must lie in (0, 1e-2]");

  std::vector<Tensor> base(params.begin(), params.end());
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& p : base) vars.push_back(tape.variable(p));
    Var l = loss(tape, vars);
    if (!std::isfinite(l.value().item())) throw NumericError("grad_check: loss is not finite");
    analytic = parameter_gradients(backward(tape, l), vars);
  }

  GradCheckReport report;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const std::size_t n = base[i].size();
    const std::size_t stride = (max_coords == 0 || n <= max_coords) ? 1 : (n + max_coords - 1) / max_coords;
    double worst = 0.0;
    for (std::size_t j = 0; j < n; j += stride) {
      std::vector<double> plus(base[i].values()), minus(base[i].values());
      plus[j] += eps;
      minus[j] -= eps;
      auto perturbed = base;
      perturbed[i] = Tensor(base[i].shape(), std::move(plus));
      const double fp = evaluate(loss, perturbed);
      perturbed[i] = Tensor(base[i].shape(), std::move(minus));
      const double fm = evaluate(loss, perturbed);
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[i][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
      ++report.coordinates_checked;
    }
    report.max_relative_error.push_back(worst);
    report.worst = std::max(report.worst, worst);
  }
  return report;
}

}  // namespace polyglot::numerics
