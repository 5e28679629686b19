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

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace polyglot::testing {

// Gap closed relative to the baseline's distance from the upper anchor;
// algebraically the same quantity as the normalized-gap form.
inline double ctg_direct(double s, double v, double u) { return (v - s) / (u - s) * 100.0; }

// Two-sided signed-rank p by enumerating all 2^n sign flips, with average
// ranks computed naively. Zero differences are dropped first.
inline double brute_force_signed_rank_p(const std::vector<double>& d) {
  std::vector<double> mag;
  std::vector<int> sign;
  for (double x : d)
    if (x != 0.0) {
      mag.push_back(std::abs(x));
      sign.push_back(x > 0 ? 1 : -1);
    }
  const std::size_t n = mag.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (double y : mag) {
      below += y < mag[i];
      equal += y == mag[i];
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double observed = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (sign[i] > 0) observed += rank[i];
  }
  const double dev = std::abs(observed - total / 2.0);
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += rank[i];
    hits += std::abs(w - total / 2.0) >= dev - 1e-9;
  }
  return static_cast<double>(hits) / std::ldexp(1.0, static_cast<int>(n));
}

// Determinant by Gaussian elimination with partial pivoting.
inline double log_abs_det(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double acc = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    acc += std::log(std::abs(a[c][c]));
    for (std::size_t r = c + 1; r < n; ++r) {
      const double k = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= k * a[c][j];
    }
  }
  return acc;
}

// Central-difference Jacobian of f at x.
inline std::vector<std::vector<double>> numeric_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& f, const std::vector<double>& x, double h) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> j(n, std::vector<double>(n));
  for (std::size_t col = 0; col < n; ++col) {
    auto up = x, dn = x;
    up[col] += h;
    dn[col] -= h;
    const auto zu = f(up);
    const auto zd = f(dn);
    for (std::size_t row = 0; row < n; ++row) j[row][col] = (zu[row] - zd[row]) / (2.0 * h);
  }
  return j;
}

}  // namespace polyglot::testing
