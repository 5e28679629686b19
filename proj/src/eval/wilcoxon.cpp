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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyglot/eval/mushra.hpp"
#include "polyglot/eval/significance.hpp"

namespace polyglot::eval {

namespace {

// Average ranks of |d|, doubled so ties stay integral.
std::vector<long> doubled_ranks(const std::vector<double>& mag) {
  std::vector<std::size_t> idx(mag.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mag[a] < mag[b]; });
  std::vector<long> r(mag.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && mag[idx[j + 1]] == mag[idx[i]]) ++j;
    const long twice = static_cast<long>(i + 1 + j + 1);  // (first + last) rank
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = twice;
    i = j + 1;
  }
  return r;
}

double tie_term(const std::vector<double>& mag) {
  std::vector<double> s = mag;
  std::sort(s.begin(), s.end());
  double t = 0.0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    const double n = static_cast<double>(j - i);
    t += n * n * n - n;
    i = j;
  }
  return t;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw EvalError("signed-rank test needs at least one pair");
  std::vector<double> mag;
  std::vector<bool> pos;
  for (const auto& [a, b] : pairs) {
    const double d = a - b;
    if (!std::isfinite(d)) throw EvalError("non-finite score in signed-rank test");
    if (d == 0.0) continue;
    mag.push_back(std::abs(d));
    pos.push_back(d > 0.0);
  }
  WilcoxonResult res;
  res.n_effective = mag.size();
  if (mag.empty()) {
    res.degenerate = true;
    return res;
  }
  const auto r2 = doubled_ranks(mag);
  long w2 = 0;
  for (std::size_t i = 0; i < r2.size(); ++i)
    if (pos[i]) w2 += r2[i];
  res.w_plus = static_cast<double>(w2) / 2.0;
  const double n = static_cast<double>(mag.size());

  if (mag.size() <= kExactWilcoxonMax) {
    // Count subsets by doubled rank sum.
    const long total = std::accumulate(r2.begin(), r2.end(), 0L);
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (long r : r2) {
      for (long k = reach; k >= 0; --k) ways[static_cast<std::size_t>(k + r)] += ways[static_cast<std::size_t>(k)];
      reach += r;
    }
    // total == 2 * mean of the doubled statistic
    const long dev = std::abs(2 * w2 - total);
    double tail = 0.0;
    for (long k = 0; k <= total; ++k)
      if (std::abs(2 * k - total) >= dev) tail += ways[static_cast<std::size_t>(k)];
    res.p_value = std::min(1.0, tail / std::ldexp(1.0, static_cast<int>(mag.size())));
    res.exact = true;
    return res;
  }

  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(mag) / 48.0;
  if (var <= 0.0) {
    res.degenerate = true;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.w_plus - mean) - 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

std::vector<HolmDecision> holm_bonferroni(const std::vector<double>& p, double alpha) {
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw EvalError("p-value " + std::to_string(x) + " is outside [0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw EvalError("alpha must be in (0, 1)");
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<HolmDecision> out(m);
  double running = 0.0;
  bool rejecting = true;
  for (std::size_t j = 0; j < m; ++j) {
    running = std::max(running, std::min(1.0, static_cast<double>(m - j) * p[order[j]]));
    rejecting = rejecting && running <= alpha;
    out[order[j]] = {running, rejecting};
  }
  return out;
}

}  // namespace polyglot::eval
