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

#include "polyglot/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

namespace polyglot::numerics::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw NumericError("op on unbound Var");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw NumericError("op mixes Vars from different tapes");
  return tape_of(a);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw NumericError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                       shape_to_string(b.shape()));
  }
}

void require_rank2(const char* op, const Tensor& a) {
  if (a.rank() != 2) throw NumericError(std::string(op) + ": expected rank-2 input, got " + shape_to_string(a.shape()));
}

template <typename F, typename DF>
Var unary(const char* name, Var a, F f, DF df) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id;
  return t.record(name, Tensor(x.shape(), std::move(y)), {ia},
                  [ia, df](const Tape& tp, const std::vector<double>& g, GradSink& sink) {
                    const Tensor& xv = tp.value(ia);
                    auto& ga = sink.buffer(ia);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(xv[i]);
                  });
}

double softplus_value(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("add", a.value(), b.value());
  const auto& x = a.value().values();
  const auto& y = b.value().values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  const std::size_t ia = a.id, ib = b.id;
  return t.record("add", Tensor(a.shape(), std::move(out)), {ia, ib},
                  [ia, ib](const Tape&, const std::vector<double>& g, GradSink& sink) {
                    for (auto id : {ia, ib}) {
                      if (!sink.wants(id)) continue;
                      auto& gb = sink.buffer(id);
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                    }
                  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("sub", a.value(), b.value());
  const auto& x = a.value().values();
  const auto& y = b.value().values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  const std::size_t ia = a.id, ib = b.id;
  return t.record("sub", Tensor(a.shape(), std::move(out)), {ia, ib},
                  [ia, ib](const Tape&, const std::vector<double>& g, GradSink& sink) {
                    if (sink.wants(ia)) {
                      auto& ga = sink.buffer(ia);
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    }
                    if (sink.wants(ib)) {
                      auto& gb = sink.buffer(ib);
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                    }
                  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("mul", a.value(), b.value());
  const auto& x = a.value().values();
  const auto& y = b.value().values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  const std::size_t ia = a.id, ib = b.id;
  return t.record("mul", Tensor(a.shape(), std::move(out)), {ia, ib},
                  [ia, ib](const Tape& tp, const std::vector<double>& g, GradSink& sink) {
                    const auto& xv = tp.value(ia).values();
                    const auto& yv = tp.value(ib).values();
                    if (sink.wants(ia)) {
                      auto& ga = sink.buffer(ia);
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * yv[i];
                    }
                    if (sink.wants(ib)) {
                      auto& gb = sink.buffer(ib);
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * xv[i];
                    }
                  });
}

Var add_scalar(Var a, double k) {
  return unary("add_scalar", a, [k](double x) { return x + k; }, [](double) { return 1.0; });
}

Var scale(Var a, double k) {
  return unary("scale", a, [k](double x) { return x * k; }, [k](double) { return k; });
}

Var square(Var a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

// Subgradient 0 at the kink.
Var abs(Var a) {
  return unary("abs", a, [](double x) { return std::abs(x); },
               [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var tanh(Var a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double x) {
                 const double y = std::tanh(x);
                 return 1.0 - y * y;
               });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(Var a) {
  return unary("log", a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var softplus(Var a) { return unary("softplus", a, softplus_value, sigmoid); }

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id;
  return t.record("sum", Tensor::scalar(s), {ia}, [ia](const Tape&, const std::vector<double>& g, GradSink& sink) {
    auto& ga = sink.buffer(ia);
    for (auto& v : ga) v += g[0];
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var add_row(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& x = a.value();
  const Tensor& bias = b.value();
  require_rank2("add_row", x);
  const std::size_t r = x.rows(), c = x.cols();
  if (bias.size() != c) {
    throw NumericError("add_row: bias length " + std::to_string(bias.size()) + " vs " + std::to_string(c) + " cols");
  }
  std::vector<double> out(x.values());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bias[j];
  const std::size_t ia = a.id, ib = b.id;
  return t.record("add_row", Tensor(x.shape(), std::move(out)), {ia, ib},
                  [ia, ib, r, c](const Tape&, const std::vector<double>& g, GradSink& sink) {
                    if (sink.wants(ia)) {
                      auto& ga = sink.buffer(ia);
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    }
                    if (sink.wants(ib)) {
                      auto& gb = sink.buffer(ib);
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
                    }
                  });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_rank2("matmul", x);
  require_rank2("matmul", y);
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  if (y.rows() != k) {
    throw NumericError("matmul: inner dimensions differ " + shape_to_string(x.shape()) + " x " +
                       shape_to_string(y.shape()));
  }
  std::vector<double> out(m * n);
  Map(out.data(), m, n).noalias() = MapC(x.data().data(), m, k) * MapC(y.data().data(), k, n);
  const std::size_t ia = a.id, ib = b.id;
  return t.record("matmul", Tensor({m, n}, std::move(out)), {ia, ib},
                  [ia, ib, m, k, n](const Tape& tp, const std::vector<double>& g, GradSink& sink) {
                    MapC G(g.data(), m, n);
                    if (sink.wants(ia)) {
                      Map(sink.buffer(ia).data(), m, k).noalias() +=
                          G * MapC(tp.value(ib).data().data(), k, n).transpose();
                    }
                    if (sink.wants(ib)) {
                      Map(sink.buffer(ib).data(), k, n).noalias() +=
                          MapC(tp.value(ia).data().data(), m, k).transpose() * G;
                    }
                  });
}

namespace {

// cols[t, k*cin + c] = x[t + k - pad, c], zero outside [0, T).
std::vector<double> im2col(const Tensor& x, std::size_t kernel) {
  const std::size_t frames = x.rows(), cin = x.cols();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kernel / 2);
  std::vector<double> cols(frames * kernel * cin, 0.0);
  const double* src = x.data().data();
  for (std::size_t t = 0; t < frames; ++t) {
    double* row = cols.data() + t * kernel * cin;
    for (std::size_t k = 0; k < kernel; ++k) {
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - pad;
      if (s < 0 || s >= static_cast<std::ptrdiff_t>(frames)) continue;
      std::copy_n(src + s * cin, cin, row + k * cin);
    }
  }
  return cols;
}

}  // namespace

Var conv1d(Var x, Var w, Var b) {
  Tape& t = tape_of(x, w);
  if (b.tape != &t) throw NumericError("conv1d: bias on a different tape");
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  require_rank2("conv1d", xv);
  if (wv.rank() != 3) throw NumericError("conv1d: weight must be [K,Cin,Cout], got " + shape_to_string(wv.shape()));
  const std::size_t kernel = wv.dim(0), cin = wv.dim(1), cout = wv.dim(2);
  const std::size_t frames = xv.rows();
  if (kernel % 2 == 0) throw NumericError("conv1d: kernel size must be odd");
  if (xv.cols() != cin) {
    throw NumericError("conv1d: input has " + std::to_string(xv.cols()) + " channels, weight expects " +
                       std::to_string(cin));
  }
  if (bv.size() != cout) throw NumericError("conv1d: bias length mismatch");

  const auto cols = im2col(xv, kernel);
  std::vector<double> out(frames * cout);
  Map Y(out.data(), frames, cout);
  Y.noalias() = MapC(cols.data(), frames, kernel * cin) * MapC(wv.data().data(), kernel * cin, cout);
  Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bv.data().data(), cout);

  const std::size_t ix = x.id, iw = w.id, ib = b.id;
  return t.record(
      "conv1d", Tensor({frames, cout}, std::move(out)), {ix, iw, ib},
      [ix, iw, ib, kernel, cin, cout, frames](const Tape& tp, const std::vector<double>& g, GradSink& sink) {
        MapC G(g.data(), frames, cout);
        if (sink.wants(iw)) {
          const auto cols = im2col(tp.value(ix), kernel);
          Map(sink.buffer(iw).data(), kernel * cin, cout).noalias() +=
              MapC(cols.data(), frames, kernel * cin).transpose() * G;
        }
        if (sink.wants(ib)) {
          Eigen::Map<Eigen::RowVectorXd>(sink.buffer(ib).data(), cout) += G.colwise().sum();
        }
        if (sink.wants(ix)) {
          RowMat dcols = G * MapC(tp.value(iw).data().data(), kernel * cin, cout).transpose();
          auto& gx = sink.buffer(ix);
          const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kernel / 2);
          for (std::size_t tt = 0; tt < frames; ++tt) {
            for (std::size_t k = 0; k < kernel; ++k) {
              const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(tt + k) - pad;
              if (s < 0 || s >= static_cast<std::ptrdiff_t>(frames)) continue;
              const double* src = dcols.data() + tt * kernel * cin + k * cin;
              double* dst = gx.data() + s * cin;
              for (std::size_t c = 0; c < cin; ++c) dst[c] += src[c];
            }
          }
        }
      });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  require_rank2("slice_cols", xv);
  const std::size_t r = xv.rows(), c = xv.cols();
  if (begin >= end || end > c) throw NumericError("slice_cols: bad range");
  const std::size_t w = end - begin;
  std::vector<double> out(r * w);
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(xv.data().data() + i * c + begin, w, out.data() + i * w);
  const std::size_t ix = x.id;
  return t.record("slice", Tensor({r, w}, std::move(out)), {ix},
                  [ix, r, c, w, begin](const Tape&, const std::vector<double>& g, GradSink& sink) {
                    auto& gx = sink.buffer(ix);
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < w; ++j) gx[i * c + begin + j] += g[i * w + j];
                  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw NumericError("concat_cols: no inputs");
  Tape& t = tape_of(parts[0]);
  const std::size_t r = parts[0].value().rows();
  std::vector<std::size_t> widths, ids;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.tape != &t) throw NumericError("concat_cols: mixed tapes");
    require_rank2("concat_cols", p.value());
    if (p.value().rows() != r) throw NumericError("concat_cols: row count mismatch");
    widths.push_back(p.value().cols());
    ids.push_back(p.id);
    total += widths.back();
  }
  std::vector<double> out(r * total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double* src = parts[k].value().data().data();
    for (std::size_t i = 0; i < r; ++i) std::copy_n(src + i * widths[k], widths[k], out.data() + i * total + off);
    off += widths[k];
  }
  return t.record("concat", Tensor({r, total}, std::move(out)), ids,
                  [ids, widths, r, total](const Tape&, const std::vector<double>& g, GradSink& sink) {
                    std::size_t o = 0;
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      if (sink.wants(ids[k])) {
                        auto& gk = sink.buffer(ids[k]);
                        for (std::size_t i = 0; i < r; ++i)
                          for (std::size_t j = 0; j < widths[k]; ++j) gk[i * widths[k] + j] += g[i * total + o + j];
                      }
                      o += widths[k];
                    }
                  });
}

Var gather_rows(Var x, std::vector<std::size_t> index) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  require_rank2("gather_rows", xv);
  const std::size_t r = xv.rows(), c = xv.cols();
  if (index.empty()) throw NumericError("gather_rows: empty index");
  std::vector<double> out(index.size() * c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= r) throw NumericError("gather_rows: index " + std::to_string(index[i]) + " out of range");
    std::copy_n(xv.data().data() + index[i] * c, c, out.data() + i * c);
  }
  const std::size_t ix = x.id;
  const std::size_t n = index.size();
  return t.record("gather", Tensor({n, c}, std::move(out)), {ix},
                  [ix, c, idx = std::move(index)](const Tape&, const std::vector<double>& g, GradSink& sink) {
                    auto& gx = sink.buffer(ix);
                    for (std::size_t i = 0; i < idx.size(); ++i)
                      for (std::size_t j = 0; j < c; ++j) gx[idx[i] * c + j] += g[i * c + j];
                  });
}

Var permute_cols(Var x, std::vector<std::size_t> perm) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  require_rank2("permute_cols", xv);
  const std::size_t r = xv.rows(), c = xv.cols();
  if (perm.size() != c) throw NumericError("permute_cols: permutation length mismatch");
  std::vector<bool> seen(c, false);
  for (auto p : perm) {
    if (p >= c || seen[p]) throw NumericError("permute_cols: not a permutation");
    seen[p] = true;
  }
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = xv[i * c + perm[j]];
  const std::size_t ix = x.id;
  return t.record("permute", Tensor(xv.shape(), std::move(out)), {ix},
                  [ix, r, c, p = std::move(perm)](const Tape&, const std::vector<double>& g, GradSink& sink) {
                    auto& gx = sink.buffer(ix);
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < c; ++j) gx[i * c + p[j]] += g[i * c + j];
                  });
}

}  // namespace polyglot::numerics::ops
