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
#include <span>
#include <vector>

#include "polyglot/numerics/tape.hpp"

// Differentiable primitives. Matrices are [rows, cols] row-major; sequence
// tensors are [frames, channels].
namespace polyglot::numerics::ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var add_scalar(Var a, double k);
Var scale(Var a, double k);
Var square(Var a);
Var abs(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var softplus(Var a);

Var sum(Var a);
Var mean(Var a);

/// a[R,C] + b[C] broadcast over rows.
Var add_row(Var a, Var b);
/// a[M,K] x b[K,N].
Var matmul(Var a, Var b);
/// 'same'-padded 1-D convolution over frames. x[T,Cin], w[K,Cin,Cout], b[Cout];
/// K must be odd.
Var conv1d(Var x, Var w, Var b);

/// Columns [begin, end) of a rank-2 tensor.
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var concat_cols(std::span<const Var> parts);
/// out[i,:] = x[index[i],:]
Var gather_rows(Var x, std::vector<std::size_t> index);
/// out[:,j] = x[:,perm[j]]
Var permute_cols(Var x, std::vector<std::size_t> perm);

}  // namespace polyglot::numerics::ops
