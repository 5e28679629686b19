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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "polyglot/numerics/tape.hpp"

namespace polyglot::numerics {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Flat binary parameter file:
///   "FDT1" | u32 version | u32 count |
///   count x ( u32 name_len | name bytes | u32 rank | u32 dims[rank] | f64 payload )
/// All integers and floats little-endian.
void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

std::vector<NamedTensor> to_named(const ParameterSet& params);
/// Copies matching names from `tensors` into `params`; every parameter must be present.
void load_into(ParameterSet& params, std::span<const NamedTensor> tensors);
const Tensor& find_tensor(std::span<const NamedTensor> tensors, const std::string& name);

}  // namespace polyglot::numerics
