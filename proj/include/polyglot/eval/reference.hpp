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

#include <string>
#include <vector>

#include "json.hpp"
#include "polyglot/eval/mushra.hpp"

namespace polyglot::eval {

/// Published listening-test means with the CTG printed alongside them.
struct ReferenceCtg {
  std::string label;  // dataset/speaker/locale/model
  Aspect aspect;
  CtgInput means;
  double printed;
};

/// Published CTG pairs (small vs big model) with the printed DCTG.
struct ReferenceDctg {
  std::string label;
  Aspect aspect;
  double ctg_small;
  double ctg_big;
  double printed;
};

const std::vector<ReferenceCtg>& reference_ctg();
const std::vector<ReferenceDctg>& reference_dctg();

struct ReferenceCheck {
  std::string label;
  Aspect aspect;
  double recomputed = 0.0;
  double printed = 0.0;
  bool diverges = false;  // |recomputed - printed| > tolerance
};

/// Recomputes every published value and flags divergences.
std::vector<ReferenceCheck> check_reference_ctg(double tolerance = 0.2);
std::vector<ReferenceCheck> check_reference_dctg(double tolerance = 0.005);

std::string reference_text(const std::vector<ReferenceCheck>& ctg_checks,
                           const std::vector<ReferenceCheck>& dctg_checks);
nlohmann::json reference_json(const std::vector<ReferenceCheck>& checks);

}  // namespace polyglot::eval
