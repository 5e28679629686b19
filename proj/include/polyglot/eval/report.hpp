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

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyglot/eval/mushra.hpp"
#include "polyglot/eval/significance.hpp"

namespace polyglot::eval {

struct AnalysisOptions {
  std::size_t cheater_threshold = 5;
  double slider_default = 0.0;
  double alpha = 0.05;
  // CTG direction; when unset every ordered pair of candidates is reported.
  std::optional<std::string> baseline;
  std::optional<std::string> proposed;
};

struct Comparison {
  std::string a;
  std::string b;
  double mean_difference = 0.0;  // mean(a - b) over paired screens
  WilcoxonResult test;
  HolmDecision holm;
};

struct CtgRow {
  std::string baseline;
  std::string proposed;
  CtgInput input;
  double ctg = 0.0;
  bool outside_anchors = false;
  bool significant = false;  // Holm-rejected baseline vs proposed comparison
};

struct AspectReport {
  Aspect aspect = Aspect::naturalness;
  std::size_t listeners = 0;
  std::size_t screens = 0;
  std::map<std::string, Role> roles;
  std::map<std::string, double> means;
  std::vector<Comparison> comparisons;
  std::vector<CtgRow> ctg;
};

struct AnalysisReport {
  std::vector<std::string> excluded_listeners;
  std::size_t kept_listeners = 0;
  std::vector<AspectReport> aspects;
  AnalysisOptions options;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Cheater filtering, per-system means, pairwise Wilcoxon tests (paired per
/// screen) with Holm correction inside each aspect, and CTG rows. CTG needs
/// exactly one upper and one lower anchor in the aspect.
AnalysisReport analyze(const ResponseSet& responses, const AnalysisOptions& options = {});

}  // namespace polyglot::eval
