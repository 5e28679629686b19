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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyglot/acoustic/train.hpp"
#include "polyglot/corpus/generator.hpp"
#include "polyglot/flow_vc/train.hpp"

namespace polyglot::pipeline {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageSeeds {
  std::uint64_t corpus = 7;
  std::uint64_t vc = 11;
  std::uint64_t acoustic = 13;

  bool operator==(const StageSeeds&) const = default;
};

/// Either generates a corpus into <output_dir>/corpus or reads an existing
/// manifest. Paths in a config file resolve against the file's directory.
struct PipelineConfig {
  std::filesystem::path output_dir = "run";
  std::optional<std::filesystem::path> manifest;  // existing corpus
  corpus::CorpusConfig corpus;                    // used when manifest is unset
  std::string target_speaker;                     // default: the corpus target
  std::vector<std::string> target_locales;        // default: locales of source speakers
  StageSeeds seeds;
  flow_vc::VcTrainConfig vc;
  acoustic::AcousticTrainConfig acoustic;
  int griffin_lim_iterations = 60;
  std::size_t samples_per_locale = 2;

  void check() const;
  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});

  std::filesystem::path corpus_manifest_path() const;
  std::filesystem::path stage_dir(int stage) const;
  std::filesystem::path ledger_path() const { return output_dir / "ledger.json"; }
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace polyglot::pipeline
