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
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

namespace polyglot::pipeline {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(std::string_view bytes);
/// Digest over the sorted (relative path, file digest) list of a directory tree,
/// or the file digest when `path` is a regular file.
std::string artifact_digest(const std::filesystem::path& path);

struct LedgerEntry {
  std::string key;     // "stage1", "stage2:loc1", ...
  int stage = 0;
  std::string status;  // "done"
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;   // artifact -> digest
  std::map<std::string, std::string> outputs;  // artifact -> digest
  double wall_seconds = 0.0;
  nlohmann::json details;

  nlohmann::json to_json() const;
  static LedgerEntry from_json(const nlohmann::json& j);
};

/// Artifact names are paths relative to the run directory.
class StageLedger {
 public:
  StageLedger() = default;
  explicit StageLedger(std::filesystem::path run_dir) : run_dir_(std::move(run_dir)) {}

  static StageLedger load(const std::filesystem::path& run_dir);
  void save() const;

  const LedgerEntry* find(const std::string& key) const;
  void record(LedgerEntry entry);
  const std::map<std::string, LedgerEntry>& entries() const { return entries_; }

  /// Current digest of an artifact under the run directory.
  std::string digest(const std::string& artifact) const;
  /// Throws PipelineError unless `key` is done and each listed output still
  /// exists with its recorded digest.
  void require_outputs(const std::string& key) const;

 private:
  std::filesystem::path run_dir_;
  std::map<std::string, LedgerEntry> entries_;
};

}  // namespace polyglot::pipeline
