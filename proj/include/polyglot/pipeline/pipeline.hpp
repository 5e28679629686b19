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
#include <string>
#include <vector>

#include "polyglot/pipeline/config.hpp"
#include "polyglot/pipeline/ledger.hpp"

namespace polyglot::pipeline {

/// 1: VC training on the corpus. 2: conversion of each target locale's source
/// speakers into the target voice. 3: one acoustic model per target locale on
/// the converted data. 4: vocoder stand-in, a standardizer fitted on the
/// target speaker's original mels only, plus inversion settings; then sample
/// WAVs per locale. Returns the ledger entries written.
std::vector<LedgerEntry> run_stage(int stage, const PipelineConfig& config);
/// Runs stages 1..4 in order.
std::vector<LedgerEntry> run_all(const PipelineConfig& config);

struct InferResult {
  std::vector<double> waveform;
  std::vector<int> durations;
  std::vector<std::filesystem::path> files_read;
};

/// Acoustic model -> mel -> vocoder standardizer bound -> Griffin-Lim. Reads
/// stage 3 and 4 artifacts only.
InferResult infer(const PipelineConfig& config, const std::vector<int>& phonemes, const std::string& locale);
void infer_to_wav(const PipelineConfig& config, const std::vector<int>& phonemes, const std::string& locale,
                  const std::filesystem::path& out_wav);

/// Whitespace-separated phoneme ids.
std::vector<int> read_phoneme_file(const std::filesystem::path& path);

}  // namespace polyglot::pipeline
