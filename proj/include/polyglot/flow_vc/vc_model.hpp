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
#include <string>
#include <vector>

#include "polyglot/corpus/manifest.hpp"
#include "polyglot/dsp/features.hpp"
#include "polyglot/flow_vc/conditioning.hpp"
#include "polyglot/flow_vc/flow_model.hpp"

namespace polyglot::flow_vc {

/// Flow plus everything needed to condition and (de)standardize it: the
/// learned phoneme table over the concatenated inventories, the locale
/// layout it was trained on and the mel standardizer.
struct VcModel {
  FlowModel flow;
  numerics::ParameterSet phonemes;  // single entry "phoneme_table" [inventory, 32]
  dsp::Standardizer standardizer;
  std::vector<corpus::LocaleInfo> locales;

  /// Fresh model sized for the manifest's locales. `flow.cond_dim` is overwritten.
  static VcModel create(const corpus::CorpusManifest& manifest, FlowConfig flow, dsp::Standardizer standardizer,
                        std::uint64_t seed);

  /// Throws VcError when the manifest's locale layout differs from training.
  void check_compatible(const corpus::CorpusManifest& manifest) const;

  /// Numeric conditioning matrix [frames, cond_dim].
  numerics::Tensor conditioning(const ConditioningInputs& inputs) const;

  /// Standardized mel as a [frames, 80] tensor.
  numerics::Tensor standardized(const dsp::MelSpectrogram& mel) const;
};

/// Writes the parameters (and standardizer) as a checkpoint at `path` and the
/// configuration as JSON at `path` + ".json".
void save_vc_model(const VcModel& model, const std::filesystem::path& path);
VcModel load_vc_model(const std::filesystem::path& path);

}  // namespace polyglot::flow_vc
