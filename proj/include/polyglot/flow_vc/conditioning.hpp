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
#include <stdexcept>
#include <vector>

#include "polyglot/corpus/manifest.hpp"
#include "polyglot/numerics/tape.hpp"

namespace polyglot::flow_vc {

class VcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kPhonemeEmbeddingDim = 32;

/// Per-frame conditioning before the learned phoneme table is applied.
/// `features` rows are [accent one-hot | speaker embedding | normalized F0 | V/UV].
struct ConditioningInputs {
  std::vector<std::size_t> frame_phonemes;  // global phoneme index per frame
  numerics::Tensor features;

  std::size_t frames() const { return frame_phonemes.size(); }
};

/// Width of the full conditioning vector for `accent_dim` locales.
constexpr std::size_t conditioning_dim(std::size_t accent_dim) {
  return kPhonemeEmbeddingDim + accent_dim + corpus::kEmbeddingDim + 2;
}

/// One entry per frame: phoneme k repeated durations[k] times, offset into
/// the global inventory.
std::vector<std::size_t> expand_durations(const std::vector<int>& phonemes, const std::vector<int>& durations,
                                          std::size_t offset);

/// Builds the conditioning for utterance `u` voiced by a speaker with the given
/// embedding. `f0` is the raw track; it is interpolated and normalized here.
ConditioningInputs make_conditioning(const corpus::CorpusManifest& manifest, const corpus::Utterance& u,
                                     const std::vector<double>& speaker_embedding, const dsp::F0Track& f0);

/// The full ConditioningVector [phoneme embedding | accent | speaker | F0 | V/UV]
/// as a tape node; `phoneme_table` is [inventory, kPhonemeEmbeddingDim].
numerics::Var conditioning_var(numerics::Tape& tape, numerics::Var phoneme_table, const ConditioningInputs& inputs);

/// Rows [begin, end) of the inputs.
ConditioningInputs crop(const ConditioningInputs& inputs, std::size_t begin, std::size_t end);

}  // namespace polyglot::flow_vc
