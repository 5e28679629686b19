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

#include "polyglot/flow_vc/conditioning.hpp"

#include <array>

#include "polyglot/numerics/ops.hpp"

namespace polyglot::flow_vc {

namespace ops = numerics::ops;
using numerics::Tensor;

std::vector<std::size_t> expand_durations(const std::vector<int>& phonemes, const std::vector<int>& durations,
                                          std::size_t offset) {
  if (phonemes.size() != durations.size()) throw VcError("phoneme and duration arrays disagree");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < phonemes.size(); ++k) {
    if (durations[k] < 1) throw VcError("non-positive duration");
    if (phonemes[k] < 0) throw VcError("negative phoneme id");
    out.insert(out.end(), static_cast<std::size_t>(durations[k]), offset + static_cast<std::size_t>(phonemes[k]));
  }
  return out;
}

ConditioningInputs make_conditioning(const corpus::CorpusManifest& m, const corpus::Utterance& u,
                                     const std::vector<double>& speaker_embedding, const dsp::F0Track& f0) {
  if (speaker_embedding.size() != corpus::kEmbeddingDim) throw VcError("speaker embedding has wrong dimension");
  if (f0.frames() != u.frames) {
    throw VcError("utterance " + u.id + ": F0 track has " + std::to_string(f0.frames()) + " frames, expected " +
                  std::to_string(u.frames));
  }
  const auto& locale = m.locale(u.locale);
  ConditioningInputs c;
  c.frame_phonemes = expand_durations(u.phonemes, u.durations, m.phoneme_offset(u.locale));
  if (c.frame_phonemes.size() != u.frames) throw VcError("utterance " + u.id + ": durations do not cover the frames");

  const auto normalized = dsp::interpolate_and_normalize(f0);
  const std::size_t accents = m.locales.size();
  const std::size_t width = accents + corpus::kEmbeddingDim + 2;
  std::vector<double> rows(u.frames * width, 0.0);
  for (std::size_t t = 0; t < u.frames; ++t) {
    double* r = &rows[t * width];
    r[locale.accent_index] = 1.0;
    std::copy(speaker_embedding.begin(), speaker_embedding.end(), r + accents);
    r[accents + corpus::kEmbeddingDim] = normalized.normalized[t];
    r[accents + corpus::kEmbeddingDim + 1] = f0.voiced[t] ? 1.0 : 0.0;
  }
  c.features = Tensor({u.frames, width}, std::move(rows));
  return c;
}

numerics::Var conditioning_var(numerics::Tape& tape, numerics::Var phoneme_table, const ConditioningInputs& inputs) {
  if (inputs.features.rank() != 2 || inputs.features.rows() != inputs.frames())
    throw VcError("conditioning features do not match the frame count");
  const std::array<numerics::Var, 2> parts{ops::gather_rows(phoneme_table, inputs.frame_phonemes),
                                           tape.constant(inputs.features)};
  return ops::concat_cols(parts);
}

ConditioningInputs crop(const ConditioningInputs& in, std::size_t begin, std::size_t end) {
  if (begin >= end || end > in.frames()) throw VcError("invalid conditioning crop");
  ConditioningInputs out;
  out.frame_phonemes.assign(in.frame_phonemes.begin() + static_cast<std::ptrdiff_t>(begin),
                            in.frame_phonemes.begin() + static_cast<std::ptrdiff_t>(end));
  const std::size_t w = in.features.cols();
  const auto& v = in.features.values();
  out.features = Tensor({end - begin, w}, std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin * w),
                                                              v.begin() + static_cast<std::ptrdiff_t>(end * w)));
  return out;
}

}  // namespace polyglot::flow_vc
