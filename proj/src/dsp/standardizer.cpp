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

#include <algorithm>
#include <limits>

#include "polyglot/dsp/features.hpp"

namespace polyglot::dsp {

double Standardizer::forward(std::size_t dim, double v) const {
  const double lo = min[dim], hi = max[dim];
  if (hi <= lo) return 0.0;
  return std::clamp(2.0 * (v - lo) / (hi - lo) - 1.0, -1.0, 1.0);
}

double Standardizer::inverse(std::size_t dim, double v) const {
  const double lo = min[dim], hi = max[dim];
  if (hi <= lo) return lo;
  return lo + (v + 1.0) * 0.5 * (hi - lo);
}

Standardizer fit_standardizer(std::span<const MelSpectrogram> corpus) {
  if (corpus.empty()) throw DspError("cannot fit a standardizer on an empty corpus");
  Standardizer s;
  s.min.assign(kMelBins, std::numeric_limits<double>::infinity());
  s.max.assign(kMelBins, -std::numeric_limits<double>::infinity());
  std::size_t frames = 0;
  for (const auto& mel : corpus) {
    for (std::size_t t = 0; t < mel.frames; ++t) {
      for (std::size_t b = 0; b < kMelBins; ++b) {
        s.min[b] = std::min(s.min[b], mel.at(t, b));
        s.max[b] = std::max(s.max[b], mel.at(t, b));
      }
    }
    frames += mel.frames;
  }
  if (frames == 0) throw DspError("cannot fit a standardizer on zero frames");
  return s;
}

std::vector<double> standardize(const Standardizer& s, const MelSpectrogram& mel) {
  if (s.dims() != kMelBins) throw DspError("standardizer dimension mismatch");
  std::vector<double> out(mel.values.size());
  for (std::size_t t = 0; t < mel.frames; ++t)
    for (std::size_t b = 0; b < kMelBins; ++b) out[t * kMelBins + b] = s.forward(b, mel.at(t, b));
  return out;
}

MelSpectrogram destandardize(const Standardizer& s, std::span<const double> values, std::size_t frames) {
  if (s.dims() != kMelBins) throw DspError("standardizer dimension mismatch");
  if (values.size() != frames * kMelBins) throw DspError("destandardize: payload size mismatch");
  std::vector<double> out(values.size());
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t b = 0; b < kMelBins; ++b) out[t * kMelBins + b] = s.inverse(b, values[t * kMelBins + b]);
  return MelSpectrogram(frames, std::move(out));
}

}  // namespace polyglot::dsp
