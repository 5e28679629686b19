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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "fft.hpp"
#include "polyglot/dsp/features.hpp"

namespace polyglot::dsp {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// kFftBins x kMelBins pseudo-inverse of the filterbank.
const RowMat& filterbank_pinv() {
  static const RowMat pinv = [] {
    const auto& fb = MelFilterbank::standard();
    Eigen::Map<const RowMat> w(fb.weights().data(), kMelBins, kFftBins);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(w);
    return RowMat(cod.pseudoInverse());
  }();
  return pinv;
}

}  // namespace

std::vector<double> griffin_lim(const MelSpectrogram& mel, int iterations) {
  if (mel.frames == 0) throw DspError("griffin_lim on empty mel");
  const std::size_t frames = mel.frames;
  if (frames < 2) return {};

  const auto& pinv = filterbank_pinv();
  RowMat mel_mag(frames, kMelBins);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t b = 0; b < kMelBins; ++b) mel_mag(t, b) = std::exp(mel.at(t, b));
  RowMat linear = (mel_mag * pinv.transpose()).cwiseMax(0.0);

  std::vector<std::complex<double>> spec(frames * kFftBins);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t k = 0; k < kFftBins; ++k) spec[t * kFftBins + k] = linear(t, k);

  std::vector<double> wave = detail::istft(spec, frames);
  for (int it = 0; it < iterations; ++it) {
    std::size_t f = 0;
    auto est = detail::stft_complex(wave, f);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t k = 0; k < kFftBins; ++k) {
        const auto e = est[t * kFftBins + k];
        const double a = std::abs(e);
        const auto phase = a > 1e-12 ? e / a : std::complex<double>(1.0, 0.0);
        spec[t * kFftBins + k] = linear(t, k) * phase;
      }
    }
    wave = detail::istft(spec, frames);
  }

  double peak = 0.0;
  for (double v : wave) peak = std::max(peak, std::abs(v));
  if (peak > 0.95) {
    for (auto& v : wave) v *= 0.95 / peak;
  }
  return wave;
}

}  // namespace polyglot::dsp
