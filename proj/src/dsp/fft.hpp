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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace polyglot::dsp::detail {

/// Real FFT of a fixed size. Plans are shared per size and created under a
/// lock; execution uses the new-array interface and is reentrant.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  /// in: n reals, out: n/2+1 complex.
  void forward(std::span<const double> in, std::vector<std::complex<double>>& out);
  /// in: n/2+1 complex, out: n reals, unnormalised (scaled by n).
  void inverse(std::span<const std::complex<double>> in, std::vector<double>& out);

 private:
  std::size_t n_;
  double* real_;
  void* spec_;
  void* fwd_;
  void* inv_;
};

/// Periodic hann window.
std::vector<double> hann(std::size_t n);

/// Reflect-padded sample fetch that also handles pads longer than the signal.
double reflect_at(std::span<const double> x, std::ptrdiff_t i);

}  // namespace polyglot::dsp::detail

namespace polyglot::dsp::detail {

/// Complex STFT on the shared frame grid; frames x (n_fft/2+1).
std::vector<std::complex<double>> stft_complex(std::span<const double> waveform, std::size_t& frames);

/// Weighted overlap-add inverse of stft_complex; returns (frames-1)*hop samples.
std::vector<double> istft(std::span<const std::complex<double>> spec, std::size_t frames);

}  // namespace polyglot::dsp::detail
