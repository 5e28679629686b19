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
#include <cmath>
#include <string>

#include "fft.hpp"
#include "polyglot/dsp/features.hpp"

namespace polyglot::dsp {

std::size_t frame_count(std::size_t num_samples) { return num_samples / kHopSamples + 1; }

MelSpectrogram::MelSpectrogram(std::size_t frames_, std::vector<double> values_)
    : frames(frames_), values(std::move(values_)) {
  if (values.size() != frames * kMelBins) {
    throw DspError("mel payload has " + std::to_string(values.size()) + " values for " + std::to_string(frames) +
                   " frames");
  }
}

std::vector<double> MelSpectrogram::mean_frame() const {
  std::vector<double> m(kMelBins, 0.0);
  if (frames == 0) return m;
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t b = 0; b < kMelBins; ++b) m[b] += at(t, b);
  for (auto& v : m) v /= static_cast<double>(frames);
  return m;
}

double MelFilterbank::hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelFilterbank::mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank() : weights_(kMelBins * kFftBins, 0.0), centers_hz_(kMelBins) {
  const double lo = hz_to_mel(0.0), hi = hz_to_mel(kMelFmax);
  std::vector<double> edges(kMelBins + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kMelBins + 1));
  }
  for (std::size_t m = 0; m < kMelBins; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    centers_hz_[m] = center;
    for (std::size_t k = 0; k < kFftBins; ++k) {
      const double f = static_cast<double>(k) * kSampleRate / static_cast<double>(kFftSize);
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      weights_[m * kFftBins + k] = std::max(0.0, std::min(up, down));
    }
  }
}

const MelFilterbank& MelFilterbank::standard() {
  static const MelFilterbank fb;
  return fb;
}

namespace detail {

std::vector<std::complex<double>> stft_complex(std::span<const double> waveform, std::size_t& frames) {
  if (waveform.empty()) throw DspError("empty waveform");
  frames = frame_count(waveform.size());
  static const auto window = hann(kWinSamples);
  RealFft fft(kFftSize);
  std::vector<double> buf(kFftSize, 0.0);
  std::vector<std::complex<double>> spec;
  std::vector<std::complex<double>> out(frames * kFftBins);
  const auto half = static_cast<std::ptrdiff_t>(kWinSamples / 2);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * kHopSamples) - half;
    for (std::size_t i = 0; i < kWinSamples; ++i) {
      buf[i] = window[i] * reflect_at(waveform, start + static_cast<std::ptrdiff_t>(i));
    }
    fft.forward(buf, spec);
    std::copy(spec.begin(), spec.end(), out.begin() + static_cast<std::ptrdiff_t>(t * kFftBins));
  }
  return out;
}

std::vector<double> istft(std::span<const std::complex<double>> spec, std::size_t frames) {
  static const auto window = hann(kWinSamples);
  RealFft fft(kFftSize);
  const std::size_t padded = (frames - 1) * kHopSamples + kWinSamples;
  std::vector<double> acc(padded, 0.0), wsum(padded, 0.0), buf;
  for (std::size_t t = 0; t < frames; ++t) {
    fft.inverse(spec.subspan(t * kFftBins, kFftBins), buf);
    const std::size_t start = t * kHopSamples;
    for (std::size_t i = 0; i < kWinSamples; ++i) {
      acc[start + i] += window[i] * buf[i] / static_cast<double>(kFftSize);
      wsum[start + i] += window[i] * window[i];
    }
  }
  const std::size_t half = kWinSamples / 2;
  std::vector<double> out((frames - 1) * kHopSamples);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = wsum[i + half];
    out[i] = w > 1e-8 ? acc[i + half] / w : 0.0;
  }
  return out;
}

}  // namespace detail

namespace {
void check_waveform(std::span<const double> waveform) {
  if (waveform.empty()) throw DspError("empty waveform");
  for (double v : waveform) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) throw DspError("waveform amplitude outside [-1, 1]");
  }
}
}  // namespace

std::vector<double> stft_magnitude(std::span<const double> waveform, std::size_t* frames_out) {
  check_waveform(waveform);
  std::size_t frames = 0;
  auto spec = detail::stft_complex(waveform, frames);
  std::vector<double> mag(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) mag[i] = std::abs(spec[i]);
  if (frames_out) *frames_out = frames;
  return mag;
}

MelSpectrogram mel_spectrogram(std::span<const double> waveform) {
  std::size_t frames = 0;
  const auto mag = stft_magnitude(waveform, &frames);
  const auto& fb = MelFilterbank::standard();
  std::vector<double> out(frames * kMelBins);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* m = mag.data() + t * kFftBins;
    for (std::size_t b = 0; b < kMelBins; ++b) {
      const double* w = fb.weights().data() + b * kFftBins;
      double acc = 0.0;
      for (std::size_t k = 0; k < kFftBins; ++k) acc += w[k] * m[k];
      out[t * kMelBins + b] = std::log(std::max(acc, kMagnitudeFloor));
    }
  }
  return MelSpectrogram(frames, std::move(out));
}

std::vector<double> frame_log_energy(const MelSpectrogram& mel) {
  std::vector<double> e(mel.frames);
  for (std::size_t t = 0; t < mel.frames; ++t) {
    double s = 0.0;
    for (double v : mel.frame(t)) s += std::exp(2.0 * v);
    e[t] = 0.5 * std::log(s);
  }
  return e;
}

void clamp_to_floor(MelSpectrogram& mel) {
  for (auto& v : mel.values) v = std::max(v, kLogFloor);
}

}  // namespace polyglot::dsp
