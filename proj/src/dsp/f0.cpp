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
#include <numeric>

#include "fft.hpp"
#include "polyglot/dsp/features.hpp"

namespace polyglot::dsp {

namespace {

constexpr double kVoicingThreshold = 0.5;
constexpr double kSilenceRms = 1e-4;
constexpr std::size_t kAcfSize = 4096;  // >= 2 * window, no circular wrap

}  // namespace

std::size_t F0Track::voiced_count() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
}

F0Track estimate_f0(std::span<const double> waveform, double fmin_hz, double fmax_hz) {
  if (!(fmin_hz > 0.0) || fmin_hz >= fmax_hz) throw DspError("estimate_f0 requires 0 < fmin < fmax");
  if (waveform.size() < kWinSamples) throw DspError("waveform shorter than one analysis window");

  const std::size_t frames = frame_count(waveform.size());
  const auto min_lag = static_cast<std::size_t>(std::floor(kSampleRate / fmax_hz));
  const auto max_lag = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(kSampleRate / fmin_hz)),
                                             kWinSamples - 2);
  detail::RealFft fft(kAcfSize);
  std::vector<double> buf(kAcfSize, 0.0), acf;
  std::vector<std::complex<double>> spec;
  std::vector<double> frame(kWinSamples), prefix(kWinSamples + 1);
  std::vector<double> r(max_lag + 2, 0.0);

  F0Track track;
  track.f0_hz.assign(frames, 0.0);
  track.voiced.assign(frames, false);

  const auto half = static_cast<std::ptrdiff_t>(kWinSamples / 2);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * kHopSamples) - half;
    double mean = 0.0;
    for (std::size_t i = 0; i < kWinSamples; ++i) {
      frame[i] = detail::reflect_at(waveform, start + static_cast<std::ptrdiff_t>(i));
      mean += frame[i];
    }
    mean /= kWinSamples;
    for (auto& v : frame) v -= mean;
    prefix[0] = 0.0;
    for (std::size_t i = 0; i < kWinSamples; ++i) prefix[i + 1] = prefix[i] + frame[i] * frame[i];
    if (std::sqrt(prefix[kWinSamples] / kWinSamples) < kSilenceRms) continue;

    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(frame.begin(), frame.end(), buf.begin());
    fft.forward(buf, spec);
    for (auto& c : spec) c = std::norm(c);
    fft.inverse(spec, acf);

    double best = -1.0;
    for (std::size_t lag = min_lag; lag <= max_lag + 1; ++lag) {
      const double e0 = prefix[kWinSamples - lag];
      const double e1 = prefix[kWinSamples] - prefix[lag];
      const double den = std::sqrt(e0 * e1);
      r[lag] = den > 0.0 ? acf[lag] / kAcfSize / den : 0.0;
      if (lag <= max_lag) best = std::max(best, r[lag]);
    }
    if (best < kVoicingThreshold) continue;

    // Smallest-lag local peak close to the global best avoids octave-down errors.
    std::size_t pick = 0;
    for (std::size_t lag = std::max<std::size_t>(min_lag, 1); lag <= max_lag; ++lag) {
      const bool peak = r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1];
      if (peak && r[lag] >= 0.9 * best) {
        pick = lag;
        break;
      }
    }
    if (pick == 0) continue;
    double refined = static_cast<double>(pick);
    const double a = r[pick - 1], b = r[pick], c = r[pick + 1];
    const double curv = a - 2.0 * b + c;
    if (curv < 0.0) refined += 0.5 * (a - c) / curv;
    const double f0 = kSampleRate / refined;
    if (f0 < fmin_hz || f0 > fmax_hz) continue;
    track.f0_hz[t] = f0;
    track.voiced[t] = true;
  }
  return track;
}

std::vector<double> zscore(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  if (var <= 1e-24 * std::max(1.0, mean * mean)) return out;
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

F0Track interpolate_and_normalize(F0Track track) {
  const std::size_t n = track.frames();
  if (track.voiced.size() != n) throw DspError("F0 track voiced/f0 length mismatch");
  track.interpolated_hz.assign(n, 0.0);
  track.normalized.assign(n, 0.0);

  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < n; ++i)
    if (track.voiced[i]) anchors.push_back(i);
  track.degenerate = anchors.size() < 2;
  if (anchors.empty()) return track;

  for (std::size_t i = 0; i <= anchors.front(); ++i) track.interpolated_hz[i] = track.f0_hz[anchors.front()];
  for (std::size_t i = anchors.back(); i < n; ++i) track.interpolated_hz[i] = track.f0_hz[anchors.back()];
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
    const std::size_t a = anchors[k], b = anchors[k + 1];
    const double fa = track.f0_hz[a], fb = track.f0_hz[b];
    for (std::size_t i = a; i <= b; ++i) {
      const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
      track.interpolated_hz[i] = fa + w * (fb - fa);
    }
  }
  if (!track.degenerate) track.normalized = zscore(track.interpolated_hz);
  return track;
}

}  // namespace polyglot::dsp
