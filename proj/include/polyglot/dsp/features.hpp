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

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace polyglot::dsp {

class DspError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kSampleRate = 24000;
inline constexpr std::size_t kHopSamples = 300;   // 12.5 ms
inline constexpr std::size_t kWinSamples = 1200;  // 50 ms
inline constexpr std::size_t kFftSize = 2048;
inline constexpr std::size_t kFftBins = kFftSize / 2 + 1;
inline constexpr std::size_t kMelBins = 80;
inline constexpr double kMelFmax = 12000.0;
inline constexpr double kMagnitudeFloor = 1e-5;
inline const double kLogFloor = std::log(kMagnitudeFloor);

/// floor(num_samples / hop) + 1, the frame grid shared by every feature.
std::size_t frame_count(std::size_t num_samples);

/// frames x 80 natural-log mel magnitudes, row-major.
struct MelSpectrogram {
  std::size_t frames = 0;
  std::vector<double> values;

  MelSpectrogram() = default;
  MelSpectrogram(std::size_t frames, std::vector<double> values);

  static constexpr std::size_t bins() { return kMelBins; }
  double at(std::size_t t, std::size_t b) const { return values[t * kMelBins + b]; }
  std::span<const double> frame(std::size_t t) const { return {values.data() + t * kMelBins, kMelBins}; }
  /// Mean over frames, one value per mel bin.
  std::vector<double> mean_frame() const;
};

/// HTK-scale triangular filterbank over [0, 12 kHz] on the kFftBins grid.
class MelFilterbank {
 public:
  static const MelFilterbank& standard();

  const std::vector<double>& weights() const { return weights_; }  // kMelBins x kFftBins
  const std::vector<double>& centers_hz() const { return centers_hz_; }
  double weight(std::size_t mel, std::size_t bin) const { return weights_[mel * kFftBins + bin]; }

  static double hz_to_mel(double hz);
  static double mel_to_hz(double mel);

 private:
  MelFilterbank();
  std::vector<double> weights_;
  std::vector<double> centers_hz_;
};

/// Magnitude STFT: hann window of kWinSamples zero-padded to kFftSize,
/// reflect-padded by half a window so frame t is centred on sample t*hop.
/// Returns frames x kFftBins magnitudes.
std::vector<double> stft_magnitude(std::span<const double> waveform, std::size_t* frames_out = nullptr);

MelSpectrogram mel_spectrogram(std::span<const double> waveform);

/// ln of the L2 norm of each frame's linear mel magnitudes.
std::vector<double> frame_log_energy(const MelSpectrogram& mel);

struct F0Track {
  std::vector<double> f0_hz;            // 0 where unvoiced
  std::vector<bool> voiced;
  std::vector<double> interpolated_hz;  // filled by interpolate_and_normalize
  std::vector<double> normalized;       // filled by interpolate_and_normalize
  bool degenerate = false;              // fewer than two voiced frames

  std::size_t frames() const { return f0_hz.size(); }
  std::size_t voiced_count() const;
};

/// Per-frame normalized-autocorrelation pitch on the mel frame grid.
F0Track estimate_f0(std::span<const double> waveform, double fmin_hz = 60.0, double fmax_hz = 400.0);

/// Linear interpolation across unvoiced gaps (edges held), then an
/// utterance-level z-score. Zero variance or < 2 voiced frames gives an
/// all-zero normalized field; the latter also sets `degenerate`.
F0Track interpolate_and_normalize(F0Track track);

/// Population z-score; all zeros when the variance is zero.
std::vector<double> zscore(std::span<const double> values);

/// Per-dimension min/max scaler onto [-1, 1].
struct Standardizer {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dims() const { return min.size(); }
  /// Clamps to [-1, 1]; degenerate dimensions map to 0.
  double forward(std::size_t dim, double v) const;
  double inverse(std::size_t dim, double v) const;
};

Standardizer fit_standardizer(std::span<const MelSpectrogram> corpus);
std::vector<double> standardize(const Standardizer& s, const MelSpectrogram& mel);
/// Result is not floor-clamped; callers decide how to treat sub-floor values.
MelSpectrogram destandardize(const Standardizer& s, std::span<const double> values, std::size_t frames);

/// Clamp every value to at least kLogFloor.
void clamp_to_floor(MelSpectrogram& mel);

/// Zero-phase-initialised Griffin-Lim from a log-mel spectrogram.
/// Output length (frames - 1) * hop samples, peak limited to 0.95.
std::vector<double> griffin_lim(const MelSpectrogram& mel, int iterations = 60);

}  // namespace polyglot::dsp
