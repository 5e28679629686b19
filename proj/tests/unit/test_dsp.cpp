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

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "polyglot/dsp/audio_io.hpp"
#include "polyglot/dsp/features.hpp"
#include "polyglot/numerics/rng.hpp"

using namespace polyglot::dsp;
using polyglot::numerics::Rng;

namespace {

std::vector<double> sine(double hz, double amp, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRate);
  return x;
}

// Independent HTK mel centres: 80 points strictly inside [0, 12 kHz].
std::vector<double> oracle_centers() {
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> c;
  const double top = mel(12000.0);
  for (int i = 1; i <= 80; ++i) c.push_back(hz(top * i / 81.0));
  return c;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Brute-force DFT magnitude peak in [lo, hi] Hz at 1 Hz resolution.
double dominant_frequency(const std::vector<double>& x, double lo, double hi) {
  double best_f = lo, best = -1.0;
  for (double f = lo; f <= hi; f += 1.0) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(n) / kSampleRate);
    }
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace

TEST_CASE("silence maps to the log floor on 81 frames") {
  std::vector<double> zeros(24000, 0.0);
  auto mel = mel_spectrogram(zeros);
  CHECK(mel.frames == 81);
  for (double v : mel.values) CHECK(v == kLogFloor);
}

TEST_CASE("frame count formula") {
  CHECK(mel_spectrogram(std::vector<double>(600, 0.1)).frames == 3);
  CHECK(frame_count(599) == 2);
  CHECK(mel_spectrogram(std::vector<double>(1, 0.0)).frames == 1);
}

TEST_CASE("mel_spectrogram rejects empty and out-of-range input") {
  CHECK_THROWS_AS(mel_spectrogram(std::vector<double>{}), DspError);
  CHECK_THROWS_AS(mel_spectrogram(std::vector<double>{0.1, 1.5}), DspError);
}

TEST_CASE("440 Hz sine peaks in the mel bin centred nearest 440 Hz") {
  auto mel = mel_spectrogram(sine(440.0, 0.5, 24000));
  auto centers = oracle_centers();
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < centers.size(); ++i)
    if (std::abs(centers[i] - 440.0) < std::abs(centers[nearest] - 440.0)) nearest = i;
  CHECK(argmax(mel.mean_frame()) == nearest);
  for (std::size_t i = 0; i < 80; ++i) CHECK(MelFilterbank::standard().centers_hz()[i] == doctest::Approx(centers[i]));
}

TEST_CASE("filterbank rows are positive, overlapping, increasing") {
  const auto& fb = MelFilterbank::standard();
  for (std::size_t m = 0; m < kMelBins; ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < kFftBins; ++k) s += fb.weight(m, k);
    CHECK(s > 0.0);
    if (m + 1 < kMelBins) {
      CHECK(fb.centers_hz()[m + 1] > fb.centers_hz()[m]);
      bool overlap = false;
      for (std::size_t k = 0; k < kFftBins; ++k) overlap |= fb.weight(m, k) > 0 && fb.weight(m + 1, k) > 0;
      CHECK(overlap);
    }
  }
}

TEST_CASE("F0 of a 220 Hz sine") {
  auto x = sine(220.0, 0.5, 24000);
  auto track = estimate_f0(x);
  std::size_t good = 0;
  for (std::size_t t = 0; t < track.frames(); ++t)
    if (track.voiced[t] && std::abs(track.f0_hz[t] - 220.0) <= 5.0) ++good;
  CHECK(static_cast<double>(good) >= 0.95 * static_cast<double>(track.frames()));
}

TEST_CASE("white noise is mostly unvoiced") {
  Rng rng(1234);
  std::vector<double> x(24000);
  for (auto& v : x) v = rng.uniform(-0.5, 0.5);
  auto track = estimate_f0(x);
  CHECK(static_cast<double>(track.voiced_count()) <= 0.2 * static_cast<double>(track.frames()));
}

TEST_CASE("silence is unvoiced with zero F0") {
  auto track = estimate_f0(std::vector<double>(24000, 0.0));
  CHECK(track.voiced_count() == 0);
  for (double f : track.f0_hz) CHECK(f == 0.0);
}

TEST_CASE("estimate_f0 argument errors") {
  std::vector<double> x(24000, 0.0);
  CHECK_THROWS_AS(estimate_f0(x, 400.0, 60.0), DspError);
  CHECK_THROWS_AS(estimate_f0(x, 100.0, 100.0), DspError);
  CHECK_THROWS_AS(estimate_f0(std::vector<double>(100, 0.0)), DspError);
}

TEST_CASE("feature frame grids agree") {
  Rng rng(2);
  for (std::size_t n : {1200u, 1500u, 9001u, 24000u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-0.3, 0.3);
    CHECK(mel_spectrogram(x).frames == estimate_f0(x).frames());
  }
}

TEST_CASE("interpolation and normalization") {
  SUBCASE("constant voiced track normalizes to zeros") {
    F0Track t;
    t.f0_hz.assign(10, 200.0);
    t.voiced.assign(10, true);
    auto out = interpolate_and_normalize(t);
    CHECK_FALSE(out.degenerate);
    for (double v : out.normalized) CHECK(v == 0.0);
  }
  SUBCASE("two-frame gap is linearly filled") {
    F0Track t;
    t.f0_hz = {100, 0, 0, 200};
    t.voiced = {true, false, false, true};
    auto out = interpolate_and_normalize(t);
    CHECK(out.interpolated_hz[0] == 100.0);
    CHECK(out.interpolated_hz[1] == doctest::Approx(133.3333333333));
    CHECK(out.interpolated_hz[2] == doctest::Approx(166.6666666667));
    CHECK(out.interpolated_hz[3] == doctest::Approx(200.0));
    CHECK(out.f0_hz[1] == 0.0);
  }
  SUBCASE("edges are held constant") {
    F0Track t;
    t.f0_hz = {0, 150, 0, 180, 0, 0};
    t.voiced = {false, true, false, true, false, false};
    auto out = interpolate_and_normalize(t);
    CHECK(out.interpolated_hz[0] == 150.0);
    CHECK(out.interpolated_hz[5] == 180.0);
  }
  SUBCASE("fewer than two voiced frames is degenerate") {
    F0Track t;
    t.f0_hz = {0, 120, 0};
    t.voiced = {false, true, false};
    auto out = interpolate_and_normalize(t);
    CHECK(out.degenerate);
    for (double v : out.normalized) CHECK(v == 0.0);
  }
  SUBCASE("random tracks have zero mean and unit variance; renormalizing is a no-op") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      F0Track t;
      const std::size_t n = 5 + rng.below(60);
      for (std::size_t i = 0; i < n; ++i) {
        const bool v = rng.uniform() < 0.7 || i < 2;
        t.voiced.push_back(v);
        t.f0_hz.push_back(v ? rng.uniform(80, 300) : 0.0);
      }
      auto out = interpolate_and_normalize(t);
      double mean = 0, var = 0;
      for (double v : out.normalized) mean += v;
      mean /= static_cast<double>(n);
      for (double v : out.normalized) var += (v - mean) * (v - mean);
      var /= static_cast<double>(n);
      CHECK(std::abs(mean) < 1e-6);
      CHECK(std::abs(var - 1.0) < 1e-6);
      auto again = zscore(out.normalized);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(again[i] - out.normalized[i]) < 1e-9);
    }
  }
}

TEST_CASE("standardizer") {
  auto make = [](std::vector<double> column_values) {
    std::vector<double> v;
    for (double c : column_values)
      for (std::size_t b = 0; b < kMelBins; ++b) v.push_back(c + static_cast<double>(b));
    return MelSpectrogram(column_values.size(), v);
  };
  std::vector<MelSpectrogram> corpus{make({2.0}), make({4.0})};
  auto s = fit_standardizer(corpus);
  CHECK(s.forward(0, 2.0) == -1.0);
  CHECK(s.forward(0, 4.0) == 1.0);
  CHECK(s.forward(0, 3.0) == 0.0);
  CHECK(s.forward(0, 5.0) == 1.0);
  CHECK(s.forward(0, -9.0) == -1.0);

  Rng rng(4);
  std::vector<MelSpectrogram> fit;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> v(7 * kMelBins);
    for (auto& x : v) x = rng.uniform(-11.0, 4.0);
    fit.emplace_back(7, v);
  }
  auto s2 = fit_standardizer(fit);
  for (const auto& m : fit) {
    auto y = standardize(s2, m);
    auto back = destandardize(s2, y, m.frames);
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(std::abs(back.values[i] - m.values[i]) <= 1e-12);
      CHECK(std::abs(y[i]) <= 1.0);
    }
  }
  // Arbitrary inputs always land in [-1, 1].
  std::vector<double> wild(3 * kMelBins);
  for (auto& x : wild) x = rng.uniform(-100.0, 100.0);
  for (double y : standardize(s2, MelSpectrogram(3, wild))) CHECK(std::abs(y) <= 1.0);

  Standardizer flat{std::vector<double>(kMelBins, 1.0), std::vector<double>(kMelBins, 1.0)};
  CHECK(flat.forward(3, 7.0) == 0.0);
  CHECK_THROWS_AS(fit_standardizer(std::vector<MelSpectrogram>{}), DspError);
}

TEST_CASE("griffin_lim reconstructs a 440 Hz tone") {
  auto mel = mel_spectrogram(sine(440.0, 0.5, 12000));
  auto wave = griffin_lim(mel, 60);
  CHECK(wave.size() == (mel.frames - 1) * kHopSamples);
  double peak = 0.0;
  for (double v : wave) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 0.95 + 1e-12);
  const auto& c = MelFilterbank::standard().centers_hz();
  std::size_t k = 0;
  while (c[k] < 440.0) ++k;
  const double bandwidth = c[k] - c[k - 1];
  std::vector<double> mid(wave.begin() + 2400, wave.end() - 2400);
  CHECK(std::abs(dominant_frequency(mid, 200.0, 1000.0) - 440.0) <= bandwidth);
}

TEST_CASE("griffin_lim of an all-floor mel is near silent and deterministic") {
  MelSpectrogram mel(40, std::vector<double>(40 * kMelBins, kLogFloor));
  auto a = griffin_lim(mel, 10);
  auto b = griffin_lim(mel, 10);
  double sq = 0.0;
  for (double v : a) sq += v * v;
  CHECK(std::sqrt(sq / static_cast<double>(a.size())) < 1e-3);
  CHECK(a == b);
}

TEST_CASE("file formats") {
  auto dir = std::filesystem::temp_directory_path() / "polyglot_dsp_io";
  std::filesystem::create_directories(dir);
  auto x = sine(300.0, 0.8, 5000);
  write_wav(dir / "a.wav", x);
  auto y = read_wav(dir / "a.wav");
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) <= 1.0 / 32767.0);

  auto mel = mel_spectrogram(x);
  write_mel(dir / "a.mel", mel);
  CHECK(read_mel_frames(dir / "a.mel") == mel.frames);
  auto back = read_mel(dir / "a.mel");
  CHECK(back.values == quantize_f32(mel).values);
  CHECK(std::filesystem::file_size(dir / "a.mel") == 12 + mel.frames * 80 * 4);

  auto f0 = estimate_f0(x);
  write_f0(dir / "a.f0", f0);
  auto f0b = read_f0(dir / "a.f0");
  CHECK(f0b.f0_hz == f0.f0_hz);
  CHECK(f0b.voiced == f0.voiced);

  std::ofstream(dir / "bad.mel", std::ios::binary) << "XXXX00000000";
  CHECK_THROWS_AS(read_mel(dir / "bad.mel"), DspError);
  std::filesystem::remove_all(dir);
}
