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

#include "polyglot/corpus/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "../dsp/fft.hpp"
#include "polyglot/dsp/audio_io.hpp"

namespace polyglot::corpus {

using numerics::Rng;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTopHarmonicHz = 11000.0;
constexpr double kTargetRms = 0.08;
constexpr double kPeakLimit = 0.95;
constexpr std::uint64_t kInventorySeed = 0x1a2b3c4d5e6f7081ULL;

// Amplitude scales in nepers; their ratio sets how strongly speakers and
// locales separate in mean log-mel space.
constexpr double kAccentGain = 1.6;
constexpr double kTimbreGain = 3.4;
// Speakers colour the upper band, locales the formant band. Each voice owns
// a distinct cosine curve over log-frequency within its band, so colours are
// mutually orthogonal and smooth enough to survive the mel filterbank.
constexpr double kTimbreLoHz = 3500.0;
constexpr double kTimbreHiHz = 11000.0;
constexpr double kAccentLoHz = 400.0;
constexpr double kAccentHiHz = 3300.0;
constexpr double kBandTaper = 0.08;

double gauss_bump(double f, double center, double width) {
  const double u = (f - center) / width;
  return std::exp(-0.5 * u * u);
}

double log_lerp(double lo, double hi, double t) { return lo * std::exp(t * std::log(hi / lo)); }

double colour(double f, double lo_hz, double hi_hz, std::size_t order, double gain) {
  if (f <= 0.0) return 0.0;
  const double u = std::log(f / lo_hz) / std::log(hi_hz / lo_hz);
  if (u <= -kBandTaper || u >= 1.0 + kBandTaper) return 0.0;
  double w = 1.0;
  if (u < kBandTaper) w = 0.5 - 0.5 * std::cos(std::numbers::pi * (u + kBandTaper) / (2.0 * kBandTaper));
  if (u > 1.0 - kBandTaper) w = 0.5 - 0.5 * std::cos(std::numbers::pi * (1.0 + kBandTaper - u) / (2.0 * kBandTaper));
  return gain * w * std::cos(std::numbers::pi * static_cast<double>(order) * u);
}

struct Envelope {
  const PhonemeAcoustics* ph = nullptr;
  const SpeakerProfile* speaker = nullptr;
  const AccentColour* accent = nullptr;

  double log_amplitude(double f) const {
    const double shift = speaker->formant_shift;
    double v = speaker->traits.spectral_tilt * std::log(std::max(f, 50.0) / 1000.0);
    for (std::size_t i = 0; i < 3; ++i) v += ph->gain[i] * gauss_bump(f, shift * ph->formant_hz[i], ph->bandwidth_hz[i]);
    v += colour(f, kTimbreLoHz, kTimbreHiHz, speaker->traits.timbre_order, speaker->traits.timbre_gain);
    v += colour(f, kAccentLoHz, kAccentHiHz, accent->order, accent->gain);
    return v;
  }
};

// Stand-in for a pre-trained speaker encoder: the timbre curve sampled on a
// log grid, followed by the scalar voice factors.
std::vector<double> embed(const SpeakerProfile& s) {
  constexpr std::size_t kCurve = kEmbeddingDim - 5;
  std::vector<double> e;
  for (std::size_t i = 0; i < kCurve; ++i) {
    const double f = log_lerp(kTimbreLoHz, kTimbreHiHz, static_cast<double>(i) / static_cast<double>(kCurve - 1));
    e.push_back(colour(f, kTimbreLoHz, kTimbreHiHz, s.traits.timbre_order, 1.0));
  }
  e.push_back(std::log(s.f0_mean_hz / 155.0) / std::log(1.55));
  e.push_back((s.f0_std_hz / s.f0_mean_hz - 0.09) / 0.03);
  e.push_back((s.formant_shift - 1.01) / 0.07);
  e.push_back((s.traits.spectral_tilt + 1.1) / 0.1);
  e.push_back((s.traits.breathiness - 0.175) / 0.125);
  return normalized(std::move(e));
}

// q holds one stratified quantile in [0, 1) per scalar voice factor.
SpeakerProfile draw_speaker(std::string id, std::string locale, const std::array<double, 5>& q, std::size_t code) {
  auto lerp = [](double lo, double hi, double t) { return lo + (hi - lo) * t; };
  SpeakerProfile s;
  s.id = std::move(id);
  s.native_locale = std::move(locale);
  s.f0_mean_hz = log_lerp(100.0, 240.0, q[0]);
  s.f0_std_hz = s.f0_mean_hz * lerp(0.06, 0.12, q[1]);
  s.formant_shift = lerp(0.94, 1.08, q[2]);
  s.traits.spectral_tilt = lerp(-1.2, -1.0, q[3]);
  s.traits.breathiness = lerp(0.05, 0.3, q[4]);
  s.traits.timbre_order = code + 1;
  s.traits.timbre_gain = kTimbreGain;
  s.embedding = embed(s);
  return s;
}

}  // namespace

CorpusConfig CorpusConfig::from_json(const json& j) {
  CorpusConfig c;
  if (!j.is_object()) throw CorpusError("corpus config must be a JSON object");
  try {
    if (j.contains("locales")) {
      if (j["locales"].is_number_integer()) {
        const auto n = j["locales"].get<std::size_t>();
        c.locales.clear();
        for (std::size_t i = 0; i < n; ++i) c.locales.push_back("loc" + std::to_string(i));
      } else {
        c.locales = j["locales"].get<std::vector<std::string>>();
      }
    }
    c.speakers_per_locale = j.value("speakers_per_locale", c.speakers_per_locale);
    c.utterances_per_speaker = j.value("utterances_per_speaker", c.utterances_per_speaker);
    c.phonemes_per_utterance = j.value("phonemes_per_utterance", c.phonemes_per_utterance);
    c.phonemes_per_locale = j.value("phonemes_per_locale", c.phonemes_per_locale);
    c.target_speaker = j.value("target_speaker", c.target_speaker);
    if (j.contains("target_locales")) c.target_locales = j["target_locales"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw CorpusError(std::string("corpus config: ") + e.what());
  }
  c.check();
  return c;
}

json CorpusConfig::to_json() const {
  return json{{"locales", locales},
              {"speakers_per_locale", speakers_per_locale},
              {"utterances_per_speaker", utterances_per_speaker},
              {"phonemes_per_utterance", phonemes_per_utterance},
              {"phonemes_per_locale", phonemes_per_locale},
              {"target_speaker", target_speaker},
              {"target_locales", target_locales}};
}

void CorpusConfig::check() const {
  if (locales.size() < 2) throw CorpusError("corpus config needs at least 2 locales");
  if (std::set<std::string>(locales.begin(), locales.end()).size() != locales.size())
    throw CorpusError("corpus config has duplicate locale names");
  for (const auto& l : locales)
    if (l.empty()) throw CorpusError("corpus config has an empty locale name");
  if (speakers_per_locale < 2) throw CorpusError("corpus config needs at least 2 speakers per locale");
  if (utterances_per_speaker < 1) throw CorpusError("corpus config needs at least 1 utterance per speaker");
  if (phonemes_per_utterance < 1) throw CorpusError("corpus config needs at least 1 phoneme per utterance");
  if (phonemes_per_locale < 2) throw CorpusError("corpus config needs at least 2 phonemes per locale");
  std::string target = target_speaker.empty() ? speaker_name(locales.front(), 0) : target_speaker;
  std::string target_locale;
  for (const auto& l : locales)
    for (std::size_t i = 0; i < speakers_per_locale; ++i)
      if (speaker_name(l, i) == target) target_locale = l;
  if (target_locale.empty()) throw CorpusError("target speaker '" + target + "' is not generated by this config");
  for (const auto& l : target_locales) {
    if (std::find(locales.begin(), locales.end(), l) == locales.end())
      throw CorpusError("target locale '" + l + "' is not in the locale list");
    if (l == target_locale) throw CorpusError("target locale '" + l + "' is the target speaker's native locale");
  }
}

CorpusConfig load_corpus_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus config " + path.string());
  try {
    return CorpusConfig::from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
}

PhonemeAcoustics phoneme_acoustics(std::size_t accent_index, int phoneme) {
  Rng r = Rng(kInventorySeed).split(accent_index).split(static_cast<std::uint64_t>(phoneme));
  PhonemeAcoustics p;
  // Roughly one phoneme in four is a fricative.
  p.voiced = (phoneme % 4) != 3;
  if (p.voiced) {
    p.formant_hz = {r.uniform(280.0, 850.0), r.uniform(900.0, 2400.0), r.uniform(2400.0, 3400.0)};
    p.bandwidth_hz = {r.uniform(70.0, 110.0), r.uniform(100.0, 160.0), r.uniform(150.0, 250.0)};
    p.gain = {r.uniform(2.4, 3.0), r.uniform(1.8, 2.6), r.uniform(1.2, 2.0)};
  } else {
    const double c = r.uniform(2500.0, 7000.0);
    p.formant_hz = {c, c * r.uniform(1.2, 1.5), r.uniform(900.0, 1800.0)};
    p.bandwidth_hz = {0.18 * c, 0.25 * c, 300.0};
    p.gain = {r.uniform(2.2, 3.0), r.uniform(1.2, 2.0), r.uniform(0.3, 0.8)};
  }
  p.log_duration_mean = std::log(r.uniform(11.0, 20.0));
  return p;
}

AccentColour accent_colour(std::size_t accent_index, std::size_t locale_count) {
  AccentColour a;
  a.order = accent_index + 1;
  a.gain = kAccentGain;
  return a;
}

std::vector<int> draw_durations(std::size_t accent_index, const std::vector<int>& phonemes, Rng& rng) {
  std::vector<int> d;
  d.reserve(phonemes.size());
  for (int p : phonemes) {
    const double mu = phoneme_acoustics(accent_index, p).log_duration_mean;
    const double v = std::exp(rng.normal(mu, 0.3));
    d.push_back(std::clamp(static_cast<int>(std::lround(v)), 8, 40));
  }
  return d;
}

std::vector<double> render_utterance(const LocaleInfo& locale, std::size_t locale_count, const SpeakerProfile& speaker,
                                     const std::vector<int>& phonemes, const std::vector<int>& durations,
                                     std::uint64_t render_seed) {
  if (phonemes.empty() || phonemes.size() != durations.size())
    throw CorpusError("render: phoneme and duration arrays disagree");
  std::size_t frames = 0;
  for (int d : durations) {
    if (d < 1) throw CorpusError("render: non-positive duration");
    frames += static_cast<std::size_t>(d);
  }
  if (frames < 2) throw CorpusError("render: utterance must span at least 2 frames");
  const std::size_t hop = dsp::kHopSamples;
  const std::size_t length = (frames - 1) * hop;
  Rng rng(render_seed);

  std::vector<PhonemeAcoustics> acoustics;
  for (int p : phonemes) acoustics.push_back(phoneme_acoustics(locale.accent_index, p));
  const auto accent = accent_colour(locale.accent_index, locale_count);

  // Frame-level phoneme index and pitch contour through per-phoneme knots.
  std::vector<std::size_t> owner(frames);
  std::vector<double> knot_t, knot_v;
  {
    Rng pr = rng.split("pitch");
    const double rel = speaker.f0_std_hz / speaker.f0_mean_hz;
    double ar = 0.0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < durations.size(); ++k) {
      const auto d = static_cast<std::size_t>(durations[k]);
      for (std::size_t t = start; t < start + d; ++t) owner[t] = k;
      ar = 0.6 * ar + 0.8 * pr.normal();
      const double centre = static_cast<double>(start) + 0.5 * static_cast<double>(d);
      knot_t.push_back(centre);
      knot_v.push_back(std::log(speaker.f0_mean_hz) + rel * ar - 0.08 * (centre / static_cast<double>(frames) - 0.5));
      start += d;
    }
  }
  std::vector<double> f0_frame(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const double x = static_cast<double>(t);
    double v;
    if (x <= knot_t.front()) {
      v = knot_v.front();
    } else if (x >= knot_t.back()) {
      v = knot_v.back();
    } else {
      std::size_t k = 0;
      while (knot_t[k + 1] < x) ++k;
      const double a = (x - knot_t[k]) / (knot_t[k + 1] - knot_t[k]);
      v = (1.0 - a) * knot_v[k] + a * knot_v[k + 1];
    }
    f0_frame[t] = std::clamp(std::exp(v), 65.0, 390.0);
  }

  auto envelope_at = [&](std::size_t t) {
    Envelope e;
    e.ph = &acoustics[owner[t]];
    e.speaker = &speaker;
    e.accent = &accent;
    return e;
  };

  // Harmonic amplitudes per frame, interpolated per sample.
  const auto max_h = static_cast<std::size_t>(kTopHarmonicHz / 65.0) + 1;
  std::vector<double> amp(frames * max_h, 0.0);
  const double voiced_share = 1.0 - speaker.traits.breathiness;
  for (std::size_t t = 0; t < frames; ++t) {
    const auto e = envelope_at(t);
    if (!e.ph->voiced) continue;
    for (std::size_t h = 1; h <= max_h; ++h) {
      const double f = static_cast<double>(h) * f0_frame[t];
      if (f >= kTopHarmonicHz) break;
      amp[t * max_h + h - 1] = voiced_share * std::exp(e.log_amplitude(f));
    }
  }

  std::vector<double> out(length, 0.0);
  double phase = rng.split("phase").uniform(0.0, kTwoPi);
  for (std::size_t n = 0; n < length; ++n) {
    const std::size_t t0 = n / hop;
    const double a = static_cast<double>(n % hop) / static_cast<double>(hop);
    const double f0 = (1.0 - a) * f0_frame[t0] + a * f0_frame[t0 + 1];
    phase += kTwoPi * f0 / dsp::kSampleRate;
    if (phase > kTwoPi) phase -= kTwoPi;
    const double s1 = std::sin(phase), c1 = std::cos(phase);
    const double* row0 = &amp[t0 * max_h];
    const double* row1 = &amp[(t0 + 1) * max_h];
    const auto limit = std::min(max_h, static_cast<std::size_t>(kTopHarmonicHz / std::min(f0_frame[t0], f0_frame[t0 + 1])) + 1);
    double prev = 0.0, cur = s1, acc = 0.0;
    for (std::size_t h = 0; h < limit; ++h) {
      acc += ((1.0 - a) * row0[h] + a * row1[h]) * cur;
      const double next = 2.0 * c1 * cur - prev;
      prev = cur;
      cur = next;
    }
    out[n] = acc;
  }

  // Noise: white noise shaped frame by frame in the STFT domain.
  {
    Rng nr = rng.split("noise");
    std::vector<double> white(length);
    for (auto& v : white) v = nr.normal();
    std::size_t nframes = 0;
    auto spec = dsp::detail::stft_complex(white, nframes);
    for (std::size_t t = 0; t < nframes; ++t) {
      const auto e = envelope_at(t);
      const double g = e.ph->voiced ? speaker.traits.breathiness : 1.0;
      for (std::size_t k = 0; k < dsp::kFftBins; ++k) {
        const double f = static_cast<double>(k) * dsp::kSampleRate / static_cast<double>(dsp::kFftSize);
        spec[t * dsp::kFftBins + k] *= g * std::exp(e.log_amplitude(f));
      }
    }
    auto noise = dsp::detail::istft(spec, nframes);
    for (std::size_t n = 0; n < length; ++n) out[n] += noise[n];
  }

  double sq = 0.0;
  for (double v : out) sq += v * v;
  const double rms = std::sqrt(sq / static_cast<double>(length));
  if (!(rms > 0.0)) throw CorpusError("render produced silence");
  double scale = kTargetRms / rms;
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v) * scale);
  if (peak > kPeakLimit) scale *= kPeakLimit / peak;
  for (auto& v : out) v *= scale;
  return out;
}

CorpusManifest generate_corpus(const CorpusConfig& config, std::uint64_t seed, const std::filesystem::path& out_dir) {
  config.check();
  Rng root(seed);
  CorpusManifest m;
  m.root = out_dir;
  for (std::size_t i = 0; i < config.locales.size(); ++i)
    m.locales.push_back({config.locales[i], i, config.phonemes_per_locale});

  const std::string target = config.target_speaker.empty() ? speaker_name(config.locales.front(), 0)
                                                           : config.target_speaker;
  std::vector<std::string> target_locales = config.target_locales;
  if (target_locales.empty()) target_locales.push_back(config.locales[1]);

  // Latin-hypercube voice factors keep every pair of speakers apart.
  const std::size_t n_speakers = m.locales.size() * config.speakers_per_locale;
  std::array<std::vector<std::size_t>, 5> strata;
  for (std::size_t f = 0; f < strata.size(); ++f) {
    strata[f].resize(n_speakers);
    for (std::size_t i = 0; i < n_speakers; ++i) strata[f][i] = i;
    Rng sr = root.split("strata").split(f);
    sr.shuffle(strata[f]);
  }
  std::vector<std::size_t> codes(n_speakers);
  for (std::size_t i = 0; i < n_speakers; ++i) codes[i] = i;
  {
    Rng cr = root.split("codes");
    cr.shuffle(codes);
  }
  std::size_t speaker_index = 0;
  for (const auto& l : m.locales) {
    for (std::size_t i = 0; i < config.speakers_per_locale; ++i, ++speaker_index) {
      Rng sr = root.split("speaker").split(speaker_index);
      std::array<double, 5> q{};
      for (std::size_t f = 0; f < q.size(); ++f)
        q[f] = (static_cast<double>(strata[f][speaker_index]) + sr.uniform()) / static_cast<double>(n_speakers);
      auto s = draw_speaker(speaker_name(l.id, i), l.id, q, codes[speaker_index]);
      if (s.id == target) {
        s.role = SpeakerRole::target;
      } else if (std::find(target_locales.begin(), target_locales.end(), l.id) != target_locales.end()) {
        s.role = SpeakerRole::source;
      } else {
        s.role = SpeakerRole::supporting;
      }
      m.speakers.push_back(std::move(s));
    }
  }

  for (const char* sub : {"wav", "mel", "f0"}) std::filesystem::create_directories(out_dir / sub);
  for (std::size_t si = 0; si < m.speakers.size(); ++si) {
    const auto& s = m.speakers[si];
    const auto& loc = m.locale(s.native_locale);
    for (std::size_t j = 0; j < config.utterances_per_speaker; ++j) {
      Rng ur = root.split("utterance").split(si).split(j);
      Utterance u;
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_u%03zu", j);
      u.id = s.id + suffix;
      u.speaker_id = s.id;
      u.locale = loc.id;
      for (std::size_t k = 0; k < config.phonemes_per_utterance; ++k)
        u.phonemes.push_back(static_cast<int>(ur.below(loc.phoneme_count)));
      u.durations = draw_durations(loc.accent_index, u.phonemes, ur);
      u.frames = u.total_duration();
      u.render_seed = ur.next_u64();
      u.wav_path = "wav/" + u.id + ".wav";
      u.mel_path = "mel/" + u.id + ".mel";
      u.f0_path = "f0/" + u.id + ".f0";

      const auto wave = render_utterance(loc, m.locales.size(), s, u.phonemes, u.durations, u.render_seed);
      dsp::write_wav(m.resolve(u.wav_path), wave);
      const auto stored = dsp::read_wav(m.resolve(u.wav_path));
      const auto mel = dsp::mel_spectrogram(stored);
      if (mel.frames != u.frames) throw CorpusError("utterance " + u.id + ": rendered frame count mismatch");
      dsp::write_mel(m.resolve(u.mel_path), mel);
      dsp::write_f0(m.resolve(u.f0_path), dsp::estimate_f0(stored));
      m.utterances.push_back(std::move(u));
    }
  }
  save_manifest(m, out_dir / "manifest.jsonl");
  return m;
}

}  // namespace polyglot::corpus
