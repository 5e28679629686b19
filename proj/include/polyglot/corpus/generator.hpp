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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyglot/corpus/manifest.hpp"
#include "polyglot/numerics/rng.hpp"

namespace polyglot::corpus {

struct CorpusConfig {
  std::vector<std::string> locales{"loc0", "loc1", "loc2"};
  std::size_t speakers_per_locale = 3;
  std::size_t utterances_per_speaker = 20;
  std::size_t phonemes_per_utterance = 8;
  std::size_t phonemes_per_locale = 10;
  std::string target_speaker;               // default: first speaker of the first locale
  std::vector<std::string> target_locales;  // default: the second locale

  static CorpusConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws CorpusError on anything generate_corpus cannot honour.
  void check() const;
};

CorpusConfig load_corpus_config(const std::filesystem::path& path);

inline std::string speaker_name(const std::string& locale, std::size_t index) {
  return locale + "_spk" + std::to_string(index);
}

/// Acoustic description of one phoneme in one locale. Fixed for all corpora.
struct PhonemeAcoustics {
  bool voiced = true;
  std::array<double, 3> formant_hz{};
  std::array<double, 3> bandwidth_hz{};
  std::array<double, 3> gain{};  // nepers
  double log_duration_mean = 0.0;
};

PhonemeAcoustics phoneme_acoustics(std::size_t accent_index, int phoneme);

/// Locale-wide spectral colouring that every phoneme of the locale carries.
struct AccentColour {
  std::size_t order = 0;
  double gain = 0.0;  // nepers
};
AccentColour accent_colour(std::size_t accent_index, std::size_t locale_count);

/// Draws per-phoneme durations from the phoneme's lognormal, clamped to [8, 40].
std::vector<int> draw_durations(std::size_t accent_index, const std::vector<int>& phonemes, numerics::Rng& rng);

/// Harmonic-plus-noise rendering. Output length is (sum(durations) - 1) * hop,
/// so the mel frame count equals sum(durations). Samples lie in [-1, 1].
std::vector<double> render_utterance(const LocaleInfo& locale, std::size_t locale_count, const SpeakerProfile& speaker,
                                     const std::vector<int>& phonemes, const std::vector<int>& durations,
                                     std::uint64_t render_seed);

/// Writes manifest.jsonl plus wav/, mel/ and f0/ under out_dir.
CorpusManifest generate_corpus(const CorpusConfig& config, std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace polyglot::corpus
