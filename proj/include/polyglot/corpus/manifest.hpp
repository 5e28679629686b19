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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polyglot/dsp/features.hpp"

namespace polyglot::corpus {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kEmbeddingDim = 32;

enum class SpeakerRole { source, target, supporting };
std::string to_string(SpeakerRole role);
SpeakerRole parse_role(std::string_view text);

struct LocaleInfo {
  std::string id;
  std::size_t accent_index = 0;
  std::size_t phoneme_count = 0;

  bool operator==(const LocaleInfo&) const = default;
};

/// Generator-side voice factors beyond pitch and formant scaling.
struct VoiceTraits {
  double spectral_tilt = 0.0;        // log-amplitude slope per log-frequency
  double breathiness = 0.0;          // aspiration noise share, [0, 1)
  std::size_t timbre_order = 0;      // index of the cosine timbre curve
  double timbre_gain = 0.0;          // nepers

  bool operator==(const VoiceTraits&) const = default;
};

struct SpeakerProfile {
  std::string id;
  std::string native_locale;
  SpeakerRole role = SpeakerRole::supporting;
  std::vector<double> embedding;  // kEmbeddingDim, unit L2 norm
  double f0_mean_hz = 0.0;
  double f0_std_hz = 0.0;
  double formant_shift = 1.0;
  VoiceTraits traits;

  bool operator==(const SpeakerProfile&) const = default;
};

struct Utterance {
  std::string id;
  std::string speaker_id;
  std::string locale;
  std::vector<int> phonemes;   // per-locale inventory ids
  std::vector<int> durations;  // frames per phoneme
  std::string wav_path;        // relative to the manifest directory; empty for mel-only data
  std::string mel_path;
  std::string f0_path;
  std::size_t frames = 0;
  std::uint64_t render_seed = 0;
  std::string source_utterance;  // set on converted utterances

  std::size_t total_duration() const;
  bool operator==(const Utterance&) const = default;
};

struct CorpusManifest {
  std::vector<LocaleInfo> locales;
  std::vector<SpeakerProfile> speakers;
  std::vector<Utterance> utterances;
  std::filesystem::path root;  // artifact paths resolve against this

  const LocaleInfo* find_locale(std::string_view id) const;
  const SpeakerProfile* find_speaker(std::string_view id) const;
  const LocaleInfo& locale(std::string_view id) const;
  const SpeakerProfile& speaker(std::string_view id) const;
  const SpeakerProfile& target_speaker() const;
  std::vector<const SpeakerProfile*> speakers_with_role(SpeakerRole role) const;

  /// Offset of a locale's inventory in the concatenation of all inventories.
  std::size_t phoneme_offset(std::string_view locale) const;
  std::size_t total_phonemes() const;

  std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
  dsp::MelSpectrogram load_mel(const Utterance& u) const;
  dsp::F0Track load_f0(const Utterance& u) const;

  bool operator==(const CorpusManifest& other) const {
    return locales == other.locales && speakers == other.speakers && utterances == other.utterances;
  }
};

/// Referential integrity, inventory bounds, duration/frame agreement, unit
/// embeddings, one target speaker. With check_files, every referenced file
/// must exist and each mel header must agree with the utterance frames.
void validate(const CorpusManifest& manifest, bool check_files);

/// JSON lines: one header line (locales, speakers), then one line per utterance.
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest load_manifest(const std::filesystem::path& path, bool check_files = true);

/// Replaces speaker embeddings from a JSON object {speaker_id: [32 numbers]}.
/// Vectors are L2-normalized on import.
void import_embeddings(CorpusManifest& manifest, const std::filesystem::path& path);

std::vector<double> normalized(std::vector<double> v);

}  // namespace polyglot::corpus
