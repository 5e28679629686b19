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

#include "polyglot/corpus/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "polyglot/dsp/audio_io.hpp"

namespace polyglot::corpus {

using nlohmann::json;

std::string to_string(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::source: return "source";
    case SpeakerRole::target: return "target";
    case SpeakerRole::supporting: return "supporting";
  }
  return "supporting";
}

SpeakerRole parse_role(std::string_view text) {
  if (text == "source") return SpeakerRole::source;
  if (text == "target") return SpeakerRole::target;
  if (text == "supporting") return SpeakerRole::supporting;
  throw CorpusError("unknown speaker role '" + std::string(text) + "'");
}

std::size_t Utterance::total_duration() const {
  return static_cast<std::size_t>(std::accumulate(durations.begin(), durations.end(), 0LL));
}

const LocaleInfo* CorpusManifest::find_locale(std::string_view id) const {
  for (const auto& l : locales)
    if (l.id == id) return &l;
  return nullptr;
}

const SpeakerProfile* CorpusManifest::find_speaker(std::string_view id) const {
  for (const auto& s : speakers)
    if (s.id == id) return &s;
  return nullptr;
}

const LocaleInfo& CorpusManifest::locale(std::string_view id) const {
  if (auto* l = find_locale(id)) return *l;
  throw CorpusError("unknown locale '" + std::string(id) + "'");
}

const SpeakerProfile& CorpusManifest::speaker(std::string_view id) const {
  if (auto* s = find_speaker(id)) return *s;
  throw CorpusError("unknown speaker '" + std::string(id) + "'");
}

const SpeakerProfile& CorpusManifest::target_speaker() const {
  auto t = speakers_with_role(SpeakerRole::target);
  if (t.size() != 1) throw CorpusError("expected exactly one target speaker, found " + std::to_string(t.size()));
  return *t.front();
}

std::vector<const SpeakerProfile*> CorpusManifest::speakers_with_role(SpeakerRole role) const {
  std::vector<const SpeakerProfile*> out;
  for (const auto& s : speakers)
    if (s.role == role) out.push_back(&s);
  return out;
}

std::size_t CorpusManifest::phoneme_offset(std::string_view id) const {
  const auto& target = locale(id);
  std::size_t offset = 0;
  for (const auto& l : locales)
    if (l.accent_index < target.accent_index) offset += l.phoneme_count;
  return offset;
}

std::size_t CorpusManifest::total_phonemes() const {
  std::size_t n = 0;
  for (const auto& l : locales) n += l.phoneme_count;
  return n;
}

dsp::MelSpectrogram CorpusManifest::load_mel(const Utterance& u) const {
  auto mel = dsp::read_mel(resolve(u.mel_path));
  if (mel.frames != u.frames) {
    throw CorpusError("utterance " + u.id + ": mel file has " + std::to_string(mel.frames) + " frames, manifest says " +
                      std::to_string(u.frames));
  }
  return mel;
}

dsp::F0Track CorpusManifest::load_f0(const Utterance& u) const {
  auto f0 = dsp::read_f0(resolve(u.f0_path));
  if (f0.frames() != u.frames) throw CorpusError("utterance " + u.id + ": F0 track does not match frame count");
  return f0;
}

std::vector<double> normalized(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (!(n > 0.0) || !std::isfinite(n)) throw CorpusError("cannot normalize a zero or non-finite embedding");
  for (auto& x : v) x /= n;
  return v;
}

void validate(const CorpusManifest& m, bool check_files) {
  if (m.locales.empty()) throw CorpusError("manifest has no locales");
  std::set<std::size_t> accents;
  std::set<std::string> locale_ids;
  for (const auto& l : m.locales) {
    if (!locale_ids.insert(l.id).second) throw CorpusError("duplicate locale '" + l.id + "'");
    if (!accents.insert(l.accent_index).second) throw CorpusError("duplicate accent index in locale '" + l.id + "'");
    if (l.phoneme_count == 0) throw CorpusError("locale '" + l.id + "' has an empty phoneme inventory");
  }
  if (*accents.rbegin() != m.locales.size() - 1) throw CorpusError("accent indices are not dense 0..L-1");

  std::set<std::string> speaker_ids;
  std::size_t targets = 0;
  for (const auto& s : m.speakers) {
    if (!speaker_ids.insert(s.id).second) throw CorpusError("duplicate speaker '" + s.id + "'");
    if (!m.find_locale(s.native_locale))
      throw CorpusError("speaker '" + s.id + "' references missing locale '" + s.native_locale + "'");
    if (s.embedding.size() != kEmbeddingDim) throw CorpusError("speaker '" + s.id + "' embedding has wrong dimension");
    double n2 = 0.0;
    for (double x : s.embedding) n2 += x * x;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) throw CorpusError("speaker '" + s.id + "' embedding is not unit norm");
    if (!(s.f0_mean_hz >= 80.0 && s.f0_mean_hz <= 350.0))
      throw CorpusError("speaker '" + s.id + "' F0 mean outside [80, 350] Hz");
    if (!(s.f0_std_hz >= 0.0) || !(s.formant_shift > 0.0))
      throw CorpusError("speaker '" + s.id + "' has invalid voice statistics");
    if (s.role == SpeakerRole::target) ++targets;
  }
  if (targets != 1) throw CorpusError("expected exactly one target speaker, found " + std::to_string(targets));

  std::set<std::string> utt_ids;
  for (const auto& u : m.utterances) {
    if (!utt_ids.insert(u.id).second) throw CorpusError("duplicate utterance '" + u.id + "'");
    if (!m.find_speaker(u.speaker_id))
      throw CorpusError("utterance " + u.id + " references missing speaker '" + u.speaker_id + "'");
    const auto* loc = m.find_locale(u.locale);
    if (!loc) throw CorpusError("utterance " + u.id + " references missing locale '" + u.locale + "'");
    if (u.phonemes.empty() || u.phonemes.size() != u.durations.size())
      throw CorpusError("utterance " + u.id + ": phoneme and duration arrays disagree");
    for (int p : u.phonemes)
      if (p < 0 || static_cast<std::size_t>(p) >= loc->phoneme_count)
        throw CorpusError("utterance " + u.id + ": phoneme id " + std::to_string(p) + " not in " + u.locale +
                          " inventory");
    for (int d : u.durations)
      if (d < 1) throw CorpusError("utterance " + u.id + ": non-positive duration");
    if (u.total_duration() != u.frames) {
      throw CorpusError("utterance " + u.id + ": durations sum to " + std::to_string(u.total_duration()) +
                        " but frames = " + std::to_string(u.frames));
    }
    if (check_files) {
      for (const auto* rel : {&u.mel_path, &u.f0_path, &u.wav_path}) {
        if (rel->empty()) {
          if (rel == &u.wav_path) continue;
          throw CorpusError("utterance " + u.id + ": missing artifact path");
        }
        if (!std::filesystem::exists(m.resolve(*rel)))
          throw CorpusError("utterance " + u.id + ": file not found: " + *rel);
      }
      const auto frames = dsp::read_mel_frames(m.resolve(u.mel_path));
      if (frames != u.total_duration()) {
        throw CorpusError("utterance " + u.id + ": mel has " + std::to_string(frames) + " frames, durations sum to " +
                          std::to_string(u.total_duration()));
      }
    }
  }
}

namespace {

json speaker_json(const SpeakerProfile& s) {
  return json{{"id", s.id},
              {"native_locale", s.native_locale},
              {"role", to_string(s.role)},
              {"embedding", s.embedding},
              {"f0_mean_hz", s.f0_mean_hz},
              {"f0_std_hz", s.f0_std_hz},
              {"formant_shift", s.formant_shift},
              {"traits",
               {{"spectral_tilt", s.traits.spectral_tilt},
                {"breathiness", s.traits.breathiness},
                {"timbre_order", s.traits.timbre_order},
                {"timbre_gain", s.traits.timbre_gain}}}};
}

SpeakerProfile speaker_from(const json& j) {
  SpeakerProfile s;
  s.id = j.at("id").get<std::string>();
  s.native_locale = j.at("native_locale").get<std::string>();
  s.role = parse_role(j.at("role").get<std::string>());
  s.embedding = j.at("embedding").get<std::vector<double>>();
  s.f0_mean_hz = j.at("f0_mean_hz").get<double>();
  s.f0_std_hz = j.at("f0_std_hz").get<double>();
  s.formant_shift = j.at("formant_shift").get<double>();
  if (j.contains("traits")) {
    const auto& t = j["traits"];
    s.traits.spectral_tilt = t.value("spectral_tilt", 0.0);
    s.traits.breathiness = t.value("breathiness", 0.0);
    s.traits.timbre_order = t.value("timbre_order", std::size_t{0});
    s.traits.timbre_gain = t.value("timbre_gain", 0.0);
  }
  return s;
}

json utterance_json(const Utterance& u) {
  json j{{"kind", "utterance"},   {"id", u.id},
         {"speaker", u.speaker_id}, {"locale", u.locale},
         {"phonemes", u.phonemes},  {"durations", u.durations},
         {"frames", u.frames},      {"mel", u.mel_path},
         {"f0", u.f0_path},         {"render_seed", u.render_seed}};
  if (!u.wav_path.empty()) j["wav"] = u.wav_path;
  if (!u.source_utterance.empty()) j["source_utterance"] = u.source_utterance;
  return j;
}

Utterance utterance_from(const json& j) {
  Utterance u;
  u.id = j.at("id").get<std::string>();
  u.speaker_id = j.at("speaker").get<std::string>();
  u.locale = j.at("locale").get<std::string>();
  u.phonemes = j.at("phonemes").get<std::vector<int>>();
  u.durations = j.at("durations").get<std::vector<int>>();
  u.frames = j.at("frames").get<std::size_t>();
  u.mel_path = j.at("mel").get<std::string>();
  u.f0_path = j.at("f0").get<std::string>();
  u.render_seed = j.value("render_seed", std::uint64_t{0});
  u.wav_path = j.value("wav", std::string{});
  u.source_utterance = j.value("source_utterance", std::string{});
  return u;
}

}  // namespace

void save_manifest(const CorpusManifest& m, const std::filesystem::path& path) {
  validate(m, false);
  json header{{"kind", "header"}, {"format", "polyglot-manifest"}, {"version", 1}};
  header["locales"] = json::array();
  for (const auto& l : m.locales)
    header["locales"].push_back({{"id", l.id}, {"accent_index", l.accent_index}, {"phoneme_count", l.phoneme_count}});
  header["speakers"] = json::array();
  for (const auto& s : m.speakers) header["speakers"].push_back(speaker_json(s));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError("cannot write manifest " + path.string());
  out << header.dump() << '\n';
  for (const auto& u : m.utterances) out << utterance_json(u).dump() << '\n';
  if (!out) throw CorpusError("failed writing manifest " + path.string());
}

CorpusManifest load_manifest(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open manifest " + path.string());
  CorpusManifest m;
  m.root = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      const auto kind = j.at("kind").get<std::string>();
      if (!have_header) {
        if (kind != "header" || j.value("format", "") != "polyglot-manifest" || j.value("version", 0) != 1)
          throw CorpusError(path.string() + ": first line is not a version 1 manifest header");
        for (const auto& l : j.at("locales"))
          m.locales.push_back({l.at("id").get<std::string>(), l.at("accent_index").get<std::size_t>(),
                               l.at("phoneme_count").get<std::size_t>()});
        for (const auto& s : j.at("speakers")) m.speakers.push_back(speaker_from(s));
        have_header = true;
      } else {
        if (kind != "utterance") throw CorpusError("unexpected record kind '" + kind + "'");
        m.utterances.push_back(utterance_from(j));
      }
    } catch (const json::exception& e) {
      throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": schema error: " + e.what());
    }
  }
  if (!have_header) throw CorpusError(path.string() + ": empty manifest");
  validate(m, check_files);
  return m;
}

void import_embeddings(CorpusManifest& m, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open embedding file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw CorpusError(path.string() + ": expected an object keyed by speaker id");
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto s = std::find_if(m.speakers.begin(), m.speakers.end(), [&](const auto& sp) { return sp.id == it.key(); });
    if (s == m.speakers.end()) throw CorpusError("embedding file references unknown speaker '" + it.key() + "'");
    auto v = it.value().get<std::vector<double>>();
    if (v.size() != kEmbeddingDim)
      throw CorpusError("embedding for '" + it.key() + "' has " + std::to_string(v.size()) + " values");
    s->embedding = normalized(std::move(v));
  }
}

}  // namespace polyglot::corpus
