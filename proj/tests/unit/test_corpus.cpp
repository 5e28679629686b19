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
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "polyglot/corpus/centroid.hpp"
#include "polyglot/corpus/generator.hpp"
#include "polyglot/dsp/audio_io.hpp"

using namespace polyglot;
using namespace polyglot::corpus;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const CorpusError& e) {
    return e.what();
  }
  return "";
}

// Train on even utterance indices, score odd ones.
double heldout_accuracy(const CorpusManifest& m, bool by_locale) {
  std::map<std::string, int> seen;
  std::vector<std::string> train_labels, test_labels;
  std::vector<std::vector<double>> train_sigs, test_sigs;
  for (const auto& u : m.utterances) {
    const auto label = by_locale ? u.locale : u.speaker_id;
    auto sig = mel_signature(m.load_mel(u));
    if (seen[u.speaker_id]++ % 2 == 0) {
      train_labels.push_back(label);
      train_sigs.push_back(std::move(sig));
    } else {
      test_labels.push_back(label);
      test_sigs.push_back(std::move(sig));
    }
  }
  CentroidClassifier c;
  c.fit(train_labels, train_sigs);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < test_sigs.size(); ++i) hit += c.predict(test_sigs[i]) == test_labels[i];
  return static_cast<double>(hit) / static_cast<double>(test_sigs.size());
}

}  // namespace

TEST_CASE("default corpus is byte-identical across runs with the same seed") {
  const auto& a = testing::default_corpus();
  const auto dir = testing::scratch_dir("default_again");
  const auto b = generate_corpus(CorpusConfig{}, 7, dir);
  CHECK(a == b);
  CHECK(slurp(a.root / "manifest.jsonl") == slurp(dir / "manifest.jsonl"));
  for (const auto& u : a.utterances)
    for (const auto* rel : {&u.wav_path, &u.mel_path, &u.f0_path})
      CHECK(slurp(a.resolve(*rel)) == slurp(dir / *rel));

  const auto other = generate_corpus(testing::tiny_config(), 8, testing::scratch_dir("seed8"));
  CHECK(other.utterances.front().durations != testing::tiny_corpus().utterances.front().durations);
}

TEST_CASE("default corpus shape and roles") {
  const auto& m = testing::default_corpus();
  CHECK(m.locales.size() == 3);
  CHECK(m.speakers.size() == 9);
  CHECK(m.utterances.size() == 180);
  CHECK(m.target_speaker().id == "loc0_spk0");
  CHECK(m.speakers_with_role(SpeakerRole::source).size() == 3);
  for (const auto* s : m.speakers_with_role(SpeakerRole::source)) CHECK(s->native_locale == "loc1");
  CHECK(m.speakers_with_role(SpeakerRole::supporting).size() == 5);
  for (const auto& s : m.speakers) {
    double n2 = 0.0;
    for (double v : s.embedding) n2 += v * v;
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.f0_mean_hz >= 80.0);
    CHECK(s.f0_mean_hz <= 350.0);
  }
}

TEST_CASE("durations sum to mel frames and stay within [8, 40]") {
  const auto& m = testing::default_corpus();
  for (const auto& u : m.utterances) {
    CHECK(u.total_duration() == u.frames);
    CHECK(m.load_mel(u).frames == u.frames);
    CHECK(m.load_f0(u).frames() == u.frames);
    CHECK(dsp::frame_count(dsp::read_wav(m.resolve(u.wav_path)).size()) == u.frames);
    for (int d : u.durations) {
      CHECK(d >= 8);
      CHECK(d <= 40);
    }
  }
}

TEST_CASE("nearest-centroid classifier separates held-out speakers and locales") {
  const auto& m = testing::default_corpus();
  CHECK(heldout_accuracy(m, false) >= 0.9);
  CHECK(heldout_accuracy(m, true) >= 0.9);
}

TEST_CASE("two speakers on the same phoneme sequence differ spectrally but share boundaries") {
  const auto& m = testing::default_corpus();
  const auto& loc = m.locale("loc1");
  const std::vector<int> phonemes{0, 3, 5, 1, 7};
  numerics::Rng rng(4);
  const auto durations = draw_durations(loc.accent_index, phonemes, rng);
  const auto& s1 = m.speaker("loc1_spk1");
  const auto& s2 = m.speaker("loc2_spk2");
  const auto w1 = render_utterance(loc, 3, s1, phonemes, durations, 99);
  const auto w2 = render_utterance(loc, 3, s2, phonemes, durations, 99);
  CHECK(w1.size() == w2.size());
  const auto m1 = dsp::mel_spectrogram(w1);
  const auto m2 = dsp::mel_spectrogram(w2);
  REQUIRE(m1.frames == m2.frames);
  int total = 0;
  for (int d : durations) total += d;
  CHECK(m1.frames == static_cast<std::size_t>(total));
  double l2 = 0.0;
  for (std::size_t i = 0; i < m1.values.size(); ++i) l2 += (m1.values[i] - m2.values[i]) * (m1.values[i] - m2.values[i]);
  CHECK(std::sqrt(l2) > 1.0);

  // The biggest spectral jumps of each rendering land on the shared phoneme boundaries.
  std::vector<std::size_t> boundaries;
  std::size_t acc = 0;
  for (std::size_t k = 0; k + 1 < durations.size(); ++k) boundaries.push_back(acc += durations[k]);
  for (const auto* mel : {&m1, &m2}) {
    std::vector<std::pair<double, std::size_t>> jumps;
    for (std::size_t t = 1; t < mel->frames; ++t) {
      double d = 0.0;
      for (std::size_t b = 0; b < 80; ++b) d += std::abs(mel->at(t, b) - mel->at(t - 1, b));
      jumps.push_back({d, t});
    }
    std::sort(jumps.rbegin(), jumps.rend());
    std::size_t near = 0;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
      for (std::size_t b : boundaries)
        if (jumps[i].second + 2 >= b && jumps[i].second <= b + 2) {
          ++near;
          break;
        }
    }
    CHECK(near >= boundaries.size() - 1);
  }
}

TEST_CASE("manifest save/load round trip") {
  const auto& m = testing::tiny_corpus();
  const auto dir = testing::scratch_dir("roundtrip");
  save_manifest(m, m.root / "copy.jsonl");
  const auto back = load_manifest(m.root / "copy.jsonl");
  CHECK(back == m);
  CHECK(back.root == m.root);
  CHECK_NOTHROW(validate(back, true));
}

TEST_CASE("manifest integrity errors") {
  const auto& m = testing::tiny_corpus();
  const auto path = m.root / "manifest.jsonl";
  const std::string text = slurp(path);
  const auto bad = m.root / "bad.jsonl";

  SUBCASE("utterance naming an absent speaker") {
    const auto& u = m.utterances[2];
    auto corrupted = text;
    const auto at = corrupted.find("\"speaker\":\"" + u.speaker_id + "\"", corrupted.find("\"id\":\"" + u.id + "\""));
    corrupted.replace(at, 11 + u.speaker_id.size() + 1, "\"speaker\":\"ghost_speaker\"");
    spit(bad, corrupted);
    const auto err = error_of([&] { load_manifest(bad); });
    CHECK(err.find("ghost_speaker") != std::string::npos);
    CHECK(err.find(u.id) != std::string::npos);
    auto copy = m;
    copy.utterances[2].speaker_id = "ghost_speaker";
    CHECK_THROWS_AS(save_manifest(copy, bad), CorpusError);
  }
  SUBCASE("hand-corrupted durations") {
    const auto& u = m.utterances[1];
    std::string key = "\"id\":\"" + u.id + "\"";
    auto line_start = text.rfind('\n', text.find(key)) + 1;
    auto dpos = text.find("\"durations\":[", line_start) + 13;
    auto corrupted = text;
    corrupted.insert(dpos, "1");
    spit(bad, corrupted);
    const auto err = error_of([&] { load_manifest(bad); });
    CHECK(err.find(u.id) != std::string::npos);
    CHECK(err.find("durations") != std::string::npos);
  }
  SUBCASE("missing artifact file") {
    auto corrupted = text;
    const auto& u = m.utterances[0];
    const auto at = corrupted.find("\"" + u.mel_path + "\"");
    corrupted.replace(at, u.mel_path.size() + 2, "\"mel/nowhere.mel\"");
    spit(bad, corrupted);
    CHECK(error_of([&] { load_manifest(bad); }).find("nowhere") != std::string::npos);
    CHECK_NOTHROW(load_manifest(bad, false));
  }
  SUBCASE("phoneme outside the locale inventory") {
    auto copy = m;
    copy.utterances[0].phonemes[0] = 10;
    CHECK(error_of([&] { validate(copy, false); }).find(copy.utterances[0].id) != std::string::npos);
  }
  SUBCASE("two targets") {
    auto copy = m;
    copy.speakers[1].role = SpeakerRole::target;
    CHECK(error_of([&] { validate(copy, false); }).find("target") != std::string::npos);
  }
  SUBCASE("non-unit embedding") {
    auto copy = m;
    copy.speakers[0].embedding[0] += 0.1;
    CHECK_THROWS_AS(validate(copy, false), CorpusError);
  }
  SUBCASE("F0 mean outside the human range") {
    auto copy = m;
    copy.speakers[0].f0_mean_hz = 400.0;
    CHECK_THROWS_AS(validate(copy, false), CorpusError);
  }
  SUBCASE("sparse accent indices") {
    auto copy = m;
    copy.locales[2].accent_index = 5;
    CHECK_THROWS_AS(validate(copy, false), CorpusError);
  }
  SUBCASE("malformed JSON names the line") {
    spit(bad, text.substr(0, text.find('\n') + 1) + "{not json\n");
    CHECK(error_of([&] { load_manifest(bad); }).find(":2:") != std::string::npos);
  }
}

TEST_CASE("phoneme offsets concatenate inventories in accent order") {
  const auto& m = testing::tiny_corpus();
  CHECK(m.phoneme_offset("loc0") == 0);
  CHECK(m.phoneme_offset("loc1") == 10);
  CHECK(m.phoneme_offset("loc2") == 20);
  CHECK(m.total_phonemes() == 30);
}

TEST_CASE("embedding import normalizes and validates") {
  auto m = testing::tiny_corpus();
  const auto dir = testing::scratch_dir("emb");
  nlohmann::json j;
  std::vector<double> v(32, 0.0);
  v[3] = 2.0;
  j[m.speakers[1].id] = v;
  spit(dir / "emb.json", j.dump());
  import_embeddings(m, dir / "emb.json");
  CHECK(m.speakers[1].embedding[3] == 1.0);
  CHECK(m.speakers[0].embedding == testing::tiny_corpus().speakers[0].embedding);

  j = nlohmann::json::object();
  j["nobody"] = v;
  spit(dir / "emb.json", j.dump());
  CHECK(error_of([&] { import_embeddings(m, dir / "emb.json"); }).find("nobody") != std::string::npos);
  j = nlohmann::json::object();
  j[m.speakers[0].id] = std::vector<double>(5, 1.0);
  spit(dir / "emb.json", j.dump());
  CHECK_THROWS_AS(import_embeddings(m, dir / "emb.json"), CorpusError);
}

TEST_CASE("phoneme acoustics are fixed functions of locale and phoneme") {
  const auto a = phoneme_acoustics(1, 4);
  const auto b = phoneme_acoustics(1, 4);
  CHECK(a.formant_hz == b.formant_hz);
  CHECK(a.log_duration_mean == b.log_duration_mean);
  CHECK(phoneme_acoustics(2, 4).formant_hz != a.formant_hz);
  CHECK_FALSE(phoneme_acoustics(0, 3).voiced);
}

TEST_CASE("corpus config validation") {
  CHECK_NOTHROW(CorpusConfig{}.check());
  const auto j = nlohmann::json::parse(R"({"locales": 4, "speakers_per_locale": 2})");
  const auto c = CorpusConfig::from_json(j);
  CHECK(c.locales == std::vector<std::string>{"loc0", "loc1", "loc2", "loc3"});
  CHECK(CorpusConfig::from_json(c.to_json()).to_json() == c.to_json());
  CHECK_THROWS_AS(CorpusConfig::from_json(nlohmann::json::parse(R"({"locales": 1})")), CorpusError);
  CHECK_THROWS_AS(CorpusConfig::from_json(nlohmann::json::parse(R"({"speakers_per_locale": 1})")), CorpusError);
  CHECK_THROWS_AS(CorpusConfig::from_json(nlohmann::json::parse(R"({"target_speaker": "x"})")), CorpusError);
  CHECK_THROWS_AS(CorpusConfig::from_json(nlohmann::json::parse(R"({"target_locales": ["loc0"]})")), CorpusError);
  CHECK_THROWS_AS(CorpusConfig::from_json(nlohmann::json::parse(R"({"locales": "many"})")), CorpusError);
}

TEST_CASE("centroid classifier basics") {
  CentroidClassifier c;
  c.fit({"a", "a", "b", "b"}, {{1, 0}, {1, 0.2}, {0, 1}, {0.1, 1}});
  CHECK(c.predict(std::vector<double>{2, 0}) == "a");
  CHECK(c.predict(std::vector<double>{0, 3}) == "b");
  CHECK(c.labels() == std::vector<std::string>{"a", "b"});
  CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
}
