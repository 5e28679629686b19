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

#include <cstdio>
#include <sstream>

#include "polyglot/corpus/centroid.hpp"
#include "polyglot/eval/mushra.hpp"
#include "polyglot/eval/objective.hpp"

namespace polyglot::eval {

ObjectiveReport objective_report(const corpus::CorpusManifest& reference, const corpus::CorpusManifest& evaluated) {
  if (reference.utterances.empty()) throw EvalError("reference manifest has no utterances");
  if (evaluated.utterances.empty()) throw EvalError("evaluated manifest has no utterances");

  std::vector<std::string> speakers, locales;
  std::vector<std::vector<double>> sigs;
  for (const auto& u : reference.utterances) {
    speakers.push_back(u.speaker_id);
    locales.push_back(u.locale);
    sigs.push_back(corpus::mel_signature(reference.load_mel(u)));
  }
  corpus::CentroidClassifier by_speaker, by_locale;
  by_speaker.fit(speakers, sigs);
  by_locale.fit(locales, sigs);

  ObjectiveReport rep;
  std::size_t own_speaker = 0, own_locale = 0;
  for (const auto& u : evaluated.utterances) {
    const auto sig = corpus::mel_signature(evaluated.load_mel(u));
    UtteranceScore s{u.id, u.speaker_id, u.locale, {}, by_speaker.predict(sig), by_locale.predict(sig)};
    const auto sims = by_speaker.similarities(sig);
    for (std::size_t k = 0; k < sims.size(); ++k) s.speaker_cosine[by_speaker.labels()[k]] = sims[k];
    ++rep.nearest_counts[s.nearest_speaker];
    ++rep.predicted_locales[s.predicted_locale];
    own_speaker += s.nearest_speaker == s.speaker_id;
    own_locale += s.predicted_locale == s.locale;
    rep.utterances.push_back(std::move(s));
  }
  const double n = static_cast<double>(rep.utterances.size());
  rep.own_speaker_rate = static_cast<double>(own_speaker) / n;
  rep.own_locale_rate = static_cast<double>(own_locale) / n;
  return rep;
}

double ObjectiveReport::nearest_rate(const std::string& speaker) const {
  const auto it = nearest_counts.find(speaker);
  return it == nearest_counts.end() ? 0.0
                                    : static_cast<double>(it->second) / static_cast<double>(utterances.size());
}

double ObjectiveReport::locale_rate(const std::string& locale) const {
  const auto it = predicted_locales.find(locale);
  return it == predicted_locales.end() ? 0.0
                                       : static_cast<double>(it->second) / static_cast<double>(utterances.size());
}

nlohmann::json ObjectiveReport::to_json() const {
  nlohmann::json j;
  j["utterances"] = nlohmann::json::array();
  for (const auto& u : utterances)
    j["utterances"].push_back({{"id", u.utterance_id},
                               {"speaker", u.speaker_id},
                               {"locale", u.locale},
                               {"speaker_cosine", u.speaker_cosine},
                               {"nearest_speaker", u.nearest_speaker},
                               {"predicted_locale", u.predicted_locale}});
  j["nearest_counts"] = nearest_counts;
  j["predicted_locales"] = predicted_locales;
  j["own_speaker_rate"] = own_speaker_rate;
  j["own_locale_rate"] = own_locale_rate;
  return j;
}

std::string ObjectiveReport::to_text() const {
  std::ostringstream os;
  char buf[64];
  os << utterances.size() << " utterances scored\n";
  std::snprintf(buf, sizeof buf, "%.3f", own_speaker_rate);
  os << "nearest to own speaker centroid: " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.3f", own_locale_rate);
  os << "classified as own locale:        " << buf << "\nnearest speaker:\n";
  for (const auto& [id, n] : nearest_counts) os << "  " << id << "  " << n << '\n';
  os << "predicted locale:\n";
  for (const auto& [id, n] : predicted_locales) os << "  " << id << "  " << n << '\n';
  return os.str();
}

}  // namespace polyglot::eval
