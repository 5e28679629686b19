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

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyglot/corpus/manifest.hpp"

namespace polyglot::eval {

struct UtteranceScore {
  std::string utterance_id;
  std::string speaker_id;  // as labelled in the evaluated manifest
  std::string locale;
  std::map<std::string, double> speaker_cosine;  // per reference speaker centroid
  std::string nearest_speaker;
  std::string predicted_locale;
};

struct ObjectiveReport {
  std::vector<UtteranceScore> utterances;
  std::map<std::string, std::size_t> nearest_counts;    // speaker -> utterances nearest to it
  std::map<std::string, std::size_t> predicted_locales;  // locale -> utterances predicted
  double own_speaker_rate = 0.0;  // nearest speaker equals the labelled one
  double own_locale_rate = 0.0;   // predicted locale equals the labelled one

  double nearest_rate(const std::string& speaker) const;
  double locale_rate(const std::string& locale) const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Speaker and locale centroids are fitted on `reference`; every utterance of
/// `evaluated` is scored against them with mean-mel cosine.
ObjectiveReport objective_report(const corpus::CorpusManifest& reference, const corpus::CorpusManifest& evaluated);

}  // namespace polyglot::eval
