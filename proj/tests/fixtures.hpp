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

#include "polyglot/corpus/generator.hpp"
#include "scratch.hpp"

namespace polyglot::testing {

inline corpus::CorpusConfig tiny_config() {
  corpus::CorpusConfig c;
  c.speakers_per_locale = 2;
  c.utterances_per_speaker = 3;
  c.phonemes_per_utterance = 5;
  return c;
}

/// Generated once per process.
inline const corpus::CorpusManifest& tiny_corpus() {
  static const auto m = corpus::generate_corpus(tiny_config(), 7, scratch_dir("tiny_corpus"));
  return m;
}

inline const corpus::CorpusManifest& default_corpus() {
  static const auto m = corpus::generate_corpus(corpus::CorpusConfig{}, 7, scratch_dir("default_corpus"));
  return m;
}

}  // namespace polyglot::testing
