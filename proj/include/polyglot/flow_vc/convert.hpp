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

#include <filesystem>
#include <string>
#include <vector>

#include "polyglot/corpus/manifest.hpp"
#include "polyglot/flow_vc/vc_model.hpp"

namespace polyglot::flow_vc {

struct Conversion {
  corpus::Utterance utterance;  // id "<source>__to__<target>", durations copied verbatim
  dsp::MelSpectrogram mel;
  dsp::F0Track f0;  // raw track re-scaled to the target's pitch statistics
};

/// Voiced frames move from the source speaker's F0 statistics to the
/// target's: f' = mu_t + (f - mu_s) * sigma_t / sigma_s, floored at 20 Hz.
dsp::F0Track rescale_f0(const dsp::F0Track& f0, const corpus::SpeakerProfile& source,
                        const corpus::SpeakerProfile& target);

std::string converted_id(const std::string& source_utterance, const std::string& target_speaker);

/// z = forward(x, c_source), y = inverse(z, c_target). c_target swaps in the
/// target embedding and re-scaled F0 but keeps the source accent and phonemes.
/// The output mel is mel + D(y) - D(x), floored, where D destandardizes.
Conversion convert(const VcModel& model, const corpus::CorpusManifest& manifest, const corpus::Utterance& utt,
                   const dsp::MelSpectrogram& mel, const dsp::F0Track& f0, const corpus::SpeakerProfile& target);

/// As above, loading the source features from the manifest.
Conversion convert(const VcModel& model, const corpus::CorpusManifest& manifest, const corpus::Utterance& utt,
                   const corpus::SpeakerProfile& target);

/// Converts every source-role utterance in `locales` (all when empty) to the
/// target speaker and writes a mel-only manifest plus features under out_dir.
corpus::CorpusManifest convert_corpus(const VcModel& model, const corpus::CorpusManifest& manifest,
                                      const std::string& target_speaker, const std::filesystem::path& out_dir,
                                      const std::vector<std::string>& locales = {});

}  // namespace polyglot::flow_vc
