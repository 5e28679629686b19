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

#include <algorithm>
#include <fstream>

#include "polyglot/pipeline/config.hpp"

namespace polyglot::pipeline {

namespace fs = std::filesystem;

void PipelineConfig::check() const {
  if (output_dir.empty()) throw PipelineError("output_dir is required");
  if (!manifest) {
    try {
      corpus.check();
    } catch (const corpus::CorpusError& e) {
      throw PipelineError(std::string("corpus: ") + e.what());
    }
  }
  vc.check();
  acoustic.check();
  if (griffin_lim_iterations < 1) throw PipelineError("griffin_lim_iterations must be positive");
  std::vector<std::string> sorted = target_locales;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw PipelineError("target_locales lists a locale twice");
  if (!manifest) {
    for (const auto& l : target_locales)
      if (std::find(corpus.locales.begin(), corpus.locales.end(), l) == corpus.locales.end())
        throw PipelineError("target locale " + l + " is not a corpus locale");
  }
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j{{"output_dir", output_dir.string()},
                   {"target_speaker", target_speaker},
                   {"target_locales", target_locales},
                   {"seeds", {{"corpus", seeds.corpus}, {"vc", seeds.vc}, {"acoustic", seeds.acoustic}}},
                   {"vc", vc.to_json()},
                   {"acoustic", acoustic.to_json()},
                   {"vocoder", {{"griffin_lim_iterations", griffin_lim_iterations}}},
                   {"samples_per_locale", samples_per_locale}};
  if (manifest)
    j["corpus"] = {{"manifest", manifest->string()}};
  else
    j["corpus"] = {{"generate", corpus.to_json()}};
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const fs::path& base) {
  PipelineConfig c;
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() || base.empty() ? fs::path(p) : base / p; };
  try {
    for (const auto& [key, value] : j.items()) {
      static const std::vector<std::string> known{"output_dir", "corpus",   "target_speaker", "target_locales",
                                                  "seeds",      "vc",       "acoustic",       "vocoder",
                                                  "samples_per_locale"};
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw PipelineError("unknown pipeline config key '" + key + "'");
    }
    if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
    if (j.contains("corpus")) {
      const auto& cj = j.at("corpus");
      if (cj.contains("manifest")) c.manifest = resolve(cj.at("manifest").get<std::string>());
      if (cj.contains("generate")) c.corpus = corpus::CorpusConfig::from_json(cj.at("generate"));
      if (c.manifest && cj.contains("generate")) throw PipelineError("corpus takes either manifest or generate");
    }
    c.target_speaker = j.value("target_speaker", c.target_speaker);
    if (j.contains("target_locales")) c.target_locales = j.at("target_locales").get<std::vector<std::string>>();
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      c.seeds.corpus = s.value("corpus", c.seeds.corpus);
      c.seeds.vc = s.value("vc", c.seeds.vc);
      c.seeds.acoustic = s.value("acoustic", c.seeds.acoustic);
    }
    if (j.contains("vc")) c.vc = flow_vc::VcTrainConfig::from_json(j.at("vc"));
    if (j.contains("acoustic")) c.acoustic = acoustic::AcousticTrainConfig::from_json(j.at("acoustic"));
    if (j.contains("vocoder")) c.griffin_lim_iterations = j.at("vocoder").value("griffin_lim_iterations", 60);
    c.samples_per_locale = j.value("samples_per_locale", c.samples_per_locale);
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError(std::string("pipeline config: ") + e.what());
  }
  if (!c.manifest && c.corpus.target_locales.empty()) c.corpus.target_locales = c.target_locales;
  if (!c.manifest && c.corpus.target_speaker.empty()) c.corpus.target_speaker = c.target_speaker;
  c.check();
  return c;
}

fs::path PipelineConfig::corpus_manifest_path() const {
  return manifest ? *manifest : output_dir / "corpus" / "manifest.jsonl";
}

fs::path PipelineConfig::stage_dir(int stage) const { return output_dir / ("stage" + std::to_string(stage)); }

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open pipeline config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError("pipeline config " + path.string() + ": " + e.what());
  }
  return PipelineConfig::from_json(j, path.parent_path());
}

}  // namespace polyglot::pipeline
