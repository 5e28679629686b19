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
#include <chrono>
#include <fstream>
#include <set>

#include "polyglot/acoustic/train.hpp"
#include "polyglot/dsp/audio_io.hpp"
#include "polyglot/eval/objective.hpp"
#include "polyglot/flow_vc/convert.hpp"
#include "polyglot/pipeline/pipeline.hpp"

namespace polyglot::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVcFile = "vc.fdt";
constexpr const char* kTtsFile = "tts.fdt";
constexpr const char* kVocoderFile = "vocoder.json";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Manifest plus every file it references.
std::string corpus_digest(const corpus::CorpusManifest& m, const fs::path& manifest_path) {
  std::string listing = "manifest\t" + sha256_file(manifest_path) + '\n';
  for (const auto& u : m.utterances)
    for (const auto* p : {&u.wav_path, &u.mel_path, &u.f0_path})
      if (!p->empty()) listing += *p + '\t' + sha256_file(m.resolve(*p)) + '\n';
  return sha256_bytes(listing);
}

struct Run {
  const PipelineConfig& config;
  StageLedger ledger;
  corpus::CorpusManifest manifest;
  std::string corpus_hash;
  std::string target;
  std::vector<std::string> locales;
};

std::vector<std::string> resolve_locales(const PipelineConfig& c, const corpus::CorpusManifest& m) {
  std::vector<std::string> out = c.target_locales;
  if (out.empty()) {
    std::set<std::string> s;
    for (const auto* sp : m.speakers_with_role(corpus::SpeakerRole::source)) s.insert(sp->native_locale);
    out.assign(s.begin(), s.end());
  }
  if (out.empty()) throw PipelineError("corpus has no source speakers, so there is no target locale");
  return out;
}

Run open_run(const PipelineConfig& c, bool generate) {
  c.check();
  const auto manifest_path = c.corpus_manifest_path();
  if (!fs::exists(manifest_path)) {
    if (c.manifest || !generate) throw PipelineError("corpus manifest " + manifest_path.string() + " is missing");
    corpus::generate_corpus(c.corpus, c.seeds.corpus, manifest_path.parent_path());
  }
  Run r{c, StageLedger::load(c.output_dir), corpus::load_manifest(manifest_path), {}, {}, {}};
  r.corpus_hash = corpus_digest(r.manifest, manifest_path);
  const auto& tgt = r.manifest.target_speaker();
  if (!c.target_speaker.empty() && c.target_speaker != tgt.id)
    throw PipelineError("configured target speaker " + c.target_speaker + " is not the corpus target " + tgt.id);
  r.target = tgt.id;
  r.locales = resolve_locales(c, r.manifest);
  for (const auto& l : r.locales) {
    if (!r.manifest.find_locale(l)) throw PipelineError("target locale " + l + " is not in the corpus");
    if (l == tgt.native_locale)
      throw PipelineError("target locale " + l + " is the target speaker's native locale; the pipeline is cross-lingual");
    bool has_source = false;
    for (const auto* sp : r.manifest.speakers_with_role(corpus::SpeakerRole::source))
      has_source = has_source || sp->native_locale == l;
    if (!has_source) throw PipelineError("target locale " + l + " has no source speakers in the corpus");
  }
  return r;
}

// Stages after the first refuse to run on a corpus that changed under them.
void require_corpus(const Run& r) {
  r.ledger.require_outputs("stage1");
  if (r.ledger.find("stage1")->inputs.at("corpus") != r.corpus_hash)
    throw PipelineError("corpus changed since stage 1 was run (hash mismatch); rerun stage 1");
}

nlohmann::json property_details(const eval::ObjectiveReport& rep, const std::string& target, const std::string& locale,
                                 const std::set<std::string>& rivals) {
  // Closer to the target centroid than to any rival's, by utterance.
  std::size_t closer = 0;
  for (const auto& u : rep.utterances) {
    const double t = u.speaker_cosine.at(target);
    bool best = true;
    for (const auto& s : rivals) best = best && t > u.speaker_cosine.at(s);
    closer += best;
  }
  return {{"utterances", rep.utterances.size()},
          {"nearest_target_rate", rep.nearest_rate(target)},
          {"target_locale_rate", rep.locale_rate(locale)},
          {"closer_than_sources_rate", static_cast<double>(closer) / static_cast<double>(rep.utterances.size())}};
}

std::set<std::string> source_speakers(const corpus::CorpusManifest& m, const std::string& locale) {
  std::set<std::string> out;
  for (const auto* sp : m.speakers_with_role(corpus::SpeakerRole::source))
    if (sp->native_locale == locale) out.insert(sp->id);
  return out;
}

LedgerEntry stage1(Run& r) {
  Stopwatch sw;
  const auto dir = r.config.stage_dir(1);
  fs::create_directories(dir);
  flow_vc::VcTrainReport rep;
  const auto model = flow_vc::train_vc(r.manifest, r.config.vc, r.config.seeds.vc, &rep);
  flow_vc::save_vc_model(model, dir / kVcFile);
  LedgerEntry e{"stage1", 1, "done", r.config.seeds.vc, {{"corpus", r.corpus_hash}}, {}, 0.0, {}};
  e.outputs["stage1"] = r.ledger.digest("stage1");
  e.details = {{"initial_nll", rep.initial_nll},
               {"final_nll", rep.final_nll},
               {"utterances", rep.utterances},
               {"speakers", rep.speakers},
               {"target_speaker", r.target},
               {"config", r.config.vc.to_json()}};
  e.wall_seconds = sw.seconds();
  return e;
}

LedgerEntry stage2(Run& r, const std::string& locale) {
  Stopwatch sw;
  require_corpus(r);
  const auto model = flow_vc::load_vc_model(r.config.stage_dir(1) / kVcFile);
  const auto dir = r.config.stage_dir(2) / locale;
  fs::remove_all(dir);
  const auto converted = flow_vc::convert_corpus(model, r.manifest, r.target, dir, {locale});

  bool durations_identical = true;
  for (const auto& u : converted.utterances) {
    const auto src = std::find_if(r.manifest.utterances.begin(), r.manifest.utterances.end(),
                                   [&](const corpus::Utterance& s) { return s.id == u.source_utterance; });
    durations_identical = durations_identical && src != r.manifest.utterances.end() && src->durations == u.durations;
  }
  const auto key = "stage2:" + locale;
  LedgerEntry e{key, 2, "done", 0, {{"corpus", r.corpus_hash}, {"stage1", r.ledger.digest("stage1")}}, {}, 0.0, {}};
  e.outputs["stage2/" + locale] = r.ledger.digest("stage2/" + locale);
  e.details = property_details(eval::objective_report(r.manifest, converted), r.target, locale,
                               source_speakers(r.manifest, locale));
  e.details["durations_identical"] = durations_identical;
  e.details["locale"] = locale;
  e.wall_seconds = sw.seconds();
  return e;
}

LedgerEntry stage3(Run& r, const std::string& locale) {
  Stopwatch sw;
  require_corpus(r);
  r.ledger.require_outputs("stage2:" + locale);
  const auto data = corpus::load_manifest(r.config.stage_dir(2) / locale / "manifest.jsonl");
  acoustic::AcousticTrainReport rep;
  const auto model = acoustic::train_acoustic(data, r.config.acoustic, r.config.seeds.acoustic, &rep);
  const auto dir = r.config.stage_dir(3) / locale;
  fs::remove_all(dir);
  fs::create_directories(dir);
  acoustic::save_acoustic_model(model, dir / kTtsFile);

  // Free-running synthesis of the converted texts, scored against the originals.
  corpus::CorpusManifest synth;
  synth.locales = data.locales;
  synth.speakers = data.speakers;
  synth.root = dir / "eval";
  fs::create_directories(synth.root / "mel");
  for (const auto& u : data.utterances) {
    auto out = acoustic::synthesize(model, u.phonemes);
    corpus::Utterance s = u;
    s.id = u.id + "__tts";
    s.durations = out.durations;
    s.frames = out.mel.frames;
    s.mel_path = "mel/" + s.id + ".mel";
    s.f0_path.clear();
    s.wav_path.clear();
    dsp::write_mel(synth.resolve(s.mel_path), out.mel);
    synth.utterances.push_back(std::move(s));
  }
  const auto key = "stage3:" + locale;
  LedgerEntry e{key, 3, "done", r.config.seeds.acoustic, {}, {}, 0.0, {}};
  e.inputs["stage2/" + locale] = r.ledger.digest("stage2/" + locale);
  e.outputs["stage3/" + locale] = r.ledger.digest("stage3/" + locale);
  e.details = property_details(eval::objective_report(r.manifest, synth), r.target, locale,
                               source_speakers(r.manifest, locale));
  e.details["final_mel_l1"] = rep.final_mel_l1;
  e.details["params"] = model.params.scalar_count();
  e.details["variant"] = acoustic::to_string(model.config.variant);
  e.details["locale"] = locale;
  e.wall_seconds = sw.seconds();
  return e;
}

LedgerEntry stage4(Run& r) {
  Stopwatch sw;
  require_corpus(r);
  LedgerEntry e{"stage4", 4, "done", 0, {}, {}, 0.0, {}};
  std::vector<dsp::MelSpectrogram> mels;
  std::vector<std::string> ids;
  for (const auto& u : r.manifest.utterances) {
    if (u.speaker_id != r.target) continue;
    e.inputs["corpus/" + u.mel_path] = sha256_file(r.manifest.resolve(u.mel_path));
    mels.push_back(r.manifest.load_mel(u));
    ids.push_back(u.id);
  }
  if (mels.empty()) throw PipelineError("target speaker " + r.target + " has no utterances");
  const auto st = dsp::fit_standardizer(mels);
  const auto dir = r.config.stage_dir(4);
  fs::create_directories(dir);
  nlohmann::json v{{"speaker", r.target},
                   {"utterances", ids},
                   {"standardizer", {{"min", st.min}, {"max", st.max}}},
                   {"griffin_lim_iterations", r.config.griffin_lim_iterations},
                   {"sample_rate", dsp::kSampleRate},
                   {"hop_samples", dsp::kHopSamples}};
  std::ofstream(dir / kVocoderFile) << v.dump(2) << '\n';
  e.outputs["stage4"] = r.ledger.digest("stage4");
  e.details = {{"speaker", r.target}, {"utterances", ids.size()}};
  e.wall_seconds = sw.seconds();
  return e;
}

LedgerEntry samples(Run& r, const std::string& locale) {
  Stopwatch sw;
  const auto dir = r.config.output_dir / "samples" / locale;
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& u : r.manifest.utterances) {
    if (written.size() >= r.config.samples_per_locale) break;
    if (u.locale != locale || r.manifest.speaker(u.speaker_id).role != corpus::SpeakerRole::source) continue;
    infer_to_wav(r.config, u.phonemes, locale, dir / (u.id + ".wav"));
    written.push_back(u.id);
  }
  LedgerEntry e{"samples:" + locale, 4, "done", 0, {}, {}, 0.0, {}};
  e.inputs["stage3/" + locale] = r.ledger.digest("stage3/" + locale);
  e.inputs["stage4"] = r.ledger.digest("stage4");
  e.outputs["samples/" + locale] = r.ledger.digest("samples/" + locale);
  e.details = {{"texts", written}};
  e.wall_seconds = sw.seconds();
  return e;
}

void commit(Run& r, std::vector<LedgerEntry>& done, LedgerEntry e) {
  r.ledger.record(e);
  r.ledger.save();
  done.push_back(std::move(e));
}

}  // namespace

std::vector<LedgerEntry> run_stage(int stage, const PipelineConfig& config) {
  if (stage < 1 || stage > 4) throw PipelineError("stage must be 1..4, got " + std::to_string(stage));
  auto r = open_run(config, stage == 1);
  std::vector<LedgerEntry> done;
  switch (stage) {
    case 1: commit(r, done, stage1(r)); break;
    case 2:
      for (const auto& l : r.locales) commit(r, done, stage2(r, l));
      break;
    case 3:
      for (const auto& l : r.locales) commit(r, done, stage3(r, l));
      break;
    case 4:
      commit(r, done, stage4(r));
      for (const auto& l : r.locales)
        if (r.ledger.find("stage3:" + l)) commit(r, done, samples(r, l));
      break;
  }
  return done;
}

std::vector<LedgerEntry> run_all(const PipelineConfig& config) {
  std::vector<LedgerEntry> all;
  for (int s = 1; s <= 4; ++s) {
    auto e = run_stage(s, config);
    all.insert(all.end(), e.begin(), e.end());
  }
  return all;
}

InferResult infer(const PipelineConfig& config, const std::vector<int>& phonemes, const std::string& locale) {
  const auto ledger = StageLedger::load(config.output_dir);
  ledger.require_outputs("stage3:" + locale);
  ledger.require_outputs("stage4");
  InferResult res;
  const auto tts_path = config.stage_dir(3) / locale / kTtsFile;
  const auto voc_path = config.stage_dir(4) / kVocoderFile;
  res.files_read = {config.ledger_path(), tts_path, fs::path(tts_path.string() + ".json"), voc_path};

  const auto model = acoustic::load_acoustic_model(tts_path);
  if (model.locale != locale) throw PipelineError("acoustic model is for " + model.locale + ", not " + locale);
  auto synth = acoustic::synthesize(model, phonemes);
  res.durations = synth.durations;

  std::ifstream in(voc_path);
  const auto v = nlohmann::json::parse(in);
  const dsp::Standardizer st{v.at("standardizer").at("min").get<std::vector<double>>(),
                             v.at("standardizer").at("max").get<std::vector<double>>()};
  // Bound the mel to the target speaker's recorded range.
  auto mel = dsp::destandardize(st, dsp::standardize(st, synth.mel), synth.mel.frames);
  for (std::size_t t = 0; t < mel.frames; ++t)
    for (std::size_t b = 0; b < dsp::kMelBins; ++b)
      if (!(mel.at(t, b) >= st.min[b] - 1e-9 && mel.at(t, b) <= st.max[b] + 1e-9))
        throw PipelineError("vocoder input escaped the speaker's range");
  res.waveform = dsp::griffin_lim(mel, v.at("griffin_lim_iterations").get<int>());
  return res;
}

void infer_to_wav(const PipelineConfig& config, const std::vector<int>& phonemes, const std::string& locale,
                  const fs::path& out_wav) {
  const auto res = infer(config, phonemes, locale);
  if (out_wav.has_parent_path()) fs::create_directories(out_wav.parent_path());
  dsp::write_wav(out_wav, res.waveform);
}

std::vector<int> read_phoneme_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open phoneme file " + path.string());
  std::vector<int> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw PipelineError("phoneme file " + path.string() + ": bad token '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw PipelineError("phoneme file " + path.string() + " is empty");
  return out;
}

}  // namespace polyglot::pipeline
