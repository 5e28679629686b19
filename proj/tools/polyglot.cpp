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

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "polyglot/acoustic/train.hpp"
#include "polyglot/corpus/generator.hpp"
#include "polyglot/dsp/audio_io.hpp"
#include "polyglot/eval/objective.hpp"
#include "polyglot/eval/reference.hpp"
#include "polyglot/eval/report.hpp"
#include "polyglot/flow_vc/convert.hpp"
#include "polyglot/flow_vc/train.hpp"
#include "polyglot/mushra/service.hpp"
#include "polyglot/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace polyglot;

namespace {

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return nlohmann::json::parse(in);
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

void print_entry(const pipeline::LedgerEntry& e) {
  std::cout << e.key << "  " << e.status << "  " << e.wall_seconds << " s  " << e.details.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyglot: cross-lingual voice distillation toolkit"};
  app.require_subcommand(1);

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "synthetic corpus tools");
  corpus_cmd->require_subcommand(1);
  auto* gen = corpus_cmd->add_subcommand("generate", "render a synthetic multi-speaker corpus");
  std::string corpus_config, corpus_out;
  std::uint64_t corpus_seed = 7;
  gen->add_option("--config", corpus_config, "corpus config JSON (defaults if omitted)");
  gen->add_option("--seed", corpus_seed, "generator seed");
  gen->add_option("--out", corpus_out, "output directory")->required();

  // vc
  auto* vc_cmd = app.add_subcommand("vc", "flow voice conversion");
  vc_cmd->require_subcommand(1);
  auto* vc_train = vc_cmd->add_subcommand("train", "train the flow on a corpus");
  std::string vc_manifest, vc_config, vc_out;
  std::uint64_t vc_seed = 11;
  vc_train->add_option("--manifest", vc_manifest, "corpus manifest.jsonl")->required();
  vc_train->add_option("--config", vc_config, "VC training config JSON");
  vc_train->add_option("--seed", vc_seed, "training seed");
  vc_train->add_option("--out", vc_out, "checkpoint path")->required();
  auto* vc_convert = vc_cmd->add_subcommand("convert", "convert source speakers into the target voice");
  std::string conv_model, conv_manifest, conv_target, conv_out;
  std::vector<std::string> conv_locales;
  vc_convert->add_option("--model", conv_model, "VC checkpoint")->required();
  vc_convert->add_option("--manifest", conv_manifest, "corpus manifest.jsonl")->required();
  vc_convert->add_option("--target", conv_target, "target speaker id (default: corpus target)");
  vc_convert->add_option("--locale", conv_locales, "restrict to these locales");
  vc_convert->add_option("--out", conv_out, "output directory")->required();

  // tts
  auto* tts_cmd = app.add_subcommand("tts", "acoustic model");
  tts_cmd->require_subcommand(1);
  auto* tts_train = tts_cmd->add_subcommand("train", "train on a single-speaker, single-locale manifest");
  std::string tts_manifest, tts_config, tts_variant, tts_out;
  std::size_t tts_steps = 0;
  std::uint64_t tts_seed = 13;
  tts_train->add_option("--manifest", tts_manifest, "manifest.jsonl")->required();
  tts_train->add_option("--config", tts_config, "acoustic training config JSON");
  tts_train->add_option("--variant", tts_variant, "fs2 | ls | ls-s");
  tts_train->add_option("--steps", tts_steps, "override training steps");
  tts_train->add_option("--seed", tts_seed, "training seed");
  tts_train->add_option("--out", tts_out, "checkpoint path")->required();
  auto* tts_synth = tts_cmd->add_subcommand("synth", "synthesize a WAV with the model's own standardizer");
  std::string synth_model, synth_phonemes, synth_out;
  int synth_iters = 60;
  tts_synth->add_option("--model", synth_model, "acoustic checkpoint")->required();
  tts_synth->add_option("--phonemes", synth_phonemes, "file of phoneme ids")->required();
  tts_synth->add_option("--iterations", synth_iters, "Griffin-Lim iterations");
  tts_synth->add_option("--out", synth_out, "output WAV")->required();

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "four-stage distillation pipeline");
  pipe_cmd->require_subcommand(1);
  auto* pipe_run = pipe_cmd->add_subcommand("run", "run all stages or one");
  std::string pipe_config;
  int pipe_stage = 0;
  pipe_run->add_option("--config", pipe_config, "pipeline config JSON")->required();
  pipe_run->add_option("--stage", pipe_stage, "run only this stage (1-4)");
  auto* pipe_infer = pipe_cmd->add_subcommand("infer", "text to WAV without the VC model");
  std::string infer_phonemes, infer_locale, infer_out;
  pipe_infer->add_option("--config", pipe_config, "pipeline config JSON")->required();
  pipe_infer->add_option("--phonemes", infer_phonemes, "file of phoneme ids")->required();
  pipe_infer->add_option("--locale", infer_locale, "target locale")->required();
  pipe_infer->add_option("--out", infer_out, "output WAV")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "listening-test statistics");
  eval_cmd->require_subcommand(1);
  auto* analyze = eval_cmd->add_subcommand("analyze", "analyze a responses CSV");
  std::string responses, eval_out, baseline, proposed;
  eval::AnalysisOptions opts;
  analyze->add_option("--responses", responses, "responses CSV")->required();
  analyze->add_option("--default-slider", opts.slider_default, "slider start value for cheater detection");
  analyze->add_option("--threshold", opts.cheater_threshold, "flagged screens tolerated per listener");
  analyze->add_option("--alpha", opts.alpha, "family-wise significance level");
  analyze->add_option("--baseline", baseline, "baseline system for CTG");
  analyze->add_option("--proposed", proposed, "proposed system for CTG");
  analyze->add_option("--out", eval_out, "output directory")->required();
  auto* reference = eval_cmd->add_subcommand("reference", "recompute published CTG and DCTG values");
  std::string ref_out;
  reference->add_option("--out", ref_out, "optional JSON output");
  auto* objective = eval_cmd->add_subcommand("objective", "speaker and locale centroid scores");
  std::string obj_ref, obj_eval, obj_out;
  objective->add_option("--reference", obj_ref, "manifest the centroids are fitted on")->required();
  objective->add_option("--manifest", obj_eval, "manifest to score")->required();
  objective->add_option("--out", obj_out, "optional JSON output");

  // listening-test service
  auto* serve = app.add_subcommand("serve", "run the MUSHRA test service");
  std::string serve_data, serve_addr = "127.0.0.1:8080", serve_static;
  serve->add_option("--data", serve_data, "data directory (env POLYGLOT_MUSHRA_DATA)")
      ->envname("POLYGLOT_MUSHRA_DATA")
      ->required();
  serve->add_option("--addr", serve_addr, "host:port (env POLYGLOT_MUSHRA_ADDR)")->envname("POLYGLOT_MUSHRA_ADDR");
  serve->add_option("--static", serve_static, "directory of the listener page bundle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto cfg = corpus_config.empty() ? corpus::CorpusConfig{} : corpus::load_corpus_config(corpus_config);
      const auto m = corpus::generate_corpus(cfg, corpus_seed, corpus_out);
      std::cout << "wrote " << m.utterances.size() << " utterances to " << corpus_out << '\n';
    } else if (vc_train->parsed()) {
      const auto m = corpus::load_manifest(vc_manifest);
      const auto cfg = vc_config.empty() ? flow_vc::VcTrainConfig{} : flow_vc::VcTrainConfig::from_json(read_json(vc_config));
      flow_vc::VcTrainReport rep;
      const auto model = flow_vc::train_vc(m, cfg, vc_seed, &rep);
      flow_vc::save_vc_model(model, vc_out);
      std::cout << "NLL " << rep.initial_nll << " -> " << rep.final_nll << " over " << rep.utterances
                << " utterances\n";
    } else if (vc_convert->parsed()) {
      const auto m = corpus::load_manifest(conv_manifest);
      const auto model = flow_vc::load_vc_model(conv_model);
      const auto target = conv_target.empty() ? m.target_speaker().id : conv_target;
      const auto out = flow_vc::convert_corpus(model, m, target, conv_out, conv_locales);
      std::cout << "converted " << out.utterances.size() << " utterances into " << target << '\n';
    } else if (tts_train->parsed()) {
      const auto m = corpus::load_manifest(tts_manifest);
      auto cfg = tts_config.empty() ? acoustic::AcousticTrainConfig{}
                                    : acoustic::AcousticTrainConfig::from_json(read_json(tts_config));
      if (!tts_variant.empty()) cfg.model = acoustic::AcousticConfig::for_variant(acoustic::parse_variant(tts_variant));
      if (tts_steps) cfg.steps = tts_steps;
      acoustic::AcousticTrainReport rep;
      const auto model = acoustic::train_acoustic(m, cfg, tts_seed, &rep);
      acoustic::save_acoustic_model(model, tts_out);
      std::cout << acoustic::to_string(model.config.variant) << " " << model.params.scalar_count()
                << " params, teacher-forced L1 " << rep.final_mel_l1 << '\n';
    } else if (tts_synth->parsed()) {
      const auto model = acoustic::load_acoustic_model(synth_model);
      const auto s = acoustic::synthesize(model, pipeline::read_phoneme_file(synth_phonemes));
      dsp::write_wav(synth_out, dsp::griffin_lim(s.mel, synth_iters));
      std::cout << s.mel.frames << " frames\n";
    } else if (pipe_run->parsed()) {
      const auto cfg = pipeline::load_pipeline_config(pipe_config);
      const auto entries = pipe_stage ? pipeline::run_stage(pipe_stage, cfg) : pipeline::run_all(cfg);
      for (const auto& e : entries) print_entry(e);
    } else if (pipe_infer->parsed()) {
      const auto cfg = pipeline::load_pipeline_config(pipe_config);
      pipeline::infer_to_wav(cfg, pipeline::read_phoneme_file(infer_phonemes), infer_locale, infer_out);
      std::cout << "wrote " << infer_out << '\n';
    } else if (analyze->parsed()) {
      if (!baseline.empty()) opts.baseline = baseline;
      if (!proposed.empty()) opts.proposed = proposed;
      const auto rep = eval::analyze(eval::read_responses_csv(fs::path(responses)), opts);
      write_text(fs::path(eval_out) / "report.txt", rep.to_text());
      write_text(fs::path(eval_out) / "report.json", rep.to_json().dump(2) + "\n");
      std::cout << rep.to_text();
    } else if (reference->parsed()) {
      const auto c = eval::check_reference_ctg();
      const auto d = eval::check_reference_dctg();
      std::cout << eval::reference_text(c, d);
      if (!ref_out.empty())
        write_text(ref_out, nlohmann::json{{"ctg", eval::reference_json(c)}, {"dctg", eval::reference_json(d)}}.dump(2));
    } else if (objective->parsed()) {
      const auto rep = eval::objective_report(corpus::load_manifest(obj_ref), corpus::load_manifest(obj_eval));
      std::cout << rep.to_text();
      if (!obj_out.empty()) write_text(obj_out, rep.to_json().dump(2));
    } else if (serve->parsed()) {
      const auto colon = serve_addr.rfind(':');
      if (colon == std::string::npos) throw std::runtime_error("--addr must be host:port");
      mushra::ServiceOptions so;
      so.data_dir = serve_data;
      so.static_dir = serve_static;
      mushra::Service service(so);
      mushra::HttpServer server(service);
      const int port = std::stoi(serve_addr.substr(colon + 1));
      std::cout << "listening on " << serve_addr << '\n' << std::flush;
      server.listen(serve_addr.substr(0, colon), port);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
