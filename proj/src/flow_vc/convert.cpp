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

#include "polyglot/flow_vc/convert.hpp"

#include <algorithm>

#include "polyglot/dsp/audio_io.hpp"

namespace polyglot::flow_vc {

using numerics::Tensor;

namespace {

constexpr double kMinF0 = 20.0;

}  // namespace

dsp::F0Track rescale_f0(const dsp::F0Track& f0, const corpus::SpeakerProfile& source,
                        const corpus::SpeakerProfile& target) {
  if (!(source.f0_std_hz > 0.0)) throw VcError("speaker " + source.id + " has no F0 spread");
  const double ratio = target.f0_std_hz / source.f0_std_hz;
  dsp::F0Track out;
  out.voiced = f0.voiced;
  out.f0_hz.resize(f0.frames(), 0.0);
  for (std::size_t t = 0; t < f0.frames(); ++t) {
    if (!f0.voiced[t]) continue;
    out.f0_hz[t] = std::max(kMinF0, target.f0_mean_hz + (f0.f0_hz[t] - source.f0_mean_hz) * ratio);
  }
  return out;
}

std::string converted_id(const std::string& source_utterance, const std::string& target_speaker) {
  return source_utterance + "__to__" + target_speaker;
}

Conversion convert(const VcModel& model, const corpus::CorpusManifest& m, const corpus::Utterance& utt,
                   const dsp::MelSpectrogram& mel, const dsp::F0Track& f0, const corpus::SpeakerProfile& target) {
  model.check_compatible(m);
  if (!m.find_speaker(target.id)) throw VcError("unknown target speaker " + target.id);
  if (mel.frames != utt.frames || f0.frames() != utt.frames) {
    throw VcError("utterance " + utt.id + ": features have " + std::to_string(mel.frames) + "/" +
                  std::to_string(f0.frames()) + " frames, expected " + std::to_string(utt.frames));
  }
  const auto& source = m.speaker(utt.speaker_id);

  const Tensor x = model.standardized(mel);
  const Tensor c_src = model.conditioning(make_conditioning(m, utt, source.embedding, f0));
  const auto target_f0 = rescale_f0(f0, source, target);
  const Tensor c_tgt = model.conditioning(make_conditioning(m, utt, target.embedding, target_f0));
  const Tensor y = model.flow.inverse(model.flow.forward(x, c_src).z, c_tgt);

  const auto dy = dsp::destandardize(model.standardizer, y.values(), mel.frames);
  const auto dx = dsp::destandardize(model.standardizer, x.values(), mel.frames);
  Conversion out;
  out.mel = mel;
  for (std::size_t i = 0; i < out.mel.values.size(); ++i) out.mel.values[i] += dy.values[i] - dx.values[i];
  dsp::clamp_to_floor(out.mel);
  out.f0 = target_f0;

  auto& u = out.utterance;
  u.id = converted_id(utt.id, target.id);
  u.speaker_id = target.id;
  u.locale = utt.locale;
  u.phonemes = utt.phonemes;
  u.durations = utt.durations;
  u.frames = utt.frames;
  u.render_seed = utt.render_seed;
  u.source_utterance = utt.id;
  u.mel_path = "mel/" + u.id + ".mel";
  u.f0_path = "f0/" + u.id + ".f0";
  return out;
}

Conversion convert(const VcModel& model, const corpus::CorpusManifest& m, const corpus::Utterance& utt,
                   const corpus::SpeakerProfile& target) {
  return convert(model, m, utt, m.load_mel(utt), m.load_f0(utt), target);
}

corpus::CorpusManifest convert_corpus(const VcModel& model, const corpus::CorpusManifest& m,
                                      const std::string& target_speaker, const std::filesystem::path& out_dir,
                                      const std::vector<std::string>& locales) {
  const auto* target = m.find_speaker(target_speaker);
  if (!target) throw VcError("unknown target speaker " + target_speaker);
  for (const auto& l : locales)
    if (!m.find_locale(l)) throw VcError("unknown locale " + l);

  corpus::CorpusManifest out;
  out.locales = m.locales;
  out.speakers = {*target};
  out.speakers.front().role = corpus::SpeakerRole::target;
  out.root = out_dir;
  std::filesystem::create_directories(out_dir / "mel");
  std::filesystem::create_directories(out_dir / "f0");

  for (const auto& u : m.utterances) {
    if (m.speaker(u.speaker_id).role != corpus::SpeakerRole::source) continue;
    if (!locales.empty() && std::find(locales.begin(), locales.end(), u.locale) == locales.end()) continue;
    auto conv = convert(model, m, u, *target);
    dsp::write_mel(out.resolve(conv.utterance.mel_path), conv.mel);
    dsp::write_f0(out.resolve(conv.utterance.f0_path), conv.f0);
    out.utterances.push_back(std::move(conv.utterance));
  }
  if (out.utterances.empty()) throw VcError("no source-speaker utterances to convert");
  corpus::validate(out, true);
  corpus::save_manifest(out, out_dir / "manifest.jsonl");
  return out;
}

}  // namespace polyglot::flow_vc
