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

#include "polyglot/flow_vc/vc_model.hpp"

#include <fstream>

#include "polyglot/numerics/checkpoint.hpp"
#include "polyglot/numerics/ops.hpp"
#include "polyglot/numerics/rng.hpp"

namespace polyglot::flow_vc {

using numerics::Tensor;

namespace {

constexpr double kPhonemeInitStd = 0.5;

std::filesystem::path sidecar(const std::filesystem::path& p) { return p.string() + ".json"; }

}  // namespace

VcModel VcModel::create(const corpus::CorpusManifest& m, FlowConfig flow, dsp::Standardizer standardizer,
                        std::uint64_t seed) {
  if (m.locales.empty()) throw VcError("manifest has no locales");
  if (standardizer.dims() != dsp::kMelBins) throw VcError("standardizer must cover 80 mel bins");
  flow.channels = dsp::kMelBins;
  flow.cond_dim = conditioning_dim(m.locales.size());
  numerics::Rng rng(seed);
  VcModel model;
  model.flow = FlowModel(flow, rng.split("flow").next_u64());
  const std::size_t inventory = m.total_phonemes();
  auto prng = rng.split("phonemes");
  std::vector<double> table(inventory * kPhonemeEmbeddingDim);
  for (auto& v : table) v = prng.normal(0.0, kPhonemeInitStd);
  model.phonemes.add("phoneme_table", Tensor({inventory, kPhonemeEmbeddingDim}, std::move(table)));
  model.standardizer = std::move(standardizer);
  model.locales = m.locales;
  return model;
}

void VcModel::check_compatible(const corpus::CorpusManifest& m) const {
  if (m.locales != locales) throw VcError("manifest locales differ from the ones the model was trained on");
}

Tensor VcModel::conditioning(const ConditioningInputs& inputs) const {
  numerics::Tape tape;
  return conditioning_var(tape, tape.constant(phonemes.value(0)), inputs).value();
}

Tensor VcModel::standardized(const dsp::MelSpectrogram& mel) const {
  return Tensor({mel.frames, dsp::kMelBins}, dsp::standardize(standardizer, mel));
}

void save_vc_model(const VcModel& model, const std::filesystem::path& path) {
  auto tensors = numerics::to_named(model.flow.params());
  for (auto& t : numerics::to_named(model.phonemes)) tensors.push_back(std::move(t));
  tensors.push_back({"standardizer.min", Tensor::vector(model.standardizer.min)});
  tensors.push_back({"standardizer.max", Tensor::vector(model.standardizer.max)});
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  numerics::save_checkpoint(path, tensors);

  nlohmann::json j{{"format", "polyglot-vc"}, {"version", 1}, {"flow", model.flow.config().to_json()}};
  auto& locs = j["locales"] = nlohmann::json::array();
  for (const auto& l : model.locales)
    locs.push_back({{"id", l.id}, {"accent_index", l.accent_index}, {"phoneme_count", l.phoneme_count}});
  std::ofstream out(sidecar(path));
  out << j.dump(2) << '\n';
  if (!out) throw VcError("cannot write " + sidecar(path).string());
}

VcModel load_vc_model(const std::filesystem::path& path) {
  std::ifstream in(sidecar(path));
  if (!in) throw VcError("missing model description " + sidecar(path).string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw VcError(sidecar(path).string() + ": " + e.what());
  }
  if (j.value("format", "") != "polyglot-vc") throw VcError(sidecar(path).string() + ": not a VC model");

  VcModel model;
  try {
    for (const auto& l : j.at("locales"))
      model.locales.push_back({l.at("id").get<std::string>(), l.at("accent_index").get<std::size_t>(),
                               l.at("phoneme_count").get<std::size_t>()});
    model.flow = FlowModel(FlowConfig::from_json(j.at("flow")), 0);
  } catch (const nlohmann::json::exception& e) {
    throw VcError(sidecar(path).string() + ": " + e.what());
  }

  const auto tensors = numerics::load_checkpoint(path);
  numerics::load_into(model.flow.params(), tensors);
  std::size_t inventory = 0;
  for (const auto& l : model.locales) inventory += l.phoneme_count;
  model.phonemes.add("phoneme_table", Tensor::zeros({inventory, kPhonemeEmbeddingDim}));
  numerics::load_into(model.phonemes, tensors);
  const auto lo = numerics::find_tensor(tensors, "standardizer.min").values();
  const auto hi = numerics::find_tensor(tensors, "standardizer.max").values();
  if (lo.size() != dsp::kMelBins || hi.size() != dsp::kMelBins) throw VcError("standardizer has wrong size");
  model.standardizer = {lo, hi};
  return model;
}

}  // namespace polyglot::flow_vc
