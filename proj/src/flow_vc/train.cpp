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

#include "polyglot/flow_vc/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "polyglot/numerics/adam.hpp"
#include "polyglot/numerics/ops.hpp"
#include "polyglot/numerics/rng.hpp"

namespace polyglot::flow_vc {

namespace ops = numerics::ops;
using numerics::Tensor;
using numerics::Var;

void VcTrainConfig::check() const {
  flow.check();
  if (steps == 0) throw VcError("training needs at least one step");
  if (batch_size == 0) throw VcError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw VcError("learning rate must be positive");
}

nlohmann::json VcTrainConfig::to_json() const {
  return {{"flow", flow.to_json()},          {"steps", steps},
          {"batch_size", batch_size},        {"crop_frames", crop_frames},
          {"learning_rate", learning_rate},  {"use_supporting", use_supporting}};
}

VcTrainConfig VcTrainConfig::from_json(const nlohmann::json& j) {
  VcTrainConfig c;
  try {
    if (j.contains("flow")) c.flow = FlowConfig::from_json(j.at("flow"));
    c.steps = j.value("steps", c.steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.crop_frames = j.value("crop_frames", c.crop_frames);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.use_supporting = j.value("use_supporting", c.use_supporting);
  } catch (const nlohmann::json::exception& e) {
    throw VcError(std::string("vc config: ") + e.what());
  }
  c.check();
  return c;
}

std::vector<const corpus::Utterance*> vc_training_utterances(const corpus::CorpusManifest& m, bool use_supporting) {
  std::vector<const corpus::Utterance*> out;
  for (const auto& u : m.utterances) {
    const auto role = m.speaker(u.speaker_id).role;
    if (role == corpus::SpeakerRole::supporting && !use_supporting) continue;
    out.push_back(&u);
  }
  return out;
}

VcExample make_example(const VcModel& model, const corpus::CorpusManifest& m, const corpus::Utterance& u) {
  const auto mel = m.load_mel(u);
  return {model.standardized(mel), make_conditioning(m, u, m.speaker(u.speaker_id).embedding, m.load_f0(u))};
}

double mean_nll(const VcModel& model, const std::vector<VcExample>& examples) {
  if (examples.empty()) throw VcError("no examples to score");
  double total = 0.0;
  for (const auto& e : examples) total += model.flow.nll(e.x, model.conditioning(e.cond));
  return total / static_cast<double>(examples.size());
}

namespace {

Tensor crop_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  const std::size_t w = x.cols();
  const auto& v = x.values();
  return Tensor({end - begin, w}, std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin * w),
                                                       v.begin() + static_cast<std::ptrdiff_t>(end * w)));
}

}  // namespace

VcModel train_vc(const corpus::CorpusManifest& m, const VcTrainConfig& config, std::uint64_t seed,
                 VcTrainReport* report) {
  config.check();
  const auto utts = vc_training_utterances(m, config.use_supporting);
  if (utts.empty()) throw VcError("VC training set is empty");

  std::vector<dsp::MelSpectrogram> mels;
  mels.reserve(utts.size());
  for (const auto* u : utts) mels.push_back(m.load_mel(*u));
  numerics::Rng rng(seed);
  VcModel model = VcModel::create(m, config.flow, dsp::fit_standardizer(mels), rng.split("init").next_u64());

  std::vector<VcExample> data;
  data.reserve(utts.size());
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const auto& u = *utts[i];
    data.push_back({model.standardized(mels[i]), make_conditioning(m, u, m.speaker(u.speaker_id).embedding,
                                                                   m.load_f0(u))});
  }
  mels.clear();

  VcTrainReport rep;
  rep.utterances = data.size();
  std::set<std::string> speakers;
  for (const auto* u : utts) speakers.insert(u->speaker_id);
  rep.speakers.assign(speakers.begin(), speakers.end());
  rep.initial_nll = mean_nll(model, data);

  numerics::OptimizerState flow_opt, table_opt;
  auto batch_rng = rng.split("batches");
  for (std::size_t step = 0; step < config.steps; ++step) {
    // cosine to 5% of the base rate
    const double progress = static_cast<double>(step) / static_cast<double>(config.steps);
    flow_opt.learning_rate = table_opt.learning_rate =
        config.learning_rate * (0.05 + 0.95 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
    numerics::Tape tape;
    const auto flow_vars = model.flow.params().bind(tape);
    const auto table_vars = model.phonemes.bind(tape);
    Var loss{};
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const auto& ex = data[batch_rng.below(data.size())];
      const std::size_t frames = ex.cond.frames();
      std::size_t begin = 0, end = frames;
      if (config.crop_frames > 0 && frames > config.crop_frames) {
        begin = batch_rng.below(frames - config.crop_frames + 1);
        end = begin + config.crop_frames;
      }
      Var x = tape.constant(crop_rows(ex.x, begin, end));
      Var c = conditioning_var(tape, table_vars[0], crop(ex.cond, begin, end));
      Var l = model.flow.nll(flow_vars, x, c);
      loss = b == 0 ? l : ops::add(loss, l);
    }
    loss = ops::scale(loss, 1.0 / static_cast<double>(config.batch_size));
    loss.value().require_finite("VC training loss");
    rep.loss_curve.push_back(loss.value().item());

    const auto grads = numerics::backward(tape, loss);
    numerics::adam_step(flow_opt, model.flow.params(), numerics::parameter_gradients(grads, flow_vars));
    numerics::adam_step(table_opt, model.phonemes, numerics::parameter_gradients(grads, table_vars));
  }

  rep.final_nll = mean_nll(model, data);
  if (report) *report = std::move(rep);
  return model;
}

std::vector<double> block_means(const std::vector<double>& curve, std::size_t window) {
  if (window == 0) throw VcError("window must be positive");
  std::vector<double> out;
  for (std::size_t i = 0; i + window <= curve.size(); i += window) {
    double s = 0.0;
    for (std::size_t k = i; k < i + window; ++k) s += curve[k];
    out.push_back(s / static_cast<double>(window));
  }
  return out;
}

}  // namespace polyglot::flow_vc
