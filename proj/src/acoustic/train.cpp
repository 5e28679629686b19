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

#include "polyglot/acoustic/train.hpp"

#include <cmath>
#include <numbers>

#include "polyglot/numerics/adam.hpp"
#include "polyglot/numerics/ops.hpp"
#include "polyglot/numerics/rng.hpp"

namespace polyglot::acoustic {

namespace ops = numerics::ops;
using numerics::Tensor;
using numerics::Var;

void AcousticTrainConfig::check() const {
  model.check();
  if (steps == 0) throw AcousticError("training needs at least one step");
  if (batch_size == 0) throw AcousticError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw AcousticError("learning rate must be positive");
}

nlohmann::json AcousticTrainConfig::to_json() const {
  return {{"model", model.to_json()}, {"steps", steps}, {"batch_size", batch_size}, {"learning_rate", learning_rate}};
}

AcousticTrainConfig AcousticTrainConfig::from_json(const nlohmann::json& j) {
  AcousticTrainConfig c;
  try {
    if (j.contains("model")) c.model = AcousticConfig::from_json(j.at("model"));
    if (j.contains("variant")) c.model = AcousticConfig::for_variant(parse_variant(j.at("variant").get<std::string>()));
    c.steps = j.value("steps", c.steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
  } catch (const nlohmann::json::exception& e) {
    throw AcousticError(std::string("acoustic training config: ") + e.what());
  }
  c.check();
  return c;
}

namespace {

constexpr double kFinalRateFraction = 0.05;

std::vector<double> log_energy(const dsp::MelSpectrogram& mel) { return dsp::frame_log_energy(mel); }

Var column_constant(numerics::Tape& tape, const std::vector<double>& v) {
  return tape.constant(Tensor({v.size(), 1}, v));
}

}  // namespace

double scheduled_rate(double base, std::size_t step, std::size_t steps) {
  const double progress = static_cast<double>(step) / static_cast<double>(steps);
  return base * (kFinalRateFraction + (1.0 - kFinalRateFraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

AcousticExample make_example(const AcousticModel& model, const corpus::CorpusManifest& m, const corpus::Utterance& u) {
  const auto mel = m.load_mel(u);
  AcousticExample ex;
  ex.id = u.id;
  ex.phonemes = u.phonemes;
  ex.durations = u.durations;
  ex.mel = Tensor({mel.frames, dsp::kMelBins}, dsp::standardize(model.standardizer, mel));
  ex.f0 = dsp::interpolate_and_normalize(m.load_f0(u)).normalized;
  ex.energy = log_energy(mel);
  for (auto& e : ex.energy) e = (e - model.energy_mean) / model.energy_std;
  return ex;
}

AcousticLoss acoustic_loss(const AcousticModel& model, numerics::Tape& tape, std::span<const Var> bound,
                           const AcousticExample& ex) {
  const auto out = forward_teacher(model, tape, bound, ex.phonemes, ex.durations, ex.f0, ex.energy);
  std::vector<double> logd;
  for (int d : ex.durations) logd.push_back(std::log(static_cast<double>(d)));
  AcousticLoss l;
  l.mel_l1 = ops::mean(ops::abs(ops::sub(out.mel, tape.constant(ex.mel))));
  l.duration = ops::mean(ops::square(ops::sub(out.log_duration, column_constant(tape, logd))));
  l.f0 = ops::mean(ops::square(ops::sub(out.f0, column_constant(tape, ex.f0))));
  l.energy = ops::mean(ops::square(ops::sub(out.energy, column_constant(tape, ex.energy))));
  l.total = ops::add(ops::add(l.mel_l1, l.duration), ops::add(l.f0, l.energy));
  return l;
}

double teacher_forced_l1(const AcousticModel& model, const AcousticExample& ex) {
  numerics::Tape tape;
  std::vector<Var> bound;
  for (const auto& v : model.params.values()) bound.push_back(tape.constant(v));
  return acoustic_loss(model, tape, bound, ex).mel_l1.value().item();
}

void check_single_speaker_locale(const corpus::CorpusManifest& m) {
  if (m.utterances.empty()) throw AcousticError("acoustic training manifest is empty");
  const auto& first = m.utterances.front();
  for (const auto& u : m.utterances) {
    if (u.locale != first.locale)
      throw AcousticError("utterance " + u.id + " is in locale " + u.locale + ", expected " + first.locale);
    if (u.speaker_id != first.speaker_id)
      throw AcousticError("utterance " + u.id + " is spoken by " + u.speaker_id + ", expected " + first.speaker_id);
  }
}

AcousticModel train_acoustic(const corpus::CorpusManifest& m, const AcousticTrainConfig& config, std::uint64_t seed,
                             AcousticTrainReport* report) {
  config.check();
  check_single_speaker_locale(m);
  const auto& locale = m.locale(m.utterances.front().locale);

  std::vector<dsp::MelSpectrogram> mels;
  for (const auto& u : m.utterances) mels.push_back(m.load_mel(u));
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& mel : mels) {
    for (double e : log_energy(mel)) {
      sum += e;
      sq += e * e;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(std::max(sq / static_cast<double>(n) - mean * mean, 0.0));

  auto mc = config.model;
  mc.inventory = locale.phoneme_count;
  numerics::Rng rng(seed);
  auto model = AcousticModel::create(mc, locale.id, dsp::fit_standardizer(mels), mean, sd > 1e-9 ? sd : 1.0,
                                     rng.split("init").next_u64());
  mels.clear();

  std::vector<AcousticExample> data;
  for (const auto& u : m.utterances) data.push_back(make_example(model, m, u));

  AcousticTrainReport rep;
  rep.utterances = data.size();
  numerics::OptimizerState opt;
  opt.learning_rate = config.learning_rate;
  auto batch_rng = rng.split("batches");
  const double inv_b = 1.0 / static_cast<double>(config.batch_size);
  for (std::size_t step = 0; step < config.steps; ++step) {
    numerics::Tape tape;
    const auto bound = model.params.bind(tape);
    Var total{}, l1{};
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const auto l = acoustic_loss(model, tape, bound, data[batch_rng.below(data.size())]);
      total = b == 0 ? l.total : ops::add(total, l.total);
      l1 = b == 0 ? l.mel_l1 : ops::add(l1, l.mel_l1);
    }
    total = ops::scale(total, inv_b);
    total.value().require_finite("acoustic training loss");
    rep.loss_curve.push_back(total.value().item());
    rep.mel_l1_curve.push_back(l1.value().item() * inv_b);
    const auto grads = numerics::backward(tape, total);
    opt.learning_rate = scheduled_rate(config.learning_rate, step, config.steps);
    numerics::adam_step(opt, model.params, numerics::parameter_gradients(grads, bound));
  }

  for (const auto& ex : data) rep.final_mel_l1 += teacher_forced_l1(model, ex);
  rep.final_mel_l1 /= static_cast<double>(data.size());
  if (report) *report = std::move(rep);
  return model;
}

}  // namespace polyglot::acoustic
