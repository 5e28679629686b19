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

#include <cmath>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "polyglot/dsp/features.hpp"
#include "polyglot/acoustic/train.hpp"
#include "polyglot/numerics/grad_check.hpp"
#include "polyglot/numerics/rng.hpp"

using namespace polyglot;
using namespace polyglot::acoustic;
using numerics::Rng;
using numerics::Tensor;

namespace {

AcousticConfig tiny_config() {
  AcousticConfig c;
  c.inventory = 5;
  c.hidden = 6;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.predictor_hidden = 4;
  return c;
}

dsp::Standardizer flat_standardizer() {
  return {std::vector<double>(80, dsp::kLogFloor), std::vector<double>(80, 2.0)};
}

AcousticExample random_example(Rng& rng, std::size_t inventory) {
  AcousticExample ex;
  ex.phonemes = {0, static_cast<int>(inventory - 1), 2, 1};
  ex.durations = {2, 3, 1, 3};
  const std::size_t frames = 9;  // odd, so L1 signs never cancel on out.b
  std::vector<double> mel(frames * 80);
  for (auto& v : mel) v = rng.uniform(-1.0, 1.0);
  ex.mel = Tensor({frames, 80}, mel);
  for (std::size_t t = 0; t < frames; ++t) {
    ex.f0.push_back(rng.normal());
    ex.energy.push_back(rng.normal());
  }
  return ex;
}

// One speaker's utterances from the tiny corpus.
corpus::CorpusManifest single_speaker(const std::string& speaker) {
  auto m = testing::tiny_corpus();
  std::erase_if(m.utterances, [&](const corpus::Utterance& u) { return u.speaker_id != speaker; });
  return m;
}

}  // namespace

TEST_CASE("variant capacity ordering and exact parameter counts") {
  const auto fs2 = AcousticConfig::for_variant(Variant::fs2_lite);
  const auto ls = AcousticConfig::for_variant(Variant::ls);
  const auto lss = AcousticConfig::for_variant(Variant::ls_s);
  CHECK(fs2.hidden == 256);
  CHECK(lss.hidden == 192);
  CHECK(lss.encoder_layers == fs2.encoder_layers - 1);
  CHECK(lss.decoder_layers == fs2.decoder_layers - 1);
  CHECK(param_count(lss) < param_count(ls));
  CHECK(param_count(ls) < param_count(fs2));
  for (const auto& c : {fs2, ls, lss, tiny_config()}) {
    const auto m = AcousticModel::create(c, "loc1", flat_standardizer(), 0.0, 1.0, 3);
    CHECK(m.params.scalar_count() == param_count(c));
  }
  // Encoder blocks scale with width squared times depth.
  const double ratio = static_cast<double>(encoder_param_count(fs2)) / static_cast<double>(encoder_param_count(lss));
  const double expect = (4.0 / 3.0) * (256.0 / 192.0) * (256.0 / 192.0);
  CHECK(ratio == doctest::Approx(expect).epsilon(0.01));
  CHECK(encoder_param_count(fs2) == 4 * (3 * 256 * 256 + 256));
}

TEST_CASE("degenerate configs are rejected") {
  auto c = AcousticConfig::for_variant(Variant::ls);
  c.encoder_layers = 0;
  CHECK_THROWS_AS(param_count(c), AcousticError);
  c = AcousticConfig::for_variant(Variant::ls);
  c.decoder_layers = 0;
  CHECK_THROWS_AS(c.check(), AcousticError);
  c = AcousticConfig::for_variant(Variant::ls);
  c.kernel = 4;
  CHECK_THROWS_AS(c.check(), AcousticError);
  CHECK_THROWS_AS(parse_variant("tacotron"), AcousticError);
  CHECK(parse_variant("fs2") == Variant::fs2_lite);
  CHECK(parse_variant("ls-s") == Variant::ls_s);
  CHECK(AcousticConfig::from_json(AcousticConfig::for_variant(Variant::ls_s).to_json()) ==
        AcousticConfig::for_variant(Variant::ls_s));
}

TEST_CASE("length regulator and synthesis frame counts") {
  CHECK(length_regulate({3, 5, 2}) == std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 1, 1, 2, 2});
  CHECK_THROWS_AS(length_regulate({2, 0}), AcousticError);
  const auto m = AcousticModel::create(tiny_config(), "loc1", flat_standardizer(), 0.0, 1.0, 5);
  const auto s = synthesize(m, {0, 1, 2}, std::vector<int>{3, 5, 2});
  CHECK(s.mel.frames == 10);
  CHECK(s.durations == std::vector<int>{3, 5, 2});
  for (double v : s.mel.values) CHECK(v >= dsp::kLogFloor);
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> d;
    std::size_t total = 0;
    for (int k = 0; k < 4; ++k) {
      d.push_back(1 + static_cast<int>(rng.below(30)));
      total += static_cast<std::size_t>(d.back());
    }
    CHECK(synthesize(m, {4, 3, 2, 1}, d).mel.frames == total);
  }
  CHECK_THROWS_AS(synthesize(m, {0, 5}), AcousticError);
  CHECK_THROWS_AS(synthesize(m, {-1}), AcousticError);
  CHECK_THROWS_AS(synthesize(m, {0, 1}, std::vector<int>{2}), AcousticError);
}

TEST_CASE("predicted durations are at least one frame") {
  auto m = AcousticModel::create(tiny_config(), "loc1", flat_standardizer(), 0.0, 1.0, 5);
  for (double bias : {-60.0, -3.0, 0.0, 2.5}) {
    m.params.set(*m.params.find("dur.head.b"), Tensor::vector({bias}));
    const auto s = synthesize(m, {0, 1, 2, 3, 4});
    std::size_t total = 0;
    for (int d : s.durations) {
      CHECK(d >= 1);
      total += static_cast<std::size_t>(d);
    }
    CHECK(s.mel.frames == total);
  }
}

TEST_CASE("the graph is convolutional: no attention-style ops") {
  const auto m = AcousticModel::create(tiny_config(), "loc1", flat_standardizer(), 0.0, 1.0, 5);
  Rng rng(4);
  const auto ex = random_example(rng, 5);
  numerics::Tape tape;
  const auto bound = m.params.bind(tape);
  acoustic_loss(m, tape, bound, ex);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < tape.size(); ++i) seen.insert(tape.op(i));
  const std::set<std::string> allowed{"abs", "add",    "add_row", "const", "conv1d", "gather", "matmul",
                                      "scale", "square", "sub",     "sum",   "tanh",   "var"};
  for (const auto& op : seen) CHECK_MESSAGE(allowed.count(op) == 1, op);
  CHECK(seen.count("conv1d") == 1);
}

TEST_CASE("full training loss passes grad_check") {
  Rng rng(9);
  for (int draw = 0; draw < 3; ++draw) {
    const auto m = AcousticModel::create(tiny_config(), "loc1", flat_standardizer(), 0.0, 1.0, rng.next_u64());
    const auto ex = random_example(rng, 5);
    auto loss = [&](numerics::Tape& t, std::span<const numerics::Var> p) { return acoustic_loss(m, t, p, ex).total; };
    const auto report = numerics::grad_check(loss, m.params.values(), 1e-5, 40);
    CHECK(report.worst <= 1e-4);
  }
}

TEST_CASE("training rejects mixed speakers or locales, naming the utterance") {
  const auto& m = testing::tiny_corpus();
  auto mixed = single_speaker("loc1_spk0");
  mixed.utterances.push_back(m.utterances.front());
  try {
    train_acoustic(mixed, AcousticTrainConfig{}, 1);
    FAIL("expected rejection");
  } catch (const AcousticError& e) {
    CHECK(std::string(e.what()).find(m.utterances.front().id) != std::string::npos);
  }
  auto two = single_speaker("loc1_spk0");
  auto other = single_speaker("loc1_spk1").utterances.front();
  two.utterances.push_back(other);
  CHECK_THROWS_WITH_AS(check_single_speaker_locale(two), doctest::Contains(other.id.c_str()), AcousticError);
  corpus::CorpusManifest empty = m;
  empty.utterances.clear();
  CHECK_THROWS_AS(check_single_speaker_locale(empty), AcousticError);
}

TEST_CASE("seeded training reruns identically and checkpoints round-trip") {
  const auto m = single_speaker("loc1_spk0");
  AcousticTrainConfig cfg;
  cfg.model = tiny_config();
  cfg.model.hidden = 16;
  cfg.steps = 15;
  AcousticTrainReport a, b;
  const auto ma = train_acoustic(m, cfg, 3, &a);
  train_acoustic(m, cfg, 3, &b);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
  CHECK(ma.config.inventory == m.locale("loc1").phoneme_count);

  const auto dir = testing::scratch_dir("acoustic_ckpt");
  save_acoustic_model(ma, dir / "tts.fdt");
  const auto back = load_acoustic_model(dir / "tts.fdt");
  CHECK(back.params.values() == ma.params.values());
  CHECK(back.config == ma.config);
  CHECK(back.locale == "loc1");
  const auto& u = m.utterances.front();
  CHECK(synthesize(back, u.phonemes).mel.values == synthesize(ma, u.phonemes).mel.values);
}

TEST_CASE("learning-rate schedule decays from the base rate to 5%") {
  CHECK(scheduled_rate(1e-3, 0, 100) == doctest::Approx(1e-3));
  CHECK(scheduled_rate(1e-3, 50, 100) == doctest::Approx(0.525e-3));
  CHECK(scheduled_rate(1e-3, 100, 100) == doctest::Approx(0.05e-3));
}

TEST_CASE("single-utterance overfit") {
  auto m = single_speaker("loc1_spk0");
  m.utterances.resize(1);
  AcousticTrainConfig cfg;
  cfg.model = AcousticConfig::for_variant(Variant::ls_s);
  cfg.steps = 500;
  cfg.batch_size = 1;
  AcousticTrainReport rep;
  const auto model = train_acoustic(m, cfg, 7, &rep);
  CHECK(rep.final_mel_l1 < 0.05);

  // Re-synthesis with ground-truth durations and predicted F0/energy.
  const auto& u = m.utterances.front();
  const auto s = synthesize(model, u.phonemes, u.durations);
  const auto target = dsp::standardize(model.standardizer, m.load_mel(u));
  const auto got = dsp::standardize(model.standardizer, s.mel);
  REQUIRE(got.size() == target.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) l1 += std::abs(got[i] - target[i]);
  CHECK(l1 / static_cast<double>(got.size()) < 0.1);
}
