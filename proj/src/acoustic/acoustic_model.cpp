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

#include "polyglot/acoustic/acoustic_model.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "polyglot/numerics/checkpoint.hpp"
#include "polyglot/numerics/ops.hpp"
#include "polyglot/numerics/rng.hpp"

namespace polyglot::acoustic {

namespace ops = numerics::ops;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::fs2_lite: return "fs2-lite";
    case Variant::ls: return "ls";
    case Variant::ls_s: return "ls-s";
  }
  return "?";
}

Variant parse_variant(std::string_view t) {
  if (t == "fs2" || t == "fs2-lite" || t == "fs2_lite") return Variant::fs2_lite;
  if (t == "ls") return Variant::ls;
  if (t == "ls-s" || t == "ls_s") return Variant::ls_s;
  throw AcousticError("unknown acoustic variant '" + std::string(t) + "'");
}

AcousticConfig AcousticConfig::for_variant(Variant v, std::size_t inventory) {
  AcousticConfig c;
  c.variant = v;
  c.inventory = inventory;
  switch (v) {
    case Variant::fs2_lite: break;
    case Variant::ls: c.predictor_hidden = 128; break;
    case Variant::ls_s:
      c.hidden = 192;
      c.encoder_layers = c.decoder_layers = 3;
      c.predictor_hidden = 96;
      break;
  }
  return c;
}

void AcousticConfig::check() const {
  if (inventory == 0) throw AcousticError("acoustic model needs a non-empty phoneme inventory");
  if (hidden == 0 || predictor_hidden == 0) throw AcousticError("acoustic hidden sizes must be positive");
  if (encoder_layers == 0 || decoder_layers == 0) throw AcousticError("acoustic encoder and decoder need at least one layer");
  if (kernel % 2 == 0 || predictor_kernel % 2 == 0) throw AcousticError("acoustic kernels must be odd");
}

nlohmann::json AcousticConfig::to_json() const {
  return {{"variant", to_string(variant)}, {"inventory", inventory},
          {"hidden", hidden},              {"encoder_layers", encoder_layers},
          {"decoder_layers", decoder_layers}, {"kernel", kernel},
          {"predictor_hidden", predictor_hidden}, {"predictor_kernel", predictor_kernel}};
}

AcousticConfig AcousticConfig::from_json(const nlohmann::json& j) {
  try {
    auto c = for_variant(parse_variant(j.value("variant", std::string("fs2-lite"))), j.value("inventory", 10));
    c.hidden = j.value("hidden", c.hidden);
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
    c.kernel = j.value("kernel", c.kernel);
    c.predictor_hidden = j.value("predictor_hidden", c.predictor_hidden);
    c.predictor_kernel = j.value("predictor_kernel", c.predictor_kernel);
    c.check();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw AcousticError(std::string("acoustic config: ") + e.what());
  }
}

namespace {

struct Spec {
  std::string name;
  numerics::Shape shape;
  double init_std;  // 0 = zeros
};

std::vector<Spec> layout(const AcousticConfig& c) {
  const std::size_t H = c.hidden, P = c.predictor_hidden, K = c.kernel, KP = c.predictor_kernel;
  auto conv_std = [](std::size_t k, std::size_t cin) { return 1.0 / std::sqrt(static_cast<double>(k * cin)); };
  std::vector<Spec> s;
  s.push_back({"embed", {c.inventory, H}, 1.0});
  for (std::size_t i = 0; i < c.encoder_layers; ++i) {
    s.push_back({"enc.l" + std::to_string(i) + ".w", {K, H, H}, conv_std(K, H)});
    s.push_back({"enc.l" + std::to_string(i) + ".b", {H}, 0.0});
  }
  for (const char* p : {"dur", "f0", "energy"}) {
    const std::string b = p;
    s.push_back({b + ".c1.w", {KP, H, P}, conv_std(KP, H)});
    s.push_back({b + ".c1.b", {P}, 0.0});
    s.push_back({b + ".c2.w", {KP, P, P}, conv_std(KP, P)});
    s.push_back({b + ".c2.b", {P}, 0.0});
    s.push_back({b + ".head.w", {P, 1}, conv_std(1, P)});
    s.push_back({b + ".head.b", {1}, 0.0});
  }
  s.push_back({"var.f0.w", {1, H}, 1.0 / std::sqrt(static_cast<double>(H))});
  s.push_back({"var.energy.w", {1, H}, 1.0 / std::sqrt(static_cast<double>(H))});
  for (std::size_t i = 0; i < c.decoder_layers; ++i) {
    s.push_back({"dec.l" + std::to_string(i) + ".w", {K, H, H}, conv_std(K, H)});
    s.push_back({"dec.l" + std::to_string(i) + ".b", {H}, 0.0});
  }
  s.push_back({"out.w", {H, dsp::kMelBins}, conv_std(1, H)});
  s.push_back({"out.b", {dsp::kMelBins}, 0.0});
  return s;
}

class Bound {
 public:
  Bound(const numerics::ParameterSet& p, std::span<const Var> v) : p_(p), v_(v) {
    if (v.size() != p.size()) throw AcousticError("acoustic parameter count mismatch");
  }
  Var operator()(const std::string& name) const {
    const auto i = p_.find(name);
    if (!i) throw AcousticError("missing acoustic parameter " + name);
    return v_[*i];
  }

 private:
  const numerics::ParameterSet& p_;
  std::span<const Var> v_;
};

Var residual_stack(const Bound& p, const char* prefix, std::size_t layers, Var h) {
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string n = std::string(prefix) + ".l" + std::to_string(i);
    h = ops::add(h, ops::tanh(ops::conv1d(h, p(n + ".w"), p(n + ".b"))));
  }
  return h;
}

Var predictor(const Bound& p, const std::string& n, Var x) {
  Var h = ops::tanh(ops::conv1d(x, p(n + ".c1.w"), p(n + ".c1.b")));
  h = ops::tanh(ops::conv1d(h, p(n + ".c2.w"), p(n + ".c2.b")));
  return ops::add_row(ops::matmul(h, p(n + ".head.w")), p(n + ".head.b"));
}

std::vector<std::size_t> phoneme_index(const AcousticConfig& c, const std::vector<int>& phonemes) {
  if (phonemes.empty()) throw AcousticError("empty phoneme sequence");
  std::vector<std::size_t> idx;
  idx.reserve(phonemes.size());
  for (int ph : phonemes) {
    if (ph < 0 || static_cast<std::size_t>(ph) >= c.inventory)
      throw AcousticError("unknown phoneme id " + std::to_string(ph) + " (inventory " + std::to_string(c.inventory) + ")");
    idx.push_back(static_cast<std::size_t>(ph));
  }
  return idx;
}

// Sinusoidal position table [rows, width], as in transformer TTS front ends.
Tensor positions(std::size_t rows, std::size_t width) {
  std::vector<double> v(rows * width);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(width));
      v[t * width + i] = i % 2 == 0 ? std::sin(static_cast<double>(t) * rate) : std::cos(static_cast<double>(t) * rate);
    }
  }
  return Tensor({rows, width}, std::move(v));
}

Var encode(const AcousticModel& m, const Bound& p, const std::vector<int>& phonemes) {
  Var h = ops::gather_rows(p("embed"), phoneme_index(m.config, phonemes));
  h = ops::add(h, h.tape->constant(positions(phonemes.size(), m.config.hidden)));
  return residual_stack(p, "enc", m.config.encoder_layers, h);
}

Var decode(const AcousticModel& m, const Bound& p, Var e, Var f0, Var energy) {
  e = ops::add(e, e.tape->constant(positions(e.value().rows(), m.config.hidden)));
  e = ops::add(e, ops::add(ops::matmul(f0, p("var.f0.w")), ops::matmul(energy, p("var.energy.w"))));
  e = residual_stack(p, "dec", m.config.decoder_layers, e);
  return ops::add_row(ops::matmul(e, p("out.w")), p("out.b"));
}

Tensor column(std::span<const double> v) { return Tensor({v.size(), 1}, std::vector<double>(v.begin(), v.end())); }

std::filesystem::path sidecar(const std::filesystem::path& p) { return p.string() + ".json"; }

}  // namespace

std::size_t param_count(const AcousticConfig& c) {
  c.check();
  std::size_t n = 0;
  for (const auto& s : layout(c)) n += numerics::shape_size(s.shape);
  return n;
}

std::size_t encoder_param_count(const AcousticConfig& c) {
  c.check();
  return c.encoder_layers * (c.kernel * c.hidden * c.hidden + c.hidden);
}

AcousticModel AcousticModel::create(const AcousticConfig& config, std::string locale, dsp::Standardizer standardizer,
                                    double energy_mean, double energy_std, std::uint64_t seed) {
  config.check();
  if (standardizer.dims() != dsp::kMelBins) throw AcousticError("standardizer must cover 80 mel bins");
  if (!(energy_std > 0.0)) throw AcousticError("energy spread must be positive");
  AcousticModel m;
  m.config = config;
  m.locale = std::move(locale);
  m.standardizer = std::move(standardizer);
  m.energy_mean = energy_mean;
  m.energy_std = energy_std;
  numerics::Rng root(seed);
  for (const auto& s : layout(config)) {
    std::vector<double> v(numerics::shape_size(s.shape), 0.0);
    if (s.init_std > 0.0) {
      auto rng = root.split(s.name);
      for (auto& x : v) x = rng.normal(0.0, s.init_std);
    }
    m.params.add(s.name, Tensor(s.shape, std::move(v)));
  }
  return m;
}

std::vector<std::size_t> length_regulate(const std::vector<int>& durations) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < durations.size(); ++k) {
    if (durations[k] < 1) throw AcousticError("durations must be at least one frame");
    idx.insert(idx.end(), static_cast<std::size_t>(durations[k]), k);
  }
  return idx;
}

AcousticOutputs forward_teacher(const AcousticModel& m, Tape& tape, std::span<const Var> bound,
                                const std::vector<int>& phonemes, const std::vector<int>& durations,
                                std::span<const double> f0_target, std::span<const double> energy_target) {
  if (durations.size() != phonemes.size()) throw AcousticError("phoneme and duration arrays disagree");
  const Bound p(m.params, bound);
  const auto frames = length_regulate(durations);
  if (f0_target.size() != frames.size() || energy_target.size() != frames.size())
    throw AcousticError("variance targets do not match the duration total");
  AcousticOutputs out;
  Var h = encode(m, p, phonemes);
  out.log_duration = predictor(p, "dur", h);
  Var e = ops::gather_rows(h, frames);
  out.f0 = predictor(p, "f0", e);
  out.energy = predictor(p, "energy", e);
  out.mel = decode(m, p, e, tape.constant(column(f0_target)), tape.constant(column(energy_target)));
  return out;
}

Synthesis synthesize(const AcousticModel& m, const std::vector<int>& phonemes,
                     const std::optional<std::vector<int>>& durations) {
  Tape tape;
  std::vector<Var> bound;
  for (const auto& v : m.params.values()) bound.push_back(tape.constant(v));
  const Bound p(m.params, bound);
  Var h = encode(m, p, phonemes);

  Synthesis out;
  if (durations) {
    if (durations->size() != phonemes.size()) throw AcousticError("phoneme and duration arrays disagree");
    out.durations = *durations;
  } else {
    const auto logd = predictor(p, "dur", h).value();
    for (std::size_t k = 0; k < phonemes.size(); ++k) {
      const double d = std::round(std::exp(logd[k]));
      out.durations.push_back(std::isfinite(d) ? static_cast<int>(std::max(1.0, std::min(d, 1e4))) : 1);
    }
  }
  const auto frames = length_regulate(out.durations);
  Var e = ops::gather_rows(h, frames);
  Var f0 = tape.constant(predictor(p, "f0", e).value());
  Var energy = tape.constant(predictor(p, "energy", e).value());
  const auto mel = decode(m, p, e, f0, energy).value();
  out.mel = dsp::destandardize(m.standardizer, mel.values(), frames.size());
  dsp::clamp_to_floor(out.mel);
  return out;
}

void save_acoustic_model(const AcousticModel& m, const std::filesystem::path& path) {
  auto tensors = numerics::to_named(m.params);
  tensors.push_back({"standardizer.min", Tensor::vector(m.standardizer.min)});
  tensors.push_back({"standardizer.max", Tensor::vector(m.standardizer.max)});
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  numerics::save_checkpoint(path, tensors);
  const nlohmann::json j{{"format", "polyglot-acoustic"}, {"version", 1},
                         {"config", m.config.to_json()},  {"locale", m.locale},
                         {"energy_mean", m.energy_mean},  {"energy_std", m.energy_std}};
  std::ofstream out(sidecar(path));
  out << j.dump(2) << '\n';
  if (!out) throw AcousticError("cannot write " + sidecar(path).string());
}

AcousticModel load_acoustic_model(const std::filesystem::path& path) {
  std::ifstream in(sidecar(path));
  if (!in) throw AcousticError("missing model description " + sidecar(path).string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw AcousticError(sidecar(path).string() + ": " + e.what());
  }
  if (j.value("format", "") != "polyglot-acoustic") throw AcousticError(sidecar(path).string() + ": not an acoustic model");
  const auto tensors = numerics::load_checkpoint(path);
  dsp::Standardizer s{numerics::find_tensor(tensors, "standardizer.min").values(),
                      numerics::find_tensor(tensors, "standardizer.max").values()};
  auto m = AcousticModel::create(AcousticConfig::from_json(j.at("config")), j.at("locale").get<std::string>(),
                                 std::move(s), j.at("energy_mean").get<double>(), j.at("energy_std").get<double>(), 0);
  numerics::load_into(m.params, tensors);
  return m;
}

}  // namespace polyglot::acoustic
