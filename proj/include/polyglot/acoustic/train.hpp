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

#include <cstdint>
#include <vector>

#include "polyglot/acoustic/acoustic_model.hpp"
#include "polyglot/corpus/manifest.hpp"

namespace polyglot::acoustic {

struct AcousticTrainConfig {
  AcousticConfig model;  // inventory is taken from the manifest's locale
  std::size_t steps = 300;
  std::size_t batch_size = 2;
  double learning_rate = 1e-3;

  void check() const;
  nlohmann::json to_json() const;
  static AcousticTrainConfig from_json(const nlohmann::json& j);
};

/// Training targets for one utterance, all on the mel frame grid.
struct AcousticExample {
  std::string id;
  std::vector<int> phonemes;
  std::vector<int> durations;
  numerics::Tensor mel;        // standardized [frames, 80]
  std::vector<double> f0;      // utterance-normalized, interpolated
  std::vector<double> energy;  // z-scored log frame energy
};

struct AcousticLoss {
  numerics::Var total;
  numerics::Var mel_l1;
  numerics::Var duration;
  numerics::Var f0;
  numerics::Var energy;
};

/// L1 on standardized mels plus MSE on log-duration, F0 and energy.
AcousticLoss acoustic_loss(const AcousticModel& model, numerics::Tape& tape, std::span<const numerics::Var> bound,
                           const AcousticExample& example);

/// Teacher-forced mel L1 (standardized units) for one example.
double teacher_forced_l1(const AcousticModel& model, const AcousticExample& example);

struct AcousticTrainReport {
  std::vector<double> loss_curve;
  std::vector<double> mel_l1_curve;
  double final_mel_l1 = 0.0;  // mean teacher-forced L1 over the training set
  std::size_t utterances = 0;
};

/// Cosine decay from `base` to 5% of it over the run.
double scheduled_rate(double base, std::size_t step, std::size_t steps);

/// Throws AcousticError naming the first utterance whose speaker or locale
/// differs from the first utterance's.
void check_single_speaker_locale(const corpus::CorpusManifest& manifest);

AcousticModel train_acoustic(const corpus::CorpusManifest& manifest, const AcousticTrainConfig& config,
                             std::uint64_t seed, AcousticTrainReport* report = nullptr);

/// Builds examples using the model's standardizer and energy statistics.
AcousticExample make_example(const AcousticModel& model, const corpus::CorpusManifest& manifest,
                             const corpus::Utterance& u);

}  // namespace polyglot::acoustic
