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
#include <string>
#include <vector>

#include "json.hpp"
#include "polyglot/corpus/manifest.hpp"
#include "polyglot/flow_vc/vc_model.hpp"

namespace polyglot::flow_vc {

struct VcTrainConfig {
  FlowConfig flow;  // channels and cond_dim are derived from the corpus
  std::size_t steps = 600;
  std::size_t batch_size = 4;
  std::size_t crop_frames = 96;  // 0 trains on whole utterances
  double learning_rate = 2e-3;
  bool use_supporting = true;

  void check() const;
  nlohmann::json to_json() const;
  static VcTrainConfig from_json(const nlohmann::json& j);
};

struct VcTrainReport {
  std::vector<double> loss_curve;  // minibatch NLL per step
  double initial_nll = 0.0;        // whole training set, before the first step
  double final_nll = 0.0;          // whole training set, after the last step
  std::size_t utterances = 0;
  std::vector<std::string> speakers;
};

/// One training example: standardized mel and its own-speaker conditioning.
struct VcExample {
  numerics::Tensor x;
  ConditioningInputs cond;
};

/// Source and target speakers, plus supporting ones when asked.
std::vector<const corpus::Utterance*> vc_training_utterances(const corpus::CorpusManifest& manifest,
                                                             bool use_supporting);

VcExample make_example(const VcModel& model, const corpus::CorpusManifest& manifest, const corpus::Utterance& u);

/// Mean per-utterance NLL over the examples.
double mean_nll(const VcModel& model, const std::vector<VcExample>& examples);

/// Adam on the flow and the phoneme table. Deterministic for a given seed.
VcModel train_vc(const corpus::CorpusManifest& manifest, const VcTrainConfig& config, std::uint64_t seed,
                 VcTrainReport* report = nullptr);

/// Mean of each consecutive `window`-step block of the loss curve.
std::vector<double> block_means(const std::vector<double>& curve, std::size_t window);

}  // namespace polyglot::flow_vc
