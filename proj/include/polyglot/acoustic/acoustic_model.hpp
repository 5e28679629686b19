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
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "polyglot/dsp/features.hpp"
#include "polyglot/numerics/tape.hpp"

namespace polyglot::acoustic {

class AcousticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant { fs2_lite, ls, ls_s };
std::string to_string(Variant v);
Variant parse_variant(std::string_view text);  // "fs2", "fs2-lite", "ls", "ls-s"

struct AcousticConfig {
  Variant variant = Variant::fs2_lite;
  std::size_t inventory = 10;  // phonemes in the model's locale
  std::size_t hidden = 256;
  std::size_t encoder_layers = 4;
  std::size_t decoder_layers = 4;
  std::size_t kernel = 3;
  std::size_t predictor_hidden = 256;
  std::size_t predictor_kernel = 3;

  /// Declared sizes: FS2-lite 256/4/4 with 256-wide predictors, LS the same
  /// trunk with 128-wide predictors, LS-S 192/3/3 with 96-wide predictors.
  static AcousticConfig for_variant(Variant v, std::size_t inventory = 10);
  void check() const;
  nlohmann::json to_json() const;
  static AcousticConfig from_json(const nlohmann::json& j);
  bool operator==(const AcousticConfig&) const = default;
};

/// Exact trainable scalar count for the configuration.
std::size_t param_count(const AcousticConfig& config);
/// Scalars in the encoder convolution stack alone.
std::size_t encoder_param_count(const AcousticConfig& config);

/// Fully convolutional FastSpeech-2-style model: phoneme embedding,
/// residual conv encoder, duration / F0 / energy predictors, length
/// regulator, residual conv decoder and a linear mel head. Mels are modelled
/// in standardized space; energy targets are z-scored log frame energies.
struct AcousticModel {
  AcousticConfig config;
  std::string locale;
  numerics::ParameterSet params;
  dsp::Standardizer standardizer;
  double energy_mean = 0.0;
  double energy_std = 1.0;

  static AcousticModel create(const AcousticConfig& config, std::string locale, dsp::Standardizer standardizer,
                              double energy_mean, double energy_std, std::uint64_t seed);
};

struct AcousticOutputs {
  numerics::Var mel;           // [frames, 80], standardized
  numerics::Var log_duration;  // [phonemes, 1]
  numerics::Var f0;            // [frames, 1], normalized
  numerics::Var energy;        // [frames, 1], z-scored
};

/// Teacher-forced pass: ground-truth durations, F0 and energy feed the
/// length regulator and the variance embeddings.
AcousticOutputs forward_teacher(const AcousticModel& model, numerics::Tape& tape, std::span<const numerics::Var> bound,
                                const std::vector<int>& phonemes, const std::vector<int>& durations,
                                std::span<const double> f0_target, std::span<const double> energy_target);

/// Length regulator index: phoneme k repeated durations[k] times.
std::vector<std::size_t> length_regulate(const std::vector<int>& durations);

struct Synthesis {
  dsp::MelSpectrogram mel;  // log-mel, floored
  std::vector<int> durations;
};

/// Without durations, uses round(exp(predicted log-duration)) clamped to >= 1.
Synthesis synthesize(const AcousticModel& model, const std::vector<int>& phonemes,
                     const std::optional<std::vector<int>>& durations = std::nullopt);

void save_acoustic_model(const AcousticModel& model, const std::filesystem::path& path);
AcousticModel load_acoustic_model(const std::filesystem::path& path);

}  // namespace polyglot::acoustic
