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

#include <span>
#include <string>
#include <vector>

#include "polyglot/dsp/features.hpp"

namespace polyglot::corpus {

/// Mean log-mel frame of an utterance.
std::vector<double> mel_signature(const dsp::MelSpectrogram& mel);

double cosine(std::span<const double> a, std::span<const double> b);

/// Nearest-centroid classifier by cosine similarity. Signatures are centred on
/// the mean of the fitting set before centroids are formed and before scoring.
class CentroidClassifier {
 public:
  void fit(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& signatures);

  const std::vector<std::string>& labels() const { return labels_; }
  /// Cosine similarity of a raw signature to the centroid of `label`.
  double similarity(std::span<const double> signature, const std::string& label) const;
  std::vector<double> similarities(std::span<const double> signature) const;
  std::string predict(std::span<const double> signature) const;
  const std::vector<double>& global_mean() const { return global_mean_; }

 private:
  std::vector<double> centred(std::span<const double> signature) const;
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> centroids_;
  std::vector<double> global_mean_;
};

}  // namespace polyglot::corpus
