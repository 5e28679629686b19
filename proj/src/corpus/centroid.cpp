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

#include "polyglot/corpus/centroid.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "polyglot/corpus/manifest.hpp"

namespace polyglot::corpus {

std::vector<double> mel_signature(const dsp::MelSpectrogram& mel) {
  if (mel.frames == 0) throw CorpusError("signature of an empty mel");
  return mel.mean_frame();
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw CorpusError("cosine of vectors with different lengths");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

void CentroidClassifier::fit(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& sigs) {
  if (labels.empty() || labels.size() != sigs.size()) throw CorpusError("classifier fit needs one label per signature");
  const std::size_t dim = sigs.front().size();
  global_mean_.assign(dim, 0.0);
  for (const auto& s : sigs) {
    if (s.size() != dim) throw CorpusError("classifier signatures differ in length");
    for (std::size_t i = 0; i < dim; ++i) global_mean_[i] += s[i];
  }
  for (auto& v : global_mean_) v /= static_cast<double>(sigs.size());

  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t n = 0; n < sigs.size(); ++n) {
    auto& [sum, count] = acc[labels[n]];
    if (sum.empty()) sum.assign(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) sum[i] += sigs[n][i] - global_mean_[i];
    ++count;
  }
  labels_.clear();
  centroids_.clear();
  for (auto& [label, entry] : acc) {
    for (auto& v : entry.first) v /= static_cast<double>(entry.second);
    labels_.push_back(label);
    centroids_.push_back(std::move(entry.first));
  }
}

std::vector<double> CentroidClassifier::centred(std::span<const double> signature) const {
  if (signature.size() != global_mean_.size()) throw CorpusError("signature length does not match classifier");
  std::vector<double> c(signature.begin(), signature.end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= global_mean_[i];
  return c;
}

double CentroidClassifier::similarity(std::span<const double> signature, const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw CorpusError("classifier has no class '" + label + "'");
  return cosine(centred(signature), centroids_[static_cast<std::size_t>(it - labels_.begin())]);
}

std::vector<double> CentroidClassifier::similarities(std::span<const double> signature) const {
  const auto c = centred(signature);
  std::vector<double> out;
  for (const auto& centroid : centroids_) out.push_back(cosine(c, centroid));
  return out;
}

std::string CentroidClassifier::predict(std::span<const double> signature) const {
  if (labels_.empty()) throw CorpusError("classifier is not fitted");
  const auto s = similarities(signature);
  return labels_[static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin())];
}

}  // namespace polyglot::corpus
