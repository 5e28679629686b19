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

#include <algorithm>
#include <cmath>

#include "polyglot/eval/mushra.hpp"

namespace polyglot::eval {

std::string to_string(Aspect a) {
  switch (a) {
    case Aspect::naturalness: return "naturalness";
    case Aspect::speaker_similarity: return "speaker_similarity";
    case Aspect::accent_similarity: return "accent_similarity";
  }
  return "?";
}

std::string to_string(Role r) {
  switch (r) {
    case Role::upper_anchor: return "upper_anchor";
    case Role::lower_anchor: return "lower_anchor";
    case Role::candidate: return "candidate";
  }
  return "?";
}

Aspect parse_aspect(std::string_view t) {
  if (t == "naturalness") return Aspect::naturalness;
  if (t == "speaker_similarity") return Aspect::speaker_similarity;
  if (t == "accent_similarity") return Aspect::accent_similarity;
  throw EvalError("unknown aspect '" + std::string(t) + "'");
}

Role parse_role(std::string_view t) {
  if (t == "upper_anchor") return Role::upper_anchor;
  if (t == "lower_anchor") return Role::lower_anchor;
  if (t == "candidate") return Role::candidate;
  throw EvalError("unknown role '" + std::string(t) + "'");
}

std::map<ScreenKey, std::vector<const Rating*>> ResponseSet::screens() const {
  std::map<ScreenKey, std::vector<const Rating*>> out;
  for (const auto& r : ratings) out[{r.listener_id, r.utterance_id, r.aspect}].push_back(&r);
  return out;
}

std::vector<Aspect> ResponseSet::aspects() const {
  std::set<Aspect> s;
  for (const auto& r : ratings) s.insert(r.aspect);
  return {s.begin(), s.end()};
}

std::map<std::string, Role> ResponseSet::systems(Aspect aspect) const {
  std::map<std::string, Role> out;
  for (const auto& r : ratings)
    if (r.aspect == aspect) out.emplace(r.system_id, r.role);
  return out;
}

std::set<std::string> ResponseSet::listeners() const {
  std::set<std::string> out;
  for (const auto& r : ratings) out.insert(r.listener_id);
  return out;
}

void ResponseSet::validate() const {
  std::map<std::pair<Aspect, std::string>, Role> roles;
  for (const auto& r : ratings) {
    if (!(r.score >= 0.0 && r.score <= 100.0))
      throw EvalError("score " + std::to_string(r.score) + " for " + r.system_id + " by " + r.listener_id +
                      " is outside [0, 100]");
    if (r.listener_id.empty() || r.utterance_id.empty() || r.system_id.empty())
      throw EvalError("rating with an empty identifier");
    auto [it, fresh] = roles.emplace(std::pair{r.aspect, r.system_id}, r.role);
    if (!fresh && it->second != r.role)
      throw EvalError("system " + r.system_id + " has conflicting roles in " + to_string(r.aspect));
  }
  std::map<Aspect, std::set<std::string>> full;
  for (const auto& [key, role] : roles) full[key.first].insert(key.second);
  for (const auto& [key, rs] : screens()) {
    std::set<std::string> seen;
    for (const Rating* r : rs)
      if (!seen.insert(r->system_id).second)
        throw EvalError("system " + r->system_id + " rated twice by " + key.listener_id + " on " + key.utterance_id);
    if (seen != full[key.aspect])
      throw EvalError("screen " + key.listener_id + "/" + key.utterance_id + " (" + to_string(key.aspect) + ") rates " +
                      std::to_string(seen.size()) + " of " + std::to_string(full[key.aspect].size()) + " systems");
  }
}

CheaterFilter filter_cheaters(const ResponseSet& responses, std::size_t threshold, double slider_default) {
  if (threshold < 1) throw EvalError("cheater threshold must be at least 1");
  auto lazy = [&](double s) { return s == 0.0 || s == 100.0 || s == slider_default; };
  CheaterFilter f;
  for (const auto& l : responses.listeners()) f.flagged_screens[l] = 0;
  for (const auto& [key, rs] : responses.screens())
    if (std::all_of(rs.begin(), rs.end(), [&](const Rating* r) { return lazy(r->score); }))
      ++f.flagged_screens[key.listener_id];
  std::set<std::string> out;
  for (const auto& [l, n] : f.flagged_screens)
    if (n > threshold) out.insert(l);
  f.excluded.assign(out.begin(), out.end());
  for (const auto& r : responses.ratings)
    if (!out.count(r.listener_id)) f.kept.ratings.push_back(r);
  return f;
}

std::map<std::string, double> system_means(const ResponseSet& responses, Aspect aspect) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& r : responses.ratings) {
    if (r.aspect != aspect) continue;
    auto& [sum, n] = acc[r.system_id];
    sum += r.score;
    ++n;
  }
  if (acc.empty()) throw EvalError("no ratings for " + to_string(aspect));
  std::map<std::string, double> out;
  for (const auto& [id, a] : acc) out[id] = a.first / static_cast<double>(a.second);
  return out;
}

double remaining_gap(double score, double l, double u) {
  if (!(u > l)) throw EvalError("upper anchor mean must exceed the lower anchor mean");
  return 100.0 - (score - l) / (u - l) * 100.0;
}

double ctg(const CtgInput& in) {
  const double ns = remaining_gap(in.s, in.l, in.u);
  const double nv = remaining_gap(in.v, in.l, in.u);
  if (ns == 0.0) throw EvalError("baseline already matches the upper anchor; CTG undefined");
  return (ns - nv) / ns * 100.0;
}

bool outside_anchors(const CtgInput& in) {
  auto out = [&](double x) { return x < in.l || x > in.u; };
  return out(in.s) || out(in.v);
}

double dctg(double ctg_small, double ctg_big) { return ctg_small - ctg_big; }

}  // namespace polyglot::eval
