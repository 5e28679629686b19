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

#include <cstdio>
#include <sstream>

#include "polyglot/eval/report.hpp"

namespace polyglot::eval {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::optional<std::string> only(const std::map<std::string, Role>& roles, Role want) {
  std::optional<std::string> hit;
  for (const auto& [id, r] : roles) {
    if (r != want) continue;
    if (hit) return std::nullopt;
    hit = id;
  }
  return hit;
}

AspectReport analyze_aspect(const ResponseSet& rs, Aspect aspect, const AnalysisOptions& opt) {
  AspectReport ar;
  ar.aspect = aspect;
  ar.roles = rs.systems(aspect);
  ar.means = system_means(rs, aspect);

  std::map<std::string, std::map<std::string, double>> by_screen;  // screen -> system -> score
  std::set<std::string> listeners;
  for (const auto& r : rs.ratings) {
    if (r.aspect != aspect) continue;
    by_screen[r.listener_id + '\n' + r.utterance_id][r.system_id] = r.score;
    listeners.insert(r.listener_id);
  }
  ar.screens = by_screen.size();
  ar.listeners = listeners.size();

  std::vector<std::string> ids;
  for (const auto& [id, role] : ar.roles) ids.push_back(id);
  std::vector<double> ps;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      Comparison c{ids[i], ids[j], 0.0, {}, {}};
      std::vector<std::pair<double, double>> pairs;
      for (const auto& [screen, scores] : by_screen) {
        pairs.emplace_back(scores.at(ids[i]), scores.at(ids[j]));
        c.mean_difference += pairs.back().first - pairs.back().second;
      }
      c.mean_difference /= static_cast<double>(pairs.size());
      c.test = wilcoxon_signed_rank(pairs);
      ps.push_back(c.test.p_value);
      ar.comparisons.push_back(std::move(c));
    }
  }
  const auto holm = holm_bonferroni(ps, opt.alpha);
  for (std::size_t k = 0; k < holm.size(); ++k) ar.comparisons[k].holm = holm[k];

  const auto upper = only(ar.roles, Role::upper_anchor);
  const auto lower = only(ar.roles, Role::lower_anchor);
  if (!upper || !lower) return ar;

  std::vector<std::pair<std::string, std::string>> directions;
  if (opt.baseline || opt.proposed) {
    if (!opt.baseline || !opt.proposed) throw EvalError("CTG needs both a baseline and a proposed system");
    for (const auto* id : {&*opt.baseline, &*opt.proposed})
      if (!ar.means.count(*id)) throw EvalError("system " + *id + " has no " + to_string(aspect) + " ratings");
    directions.emplace_back(*opt.baseline, *opt.proposed);
  } else {
    for (const auto& a : ids)
      for (const auto& b : ids)
        if (a != b && ar.roles.at(a) == Role::candidate && ar.roles.at(b) == Role::candidate)
          directions.emplace_back(a, b);
  }
  for (const auto& [s, v] : directions) {
    CtgRow row{s, v, {ar.means.at(s), ar.means.at(v), ar.means.at(*lower), ar.means.at(*upper)}, 0.0, false, false};
    row.ctg = ctg(row.input);
    row.outside_anchors = outside_anchors(row.input);
    for (const auto& c : ar.comparisons)
      if ((c.a == s && c.b == v) || (c.a == v && c.b == s)) row.significant = c.holm.reject;
    ar.ctg.push_back(row);
  }
  return ar;
}

}  // namespace

AnalysisReport analyze(const ResponseSet& responses, const AnalysisOptions& options) {
  responses.validate();
  auto filtered = filter_cheaters(responses, options.cheater_threshold, options.slider_default);
  if (filtered.kept.ratings.empty()) throw EvalError("no ratings left after cheater filtering");
  AnalysisReport rep;
  rep.options = options;
  rep.excluded_listeners = filtered.excluded;
  rep.kept_listeners = filtered.kept.listeners().size();
  for (Aspect a : filtered.kept.aspects()) rep.aspects.push_back(analyze_aspect(filtered.kept, a, options));
  return rep;
}

nlohmann::json AnalysisReport::to_json() const {
  nlohmann::json j;
  j["ctg_convention"] = "(n_s - n_v) / n_s * 100, n_i = 100 - (i - l) / (u - l) * 100; positive = gap closed";
  j["excluded_listeners"] = excluded_listeners;
  j["kept_listeners"] = kept_listeners;
  j["cheater_threshold"] = options.cheater_threshold;
  j["slider_default"] = options.slider_default;
  j["alpha"] = options.alpha;
  auto aspects_json = nlohmann::json::array();
  for (const auto& a : aspects) {
    nlohmann::json aj{{"aspect", to_string(a.aspect)}, {"listeners", a.listeners}, {"screens", a.screens}};
    for (const auto& [id, m] : a.means) aj["systems"][id] = {{"role", to_string(a.roles.at(id))}, {"mean", m}};
    aj["comparisons"] = nlohmann::json::array();
    for (const auto& c : a.comparisons)
      aj["comparisons"].push_back({{"a", c.a},
                                   {"b", c.b},
                                   {"mean_difference", c.mean_difference},
                                   {"w_plus", c.test.w_plus},
                                   {"n", c.test.n_effective},
                                   {"p", c.test.p_value},
                                   {"exact", c.test.exact},
                                   {"degenerate", c.test.degenerate},
                                   {"p_holm", c.holm.adjusted},
                                   {"significant", c.holm.reject}});
    aj["ctg"] = nlohmann::json::array();
    for (const auto& r : a.ctg)
      aj["ctg"].push_back({{"baseline", r.baseline},
                           {"proposed", r.proposed},
                           {"s", r.input.s},
                           {"v", r.input.v},
                           {"l", r.input.l},
                           {"u", r.input.u},
                           {"ctg", r.ctg},
                           {"outside_anchors", r.outside_anchors},
                           {"significant", r.significant}});
    aspects_json.push_back(std::move(aj));
  }
  j["aspects"] = std::move(aspects_json);
  return j;
}

std::string AnalysisReport::to_text() const {
  std::ostringstream os;
  os << "MUSHRA analysis: " << kept_listeners << " listeners kept";
  if (!excluded_listeners.empty()) {
    os << ", excluded:";
    for (const auto& l : excluded_listeners) os << ' ' << l;
  }
  os << "\nCTG = (n_s - n_v) / n_s x 100 with n_i = 100 - (i - l)/(u - l) x 100; positive means the proposed\n"
        "system closed part of the baseline's gap to the upper anchor.\n\n";

  // Systems as rows, aspects as columns; anchors bracket the candidates.
  std::vector<std::string> rows;
  auto add_role = [&](Role want) {
    std::set<std::string> ids;
    for (const auto& a : aspects)
      for (const auto& [id, r] : a.roles)
        if (r == want) ids.insert(id);
    for (const auto& id : ids) rows.push_back(id);
  };
  add_role(Role::upper_anchor);
  add_role(Role::candidate);
  add_role(Role::lower_anchor);
  const std::size_t w = 22;
  os << pad("system", w);
  for (const auto& a : aspects) os << pad(to_string(a.aspect), w);
  os << '\n';
  for (const auto& id : rows) {
    os << pad(id, w);
    for (const auto& a : aspects) {
      const auto it = a.means.find(id);
      os << pad(it == a.means.end() ? "-" : fixed(it->second), w);
    }
    os << '\n';
  }
  for (const auto& a : aspects) {
    for (const auto& r : a.ctg) {
      os << "CTG " << to_string(a.aspect) << " " << r.proposed << " vs " << r.baseline << ": " << fixed(r.ctg, 1) << "%"
         << (r.significant ? "" : " (n.s.)") << (r.outside_anchors ? " [mean outside anchors]" : "") << '\n';
    }
  }
  os << "\nPairwise Wilcoxon signed-rank, Holm-corrected within aspect (alpha " << fixed(options.alpha, 3) << "):\n";
  for (const auto& a : aspects) {
    for (const auto& c : a.comparisons) {
      os << "  " << pad(to_string(a.aspect), 20) << pad(c.a + " - " + c.b, 2 * w) << "diff " << pad(fixed(c.mean_difference), 8)
         << "p " << pad(fixed(c.test.p_value, 4), 8) << "p_holm " << pad(fixed(c.holm.adjusted, 4), 8)
         << (c.holm.reject ? "significant" : "n.s.") << (c.test.degenerate ? " (all ties)" : "") << '\n';
    }
  }
  return os.str();
}

}  // namespace polyglot::eval
