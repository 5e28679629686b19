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
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "polyglot/eval/objective.hpp"
#include "polyglot/eval/reference.hpp"
#include "polyglot/eval/report.hpp"
#include "polyglot/numerics/rng.hpp"

using namespace polyglot;
using namespace polyglot::eval;
using numerics::Rng;

namespace {

std::vector<std::pair<double, double>> from_diffs(const std::vector<double>& d) {
  std::vector<std::pair<double, double>> p;
  for (double x : d) p.emplace_back(50.0 + x, 50.0);
  return p;
}

// Listeners rate `systems` on `screens` utterances with N(mean, sd) noise.
ResponseSet simulate(Rng& rng, const std::map<std::string, std::pair<double, Role>>& systems, std::size_t listeners,
                     std::size_t screens, double sd, Aspect aspect = Aspect::naturalness) {
  ResponseSet rs;
  for (std::size_t l = 0; l < listeners; ++l)
    for (std::size_t s = 0; s < screens; ++s)
      for (const auto& [id, mr] : systems) {
        double score = std::clamp(std::round(rng.normal(mr.first, sd)), 0.0, 100.0);
        if (aspect == Aspect::speaker_similarity && mr.second == Role::upper_anchor) score = 100.0;
        rs.ratings.push_back({"L" + std::to_string(l), "u" + std::to_string(s), aspect, id, score, mr.second});
      }
  return rs;
}

void add_screen(ResponseSet& rs, const std::string& listener, const std::string& utt, std::vector<double> scores) {
  const char* ids[] = {"upper", "vc", "std", "lower"};
  const Role roles[] = {Role::upper_anchor, Role::candidate, Role::candidate, Role::lower_anchor};
  for (std::size_t k = 0; k < scores.size(); ++k)
    rs.ratings.push_back({listener, utt, Aspect::naturalness, ids[k], scores[k], roles[k]});
}

}  // namespace

TEST_CASE("CTG on published rows") {
  CHECK(std::abs(ctg({64.08, 69.60, 42.62, 82.60}) - 29.8) <= 0.05);
  CHECK(std::abs(ctg({64.82, 66.38, 22.37, 100.00}) - 4.4) <= 0.05);
  CHECK(std::abs(ctg({68.69, 67.60, 28.37, 100.00}) - (-3.5)) <= 0.05);
  CHECK(ctg({55.0, 55.0, 20.0, 90.0}) == 0.0);
  CHECK_THROWS_AS(ctg({50, 60, 80, 80}), EvalError);
  CHECK_THROWS_AS(ctg({50, 60, 90, 80}), EvalError);
  CHECK_THROWS_AS(ctg({80, 70, 20, 80}), EvalError);  // baseline gap already closed
  CHECK(outside_anchors({85, 70, 20, 80}));
  CHECK_FALSE(outside_anchors({60, 70, 20, 80}));
}

TEST_CASE("published CTG cells recompute from their means") {
  // Frozen from the direct (v - s)/(u - s) form, three decimals.
  const std::vector<double> frozen{29.806, 4.434, 30.019, 28.629, -0.595, 26.408, 4.624, -3.481,
                                   10.972, 21.053, 11.182, 38.004, 36.811, 12.281, 29.683};
  const auto& cells = reference_ctg();
  REQUIRE(cells.size() == frozen.size());
  const auto checks = check_reference_ctg(0.2);
  std::set<std::string> diverging;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& m = cells[i].means;
    CHECK(checks[i].recomputed == doctest::Approx(testing::ctg_direct(m.s, m.v, m.u)).epsilon(1e-12));
    CHECK(std::abs(checks[i].recomputed - frozen[i]) <= 5e-4);
    if (checks[i].diverges) diverging.insert(cells[i].label + " " + to_string(cells[i].aspect));
  }
  // Rounded means cannot reach these two printed values.
  CHECK(diverging == std::set<std::string>{"D1/S1/fr-CA naturalness", "D2/S1/fr-CA accent_similarity"});
  CHECK(std::abs(checks[9].recomputed - 21.1) <= 0.2);
  const auto text = reference_text(checks, check_reference_dctg());
  CHECK(text.find("DIVERGES (-3.55)") != std::string::npos);
}

TEST_CASE("published DCTG rows") {
  const auto checks = check_reference_dctg(0.005);
  REQUIRE(checks.size() == 12);
  for (const auto& c : checks) CHECK_MESSAGE(!c.diverges, c.label);
  CHECK(std::abs(dctg(42.27, 32.87) - 9.40) <= 0.005);
  CHECK(std::abs(dctg(45.19, 16.42) - 28.77) <= 0.005);
  CHECK(dctg(12.5, 12.5) == 0.0);
}

TEST_CASE("CTG is invariant to increasing affine maps and swaps by definition") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double l = rng.uniform(0, 50), u = l + rng.uniform(5, 50);
    const double s = rng.uniform(l, u - 1), v = rng.uniform(l, u);
    const double r = ctg({s, v, l, u});
    const double a = rng.uniform(0.1, 10), b = rng.uniform(-100, 100);
    CHECK(ctg({a * s + b, a * v + b, a * l + b, a * u + b}) == doctest::Approx(r).epsilon(1e-9).scale(1));
    const double ns = remaining_gap(s, l, u), nv = remaining_gap(v, l, u);
    if (nv > 1e-6) CHECK(ctg({v, s, l, u}) == doctest::Approx(-r * ns / nv).epsilon(1e-9).scale(1));
  }
}

TEST_CASE("signed-rank exact p-values") {
  const auto r = wilcoxon_signed_rank({{1, 2}, {3, 4}, {5, 6}});
  CHECK(r.exact);
  CHECK(r.n_effective == 3);
  CHECK(r.w_plus == 0.0);
  CHECK(r.p_value == doctest::Approx(0.25).epsilon(1e-15));

  const auto flat = wilcoxon_signed_rank({{4, 4}, {7, 7}});
  CHECK(flat.degenerate);
  CHECK(flat.p_value == 1.0);
  CHECK_THROWS_AS(wilcoxon_signed_rank({}), EvalError);

  CHECK(wilcoxon_signed_rank(from_diffs({2, -1, 3, 5, -4, 6, 7, 8})).p_value == doctest::Approx(0.078125));

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) d.push_back(static_cast<double>(static_cast<int>(rng.below(9)) - 4));
    const auto got = wilcoxon_signed_rank(from_diffs(d));
    if (got.degenerate) continue;
    CHECK(got.exact);
    CHECK(std::abs(got.p_value - testing::brute_force_signed_rank_p(d)) <= 1e-12);
  }
}

TEST_CASE("signed-rank normal approximation") {
  std::vector<double> up;
  for (int i = 1; i <= 20; ++i) up.push_back(i);
  auto r = wilcoxon_signed_rank(from_diffs(up));
  CHECK_FALSE(r.exact);
  CHECK(r.p_value == doctest::Approx(9.569173157059432e-05).epsilon(1e-9));
  // Tied magnitudes exercise the variance correction.
  r = wilcoxon_signed_rank(from_diffs({3, -1, 4, 1, -5, 9, 2, -6, 5, 3, 5, -8, 9, 7, 9, 3, -2, 3, 8, 4}));
  CHECK(r.p_value == doctest::Approx(0.03300257969589784).epsilon(1e-9));
  // Zeros are dropped before ranking.
  auto with_zeros = up;
  with_zeros.insert(with_zeros.end(), {0, 0, 0});
  const auto z = wilcoxon_signed_rank(from_diffs(with_zeros));
  CHECK(z.n_effective == 20);
  CHECK(z.p_value == doctest::Approx(9.569173157059432e-05).epsilon(1e-9));
}

TEST_CASE("Holm-Bonferroni") {
  auto h = holm_bonferroni({0.03});
  CHECK(h[0].adjusted == doctest::Approx(0.03));
  CHECK(h[0].reject);
  h = holm_bonferroni({0.01, 0.04, 0.03});
  CHECK(h[0].adjusted == doctest::Approx(0.03));
  CHECK(h[1].adjusted == doctest::Approx(0.06));
  CHECK(h[2].adjusted == doctest::Approx(0.06));
  CHECK(h[0].reject);
  CHECK_FALSE(h[1].reject);
  CHECK_FALSE(h[2].reject);
  for (const auto& d : holm_bonferroni({1, 1, 1})) CHECK_FALSE(d.reject);
  CHECK_THROWS_AS(holm_bonferroni({0.5, 1.2}), EvalError);
  CHECK_THROWS_AS(holm_bonferroni({-0.1}), EvalError);
  CHECK(holm_bonferroni({}).empty());

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(1 + rng.below(10));
    for (auto& x : p) x = rng.uniform() * rng.uniform();
    const auto out = holm_bonferroni(p);
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    bool rejecting = true;
    for (std::size_t j = 0; j < order.size(); ++j) {
      const auto& d = out[order[j]];
      CHECK(d.adjusted >= p[order[j]]);
      CHECK(d.adjusted <= 1.0);
      if (j > 0) CHECK(d.adjusted >= out[order[j - 1]].adjusted);
      rejecting = rejecting && d.adjusted <= 0.05;
      CHECK(d.reject == rejecting);
    }
  }
}

TEST_CASE("cheater filter boundary and idempotence") {
  ResponseSet rs;
  for (int k = 0; k < 6; ++k) add_screen(rs, "lazy6", "u" + std::to_string(k), {100, 100, 100, 100});
  for (int k = 0; k < 5; ++k) add_screen(rs, "lazy5", "u" + std::to_string(k), {100, 0, 100, 0});
  add_screen(rs, "lazy5", "u5", {100, 60, 55, 20});
  for (int k = 0; k < 6; ++k) add_screen(rs, "honest", "u" + std::to_string(k), {95, 70, 64, 20.0 + k});
  rs.validate();
  const auto f = filter_cheaters(rs);
  CHECK(f.excluded == std::vector<std::string>{"lazy6"});
  CHECK(f.flagged_screens.at("lazy6") == 6);
  CHECK(f.flagged_screens.at("lazy5") == 5);
  CHECK(f.flagged_screens.at("honest") == 0);
  CHECK(f.kept.listeners() == std::set<std::string>{"honest", "lazy5"});
  const auto again = filter_cheaters(f.kept);
  CHECK(again.excluded.empty());
  CHECK(again.kept.ratings == f.kept.ratings);
  CHECK_THROWS_AS(filter_cheaters(rs, 0), EvalError);

  // Screens parked on a non-zero slider default count once the default is known.
  ResponseSet parked;
  for (int k = 0; k < 6; ++k) add_screen(parked, "p", "u" + std::to_string(k), {100, 50, 50, 50});
  CHECK(filter_cheaters(parked).excluded.empty());
  CHECK(filter_cheaters(parked, 5, 50.0).excluded == std::vector<std::string>{"p"});
}

TEST_CASE("system means") {
  ResponseSet one;
  one.ratings = {{"l", "u", Aspect::naturalness, "A", 60, Role::candidate},
                 {"l", "u", Aspect::naturalness, "B", 80, Role::candidate}};
  CHECK(system_means(one, Aspect::naturalness) == std::map<std::string, double>{{"A", 60}, {"B", 80}});
  ResponseSet two;
  two.ratings = {{"l", "u1", Aspect::naturalness, "A", 60, Role::candidate},
                 {"l", "u2", Aspect::naturalness, "A", 70, Role::candidate}};
  CHECK(system_means(two, Aspect::naturalness).at("A") == 65.0);
  CHECK_THROWS_AS(system_means(two, Aspect::accent_similarity), EvalError);

  Rng rng(21);
  const std::map<std::string, std::pair<double, Role>> targets{{"upper", {82.6, Role::upper_anchor}},
                                                                {"vc", {69.6, Role::candidate}},
                                                                {"std", {64.08, Role::candidate}},
                                                                {"lower", {42.62, Role::lower_anchor}}};
  const auto sim = simulate(rng, targets, 60, 50, 8.0);
  const auto means = system_means(sim, Aspect::naturalness);
  for (const auto& [id, t] : targets) CHECK(std::abs(means.at(id) - t.first) <= 0.5);
}

TEST_CASE("responses CSV round trip and validation") {
  Rng rng(2);
  auto rs = simulate(rng, {{"ref", {100, Role::upper_anchor}}, {"a", {60, Role::candidate}}, {"z", {30, Role::lower_anchor}}},
                     3, 4, 10.0, Aspect::speaker_similarity);
  rs.ratings.back().score = 37.25;
  std::stringstream ss;
  write_responses_csv(ss, rs);
  CHECK(ss.str().rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  const auto back = read_responses_csv(ss);
  CHECK(back.ratings == rs.ratings);
  for (const auto& r : back.ratings)
    if (r.role == Role::upper_anchor) CHECK(r.score == 100.0);

  auto parse = [](const std::string& body) {
    std::istringstream in(std::string(kCsvHeader) + "\n" + body);
    return read_responses_csv(in);
  };
  CHECK_THROWS_WITH_AS(parse("l,u,naturalness,A,101,candidate\n"), doctest::Contains("outside [0, 100]"), EvalError);
  CHECK_THROWS_WITH_AS(parse("l,u,naturalness,A,50\n"), doctest::Contains("line 2"), EvalError);
  CHECK_THROWS_WITH_AS(parse("l,u,naturalness,A,5x,candidate\n"), doctest::Contains("bad score"), EvalError);
  CHECK_THROWS_WITH_AS(parse("l,u,loudness,A,5,candidate\n"), doctest::Contains("unknown aspect"), EvalError);
  CHECK_THROWS_WITH_AS(parse("l,u,naturalness,A,5,candidate\nl,u2,naturalness,A,5,lower_anchor\n"),
                       doctest::Contains("conflicting roles"), EvalError);
  CHECK_THROWS_WITH_AS(parse("l,u,naturalness,A,5,candidate\nl,u,naturalness,B,5,candidate\n"
                             "l,u2,naturalness,A,5,candidate\n"),
                       doctest::Contains("rates 1 of 2"), EvalError);
  CHECK_THROWS_WITH_AS(parse("l,u,naturalness,A,5,candidate\nl,u,naturalness,A,6,candidate\n"),
                       doctest::Contains("rated twice"), EvalError);
  std::istringstream bad_header("listener,utterance\n");
  CHECK_THROWS_AS(read_responses_csv(bad_header), EvalError);
  CHECK(parse("").ratings.empty());
}

TEST_CASE("analysis report") {
  Rng rng(4);
  const std::map<std::string, std::pair<double, Role>> systems{{"upper", {82.6, Role::upper_anchor}},
                                                                {"vc", {69.6, Role::candidate}},
                                                                {"std", {64.08, Role::candidate}},
                                                                {"lower", {42.62, Role::lower_anchor}}};
  auto rs = simulate(rng, systems, 20, 30, 6.0);
  for (int k = 0; k < 6; ++k) add_screen(rs, "bot", "u" + std::to_string(k), {100, 100, 100, 100});
  for (int k = 6; k < 30; ++k) add_screen(rs, "bot", "u" + std::to_string(k), {90, 50, 50, 40});

  AnalysisOptions opt;
  opt.baseline = "std";
  opt.proposed = "vc";
  const auto rep = analyze(rs, opt);
  CHECK(rep.excluded_listeners == std::vector<std::string>{"bot"});
  CHECK(rep.kept_listeners == 20);
  REQUIRE(rep.aspects.size() == 1);
  const auto& a = rep.aspects[0];
  CHECK(a.screens == 600);
  CHECK(a.comparisons.size() == 6);
  REQUIRE(a.ctg.size() == 1);
  const auto& row = a.ctg[0];
  CHECK(row.input.s == a.means.at("std"));
  CHECK(row.input.v == a.means.at("vc"));
  CHECK(row.ctg == doctest::Approx(testing::ctg_direct(row.input.s, row.input.v, row.input.u)));
  CHECK(row.significant);
  CHECK(std::abs(row.ctg - 29.8) < 5.0);
  for (const auto& c : a.comparisons) CHECK(c.holm.reject);

  const auto j = rep.to_json();
  CHECK(j["aspects"][0]["ctg"][0]["ctg"].get<double>() == row.ctg);
  CHECK(j["ctg_convention"].get<std::string>().find("(n_s - n_v) / n_s") != std::string::npos);
  const auto text = rep.to_text();
  CHECK(text.find("positive means the proposed") != std::string::npos);
  CHECK(text.find("CTG naturalness vc vs std") != std::string::npos);

  // Without a declared direction both orders are reported.
  CHECK(analyze(rs).aspects[0].ctg.size() == 2);
  AnalysisOptions half;
  half.baseline = "std";
  CHECK_THROWS_AS(analyze(rs, half), EvalError);
}

TEST_CASE("objective report") {
  const auto& m = testing::tiny_corpus();
  const auto self = objective_report(m, m);
  CHECK(self.utterances.size() == m.utterances.size());
  for (const auto& u : self.utterances) {
    const double own = u.speaker_cosine.at(u.speaker_id);
    for (const auto& [id, c] : u.speaker_cosine) CHECK(own >= c);
    CHECK(u.nearest_speaker == u.speaker_id);
  }
  CHECK(self.own_speaker_rate == 1.0);
  CHECK(self.to_json()["utterances"].size() == m.utterances.size());
  corpus::CorpusManifest empty = m;
  empty.utterances.clear();
  CHECK_THROWS_AS(objective_report(m, empty), EvalError);
  CHECK_THROWS_AS(objective_report(empty, m), EvalError);
}
