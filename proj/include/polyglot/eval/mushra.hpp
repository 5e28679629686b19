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

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polyglot::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Aspect { naturalness, speaker_similarity, accent_similarity };
enum class Role { upper_anchor, lower_anchor, candidate };

std::string to_string(Aspect a);
std::string to_string(Role r);
Aspect parse_aspect(std::string_view text);
Role parse_role(std::string_view text);

/// One slider value: a listener's score for one system on one screen.
struct Rating {
  std::string listener_id;
  std::string utterance_id;
  Aspect aspect = Aspect::naturalness;
  std::string system_id;
  double score = 0.0;
  Role role = Role::candidate;

  bool operator==(const Rating&) const = default;
};

/// A screen is everything one listener rated for one utterance in one aspect.
struct ScreenKey {
  std::string listener_id;
  std::string utterance_id;
  Aspect aspect;
  auto operator<=>(const ScreenKey&) const = default;
};

struct ResponseSet {
  std::vector<Rating> ratings;

  /// Scores in [0,100]; one role per (aspect, system); no system rated twice on
  /// a screen; every screen of an aspect covers that aspect's full system set.
  void validate() const;
  std::map<ScreenKey, std::vector<const Rating*>> screens() const;
  std::vector<Aspect> aspects() const;
  /// Systems rated in `aspect`, with their roles, ordered by id.
  std::map<std::string, Role> systems(Aspect aspect) const;
  std::set<std::string> listeners() const;
};

inline constexpr std::string_view kCsvHeader = "listener_id,utterance_id,aspect,system_id,score,role";

/// Parses the exchange CSV; the result is validated. Errors name the line.
ResponseSet read_responses_csv(std::istream& in);
ResponseSet read_responses_csv(const std::filesystem::path& path);
void write_responses_csv(std::ostream& out, const ResponseSet& responses);

struct CheaterFilter {
  ResponseSet kept;
  std::vector<std::string> excluded;  // sorted listener ids
  std::map<std::string, std::size_t> flagged_screens;
};

/// A screen is flagged when every score on it is 0, 100 or the slider default.
/// Listeners with more than `threshold` flagged screens are dropped entirely.
CheaterFilter filter_cheaters(const ResponseSet& responses, std::size_t threshold = 5, double slider_default = 0.0);

/// Mean score per system over every rating of the aspect.
std::map<std::string, double> system_means(const ResponseSet& responses, Aspect aspect);

/// Mean MUSHRA points of baseline (s), proposed (v), lower (l) and upper (u).
struct CtgInput {
  double s = 0.0;
  double v = 0.0;
  double l = 0.0;
  double u = 0.0;
};

/// Remaining gap to the upper anchor, in percent of the anchor span.
double remaining_gap(double score, double l, double u);

/// Percent of the baseline's remaining gap closed by the proposed system:
/// (n_s - n_v) / n_s * 100, positive when the proposed system is closer to
/// the upper anchor.
double ctg(const CtgInput& in);

/// True when s or v lies outside [l, u].
bool outside_anchors(const CtgInput& in);

/// Percentage-point difference between a small model's CTG and a big one's.
double dctg(double ctg_small, double ctg_big);

}  // namespace polyglot::eval
