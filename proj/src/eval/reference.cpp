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

#include <cmath>
#include <cstdio>
#include <sstream>

#include "polyglot/eval/reference.hpp"

namespace polyglot::eval {

namespace {

constexpr Aspect N = Aspect::naturalness;
constexpr Aspect S = Aspect::speaker_similarity;
constexpr Aspect A = Aspect::accent_similarity;

// {s, v, l, u}: standard, VC-based, lower anchor, upper anchor.
const std::vector<ReferenceCtg> kCtg = {
    {"D1/S1/es-MX/FS2", N, {64.08, 69.60, 42.62, 82.60}, 29.8},
    {"D1/S1/es-MX/FS2", S, {64.82, 66.38, 22.37, 100.00}, 4.4},
    {"D1/S1/es-MX/FS2", A, {66.26, 71.06, 20.70, 82.25}, 30.0},
    {"D1/S1/es-MX/ED", N, {65.24, 70.21, 42.62, 82.60}, 28.6},
    {"D1/S1/es-MX/ED", S, {68.05, 67.86, 22.37, 100.00}, -0.6},
    {"D1/S1/es-MX/ED", A, {66.27, 70.49, 20.70, 82.25}, 26.4},
    {"D1/S2/es-MX", N, {69.86, 70.34, 34.47, 80.24}, 4.5},
    {"D1/S2/es-MX", S, {68.69, 67.60, 28.37, 100.00}, -3.5},
    {"D1/S2/es-MX", A, {70.54, 71.85, 19.64, 82.48}, 10.9},
    {"D1/S1/fr-CA", N, {73.67, 74.11, 54.89, 75.76}, 24.6},
    {"D1/S1/fr-CA", S, {67.00, 70.69, 50.11, 100.00}, 11.2},
    {"D1/S1/fr-CA", A, {67.60, 70.99, 63.71, 76.52}, 38.0},
    {"D2/S1/fr-CA", N, {66.66, 71.07, 61.55, 78.64}, 36.8},
    {"D2/S1/fr-CA", S, {68.57, 72.43, 44.80, 100.00}, 12.3},
    {"D2/S1/fr-CA", A, {73.97, 75.84, 44.30, 80.27}, 29.9},
};

// {small, big}
const std::vector<ReferenceDctg> kDctg = {
    {"es-MX LS vs FS2", N, 42.27, 32.87, 9.40},     {"es-MX LS vs FS2", S, -1.91, -2.71, 0.80},
    {"es-MX LS vs FS2", A, 41.24, 25.42, 15.82},    {"fr-CA LS vs FS2", N, 28.23, 28.89, -0.66},
    {"fr-CA LS vs FS2", S, 4.98, 4.37, 0.61},       {"fr-CA LS vs FS2", A, 45.19, 16.42, 28.77},
    {"es-MX LS-S vs FS2", N, 38.33, 27.55, 10.78},  {"es-MX LS-S vs FS2", S, -0.23, -0.98, 0.75},
    {"es-MX LS-S vs FS2", A, 35.08, 30.90, 4.18},   {"fr-CA LS-S vs FS2", N, 39.49, 30.49, 9.00},
    {"fr-CA LS-S vs FS2", S, -0.64, -0.44, -0.20},  {"fr-CA LS-S vs FS2", A, 35.54, 25.97, 9.57},
};

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

const std::vector<ReferenceCtg>& reference_ctg() { return kCtg; }
const std::vector<ReferenceDctg>& reference_dctg() { return kDctg; }

std::vector<ReferenceCheck> check_reference_ctg(double tolerance) {
  std::vector<ReferenceCheck> out;
  for (const auto& r : kCtg) {
    const double got = ctg(r.means);
    out.push_back({r.label, r.aspect, got, r.printed, std::abs(got - r.printed) > tolerance});
  }
  return out;
}

std::vector<ReferenceCheck> check_reference_dctg(double tolerance) {
  std::vector<ReferenceCheck> out;
  for (const auto& r : kDctg) {
    const double got = dctg(r.ctg_small, r.ctg_big);
    out.push_back({r.label, r.aspect, got, r.printed, std::abs(got - r.printed) > tolerance});
  }
  return out;
}

std::string reference_text(const std::vector<ReferenceCheck>& c, const std::vector<ReferenceCheck>& d) {
  std::ostringstream os;
  auto table = [&](const char* title, const std::vector<ReferenceCheck>& rows, int digits) {
    os << title << '\n';
    for (const auto& r : rows) {
      os << "  " << r.label << "  " << to_string(r.aspect) << "  recomputed " << fixed(r.recomputed, digits)
         << "  printed " << fixed(r.printed, digits);
      if (r.diverges) os << "  DIVERGES (" << fixed(r.recomputed - r.printed, digits) << ")";
      os << '\n';
    }
  };
  table("CTG % from published means (positive = gap closed):", c, 2);
  table("DCTG p.p. from published CTG columns:", d, 2);
  return os.str();
}

nlohmann::json reference_json(const std::vector<ReferenceCheck>& checks) {
  auto arr = nlohmann::json::array();
  for (const auto& r : checks)
    arr.push_back({{"label", r.label},
                   {"aspect", to_string(r.aspect)},
                   {"recomputed", r.recomputed},
                   {"printed", r.printed},
                   {"diverges", r.diverges}});
  return arr;
}

}  // namespace polyglot::eval
