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

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "polyglot/eval/mushra.hpp"

namespace polyglot::eval {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out(1);
  for (char ch : line) {
    if (ch == ',')
      out.emplace_back();
    else
      out.back() += ch;
  }
  return out;
}

double parse_score(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw EvalError("bad score '" + s + "'");
  return v;
}

}  // namespace

ResponseSet read_responses_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EvalError("responses CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw EvalError("responses CSV header must be '" + std::string(kCsvHeader) + "'");
  ResponseSet rs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    try {
      if (f.size() != 6) throw EvalError("expected 6 fields, got " + std::to_string(f.size()));
      rs.ratings.push_back({f[0], f[1], parse_aspect(f[2]), f[3], parse_score(f[4]), parse_role(f[5])});
    } catch (const EvalError& e) {
      throw EvalError("responses CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  rs.validate();
  return rs;
}

ResponseSet read_responses_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open " + path.string());
  return read_responses_csv(in);
}

void write_responses_csv(std::ostream& out, const ResponseSet& rs) {
  out << kCsvHeader << '\n';
  for (const auto& r : rs.ratings) {
    for (const auto* id : {&r.listener_id, &r.utterance_id, &r.system_id})
      if (id->find_first_of(",\n\r") != std::string::npos) throw EvalError("identifier '" + *id + "' is not CSV-safe");
    std::ostringstream score;
    score << std::setprecision(17) << r.score;
    out << r.listener_id << ',' << r.utterance_id << ',' << to_string(r.aspect) << ',' << r.system_id << ','
        << score.str() << ',' << to_string(r.role) << '\n';
  }
}

}  // namespace polyglot::eval
