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
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "polyglot/mushra/service.hpp"
#include "polyglot/numerics/rng.hpp"
#include "store.hpp"

namespace polyglot::mushra {

namespace fs = std::filesystem;

namespace {

ServiceError bad(const std::string& field, const std::string& why) { return ServiceError(400, field + ": " + why); }

bool csv_safe(const std::string& s) { return !s.empty() && s.find_first_of(",\n\r\"") == std::string::npos; }

std::string label_for(std::size_t k) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('A' + k % 26));
    k /= 26;
  } while (k-- > 0);
  return s;
}

template <class T>
T field(const nlohmann::json& j, const char* name, T fallback) {
  if (!j.contains(name)) return fallback;
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw bad(name, "wrong type");
  }
}

}  // namespace

nlohmann::json TestDefinition::to_json() const {
  nlohmann::json sys = nlohmann::json::array();
  for (const auto& s : systems) sys.push_back({{"id", s.id}, {"role", eval::to_string(s.role)}});
  nlohmann::json stim = nlohmann::json::array();
  for (const auto& [u, by_sys] : stimuli)
    for (const auto& [s, p] : by_sys) stim.push_back({{"utterance", u}, {"system", s}, {"path", p.string()}});
  return {{"test_id", test_id},   {"aspect", eval::to_string(aspect)}, {"systems", sys},
          {"utterances", utterances}, {"stimuli", stim},             {"sample_size", sample_size},
          {"quota", quota},       {"reference", reference},          {"seed", seed}};
}

TestDefinition TestDefinition::from_json(const nlohmann::json& j, const fs::path& audio_root) {
  if (!j.is_object()) throw bad("body", "expected a JSON object");
  TestDefinition d;
  try {
    d.aspect = eval::parse_aspect(field<std::string>(j, "aspect", ""));
  } catch (const eval::EvalError& e) {
    throw bad("aspect", e.what());
  }
  if (!j.contains("systems") || !j["systems"].is_array() || j["systems"].empty())
    throw bad("systems", "a non-empty array is required");
  std::set<std::string> ids;
  std::map<eval::Role, std::size_t> roles;
  for (const auto& s : j["systems"]) {
    SystemDef sd;
    sd.id = field<std::string>(s, "id", "");
    if (!csv_safe(sd.id)) throw bad("systems", "system id '" + sd.id + "' is empty or not CSV-safe");
    if (!ids.insert(sd.id).second) throw bad("systems", "duplicate system id " + sd.id);
    try {
      sd.role = eval::parse_role(field<std::string>(s, "role", ""));
    } catch (const eval::EvalError& e) {
      throw bad("systems", e.what());
    }
    ++roles[sd.role];
    d.systems.push_back(sd);
  }
  if (roles[eval::Role::upper_anchor] != 1) throw bad("systems", "exactly one upper_anchor is required");
  if (roles[eval::Role::lower_anchor] > 1) throw bad("systems", "at most one lower_anchor is allowed");
  if (roles[eval::Role::candidate] < 1) throw bad("systems", "at least one candidate is required");

  d.utterances = field<std::vector<std::string>>(j, "utterances", {});
  if (d.utterances.empty()) throw bad("utterances", "a non-empty pool is required");
  std::set<std::string> pool;
  for (const auto& u : d.utterances) {
    if (!csv_safe(u)) throw bad("utterances", "utterance id '" + u + "' is empty or not CSV-safe");
    if (!pool.insert(u).second) throw bad("utterances", "duplicate utterance " + u);
  }
  d.sample_size = field<std::size_t>(j, "sample_size", kDefaultSample);
  d.quota = field<std::size_t>(j, "quota", kDefaultQuota);
  if (d.sample_size == 0) throw bad("sample_size", "must be positive");
  if (d.sample_size > d.utterances.size())
    throw bad("sample_size", std::to_string(d.sample_size) + " exceeds the pool of " +
                                 std::to_string(d.utterances.size()));
  if (d.quota == 0) throw bad("quota", "must be positive");
  d.reference = field<bool>(j, "reference", d.aspect == eval::Aspect::speaker_similarity);
  d.seed = field<std::uint64_t>(j, "seed", 0);

  if (!j.contains("stimuli") || !j["stimuli"].is_array()) throw bad("stimuli", "an array is required");
  for (const auto& s : j["stimuli"]) {
    const auto u = field<std::string>(s, "utterance", "");
    const auto sys = field<std::string>(s, "system", "");
    fs::path p = field<std::string>(s, "path", "");
    if (!pool.count(u)) throw bad("stimuli", "utterance '" + u + "' is not in the pool");
    if (!ids.count(sys)) throw bad("stimuli", "system '" + sys + "' is not defined");
    if (p.is_relative()) p = audio_root / p;
    if (!fs::is_regular_file(p)) throw bad("stimuli", "audio file " + p.string() + " does not exist");
    if (!d.stimuli[u].emplace(sys, fs::absolute(p)).second)
      throw bad("stimuli", "two stimuli for " + u + "/" + sys);
  }
  for (const auto& u : d.utterances)
    for (const auto& s : d.systems)
      if (!d.stimuli[u].count(s.id)) throw bad("stimuli", "no stimulus for " + u + "/" + s.id);
  return d;
}

const SystemDef& TestDefinition::system(const std::string& id) const {
  for (const auto& s : systems)
    if (s.id == id) return s;
  throw ServiceError(500, "unknown system " + id);
}

Assignment make_assignment(const TestDefinition& def, const std::string& listener) {
  auto rng = numerics::Rng(def.seed).split(listener);
  std::vector<std::string> pool = def.utterances;
  rng.shuffle(pool);
  pool.resize(def.sample_size);
  Assignment a{listener, {}};
  for (const auto& u : pool) {
    std::vector<std::size_t> order(def.systems.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Screen s{u, {}, {}};
    for (std::size_t k = 0; k < order.size(); ++k) {
      s.labels.push_back(label_for(k));
      s.systems.push_back(def.systems[order[k]].id);
    }
    a.screens.push_back(std::move(s));
  }
  return a;
}

struct Service::TestState {
  TestDefinition def;
  fs::path dir;
  std::unique_ptr<EventLog> log;
  std::vector<std::string> listeners;  // registration order
  std::map<std::string, Assignment> assignments;
  // (listener, utterance) -> system -> score
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> responses;
  std::map<std::string, fs::path> audio;  // token -> file
};

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.data_dir.empty()) throw ServiceError(500, "data directory is required");
  fs::create_directories(options_.data_dir / "tests");
  for (const auto& e : fs::directory_iterator(options_.data_dir / "tests")) {
    if (!e.is_directory() || !fs::exists(e.path() / "definition.json")) continue;
    auto t = std::make_unique<TestState>();
    t->dir = e.path();
    std::ifstream in(e.path() / "definition.json");
    const auto j = nlohmann::json::parse(in);
    t->def = TestDefinition::from_json(j, options_.data_dir);
    t->def.test_id = j.at("test_id").get<std::string>();
    replay(*t);
    tests_[t->def.test_id] = std::move(t);
  }
}

Service::~Service() = default;

Service::TestState& Service::state(const std::string& id) {
  const auto it = tests_.find(id);
  if (it == tests_.end()) throw ServiceError(404, "unknown test " + id);
  return *it->second;
}

const Service::TestState& Service::state(const std::string& id) const {
  const auto it = tests_.find(id);
  if (it == tests_.end()) throw ServiceError(404, "unknown test " + id);
  return *it->second;
}

std::string Service::token(const TestState& t, const std::string& listener, const std::string& utterance,
                           const std::string& label) const {
  return digest_hex(t.def.test_id + '\n' + std::to_string(t.def.seed) + '\n' + listener + '\n' + utterance + '\n' +
                    label)
      .substr(0, 32);
}

std::string Service::create_test(const nlohmann::json& body) {
  std::lock_guard lock(mu_);
  auto def = TestDefinition::from_json(body, options_.data_dir);
  const auto content = def.to_json().dump();
  if (!body.contains("seed")) def.seed = std::stoull(digest_hex(content).substr(0, 15), nullptr, 16);
  std::string id;
  for (std::size_t n = tests_.size();; ++n) {
    id = "t" + digest_hex(content + '#' + std::to_string(n)).substr(0, 12);
    if (!tests_.count(id) && !fs::exists(options_.data_dir / "tests" / id)) break;
  }
  def.test_id = id;
  auto t = std::make_unique<TestState>();
  t->def = std::move(def);
  t->dir = options_.data_dir / "tests" / id;
  fs::create_directories(t->dir);
  write_file_durably(t->dir / "definition.json", t->def.to_json().dump(2) + "\n");
  t->log = std::make_unique<EventLog>(t->dir / "events.jsonl");
  tests_[id] = std::move(t);
  return id;
}

nlohmann::json Service::assignment(const std::string& test_id, const std::string& listener) {
  std::lock_guard lock(mu_);
  if (!csv_safe(listener)) throw ServiceError(400, "listener: a CSV-safe listener token is required");
  auto& t = state(test_id);
  if (!t.assignments.count(listener)) {
    if (t.listeners.size() >= t.def.quota)
      throw ServiceError(409, "listener quota of " + std::to_string(t.def.quota) + " is exhausted");
    append(t, {{"type", "assign"}, {"listener", listener}});
  }
  const auto& a = t.assignments.at(listener);
  nlohmann::json screens = nlohmann::json::array();
  nlohmann::json submitted = nlohmann::json::array();
  std::size_t next = a.screens.size();
  for (std::size_t i = 0; i < a.screens.size(); ++i) {
    const auto& s = a.screens[i];
    nlohmann::json stimuli = nlohmann::json::array();
    for (const auto& label : s.labels)
      stimuli.push_back({{"label", label}, {"url", "/tests/" + test_id + "/audio/" + token(t, listener, s.utterance, label)}});
    nlohmann::json screen{{"index", i}, {"utterance", s.utterance}, {"stimuli", stimuli}};
    screen["reference"] = t.def.reference ? nlohmann::json("/tests/" + test_id + "/audio/" +
                                                           token(t, listener, s.utterance, "reference"))
                                          : nlohmann::json(nullptr);
    const bool done = t.responses.count({listener, s.utterance}) > 0;
    if (done) submitted.push_back(i);
    if (!done && next == a.screens.size()) next = i;
    screens.push_back(std::move(screen));
  }
  return {{"test_id", test_id},       {"listener", listener},   {"aspect", eval::to_string(t.def.aspect)},
          {"screens", screens},       {"submitted", submitted}, {"next_screen", next},
          {"total", a.screens.size()}};
}

void Service::submit(const std::string& test_id, const nlohmann::json& body) {
  std::lock_guard lock(mu_);
  auto& t = state(test_id);
  if (!body.is_object()) throw ServiceError(400, "body: expected a JSON object");
  const auto listener = field<std::string>(body, "listener", "");
  const auto utterance = field<std::string>(body, "utterance", "");
  const auto it = t.assignments.find(listener);
  if (it == t.assignments.end()) throw ServiceError(400, "listener: " + listener + " has no assignment");
  const auto sit = std::find_if(it->second.screens.begin(), it->second.screens.end(),
                                [&](const Screen& s) { return s.utterance == utterance; });
  if (sit == it->second.screens.end())
    throw ServiceError(400, "utterance: " + utterance + " is not in this listener's assignment");
  if (t.responses.count({listener, utterance}))
    throw ServiceError(409, "screen " + utterance + " was already submitted by " + listener);
  if (!body.contains("scores") || !body["scores"].is_object()) throw ServiceError(400, "scores: an object is required");
  const auto& scores = body["scores"];
  nlohmann::json by_system = nlohmann::json::object();
  for (std::size_t k = 0; k < sit->labels.size(); ++k) {
    const auto& label = sit->labels[k];
    if (!scores.contains(label)) throw ServiceError(400, "scores: label " + label + " is missing");
    if (!scores[label].is_number()) throw ServiceError(400, "scores: label " + label + " is not a number");
    const double v = scores[label].get<double>();
    if (!(v >= 0.0 && v <= 100.0)) throw ServiceError(400, "scores: label " + label + " is outside [0, 100]");
    by_system[sit->systems[k]] = v;
  }
  if (scores.size() != sit->labels.size()) throw ServiceError(400, "scores: unknown labels present");
  append(t, {{"type", "response"}, {"listener", listener}, {"utterance", utterance}, {"scores", by_system}});
}

std::string Service::export_csv(const std::string& test_id) const {
  std::lock_guard lock(mu_);
  const auto& t = state(test_id);
  eval::ResponseSet rs;
  for (const auto& l : t.listeners) {
    for (const auto& screen : t.assignments.at(l).screens) {
      const auto r = t.responses.find({l, screen.utterance});
      if (r == t.responses.end()) continue;
      for (const auto& s : t.def.systems)
        rs.ratings.push_back({l, screen.utterance, t.def.aspect, s.id, r->second.at(s.id), s.role});
    }
  }
  std::ostringstream os;
  eval::write_responses_csv(os, rs);
  return os.str();
}

nlohmann::json Service::summary(const std::string& test_id) const {
  std::lock_guard lock(mu_);
  const auto& t = state(test_id);
  return {{"test_id", test_id},
          {"aspect", eval::to_string(t.def.aspect)},
          {"pool", t.def.utterances.size()},
          {"sample_size", t.def.sample_size},
          {"quota", t.def.quota},
          {"listeners", t.listeners.size()},
          {"responses", t.responses.size()}};
}

fs::path Service::audio(const std::string& test_id, const std::string& tok) const {
  std::lock_guard lock(mu_);
  const auto& t = state(test_id);
  const auto it = t.audio.find(tok);
  if (it == t.audio.end()) throw ServiceError(404, "unknown audio token");
  return it->second;
}

void Service::replay(TestState& t) {
  const auto path = t.dir / "events.jsonl";
  seal_log(path);
  for (const auto& e : read_events(path)) {
    const auto type = e.at("type").get<std::string>();
    const auto listener = e.at("listener").get<std::string>();
    if (type == "assign") {
      apply_assign(t, listener);
    } else if (type == "response") {
      t.responses[{listener, e.at("utterance").get<std::string>()}] =
          e.at("scores").get<std::map<std::string, double>>();
    }
  }
  t.log = std::make_unique<EventLog>(path);
}

void Service::append(TestState& t, const nlohmann::json& event) {
  t.log->append(event.dump());
  if (event["type"] == "assign") {
    apply_assign(t, event["listener"].get<std::string>());
  } else {
    t.responses[{event["listener"].get<std::string>(), event["utterance"].get<std::string>()}] =
        event["scores"].get<std::map<std::string, double>>();
  }
}

void Service::apply_assign(TestState& t, const std::string& listener) {
  auto a = make_assignment(t.def, listener);
  for (const auto& s : a.screens) {
    for (std::size_t k = 0; k < s.labels.size(); ++k)
      t.audio[token(t, listener, s.utterance, s.labels[k])] = t.def.stimuli.at(s.utterance).at(s.systems[k]);
    if (t.def.reference) {
      const auto& upper = std::find_if(t.def.systems.begin(), t.def.systems.end(), [](const SystemDef& d) {
        return d.role == eval::Role::upper_anchor;
      })->id;
      t.audio[token(t, listener, s.utterance, "reference")] = t.def.stimuli.at(s.utterance).at(upper);
    }
  }
  t.listeners.push_back(listener);
  t.assignments.emplace(listener, std::move(a));
}

}  // namespace polyglot::mushra
