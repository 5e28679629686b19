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

#include <doctest.h>

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "polyglot/eval/report.hpp"
#include "polyglot/mushra/service.hpp"
#include "scratch.hpp"

using namespace polyglot;
using namespace polyglot::mushra;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<std::string, std::string>> kSystems{
    {"ref_orig", "upper_anchor"}, {"low_pass", "lower_anchor"}, {"tts_vc", "candidate"}, {"tts_plain", "candidate"}};

// One distinct file per system so the audio route can be checked end to end.
fs::path write_audio(const fs::path& root) {
  fs::create_directories(root / "audio");
  for (const auto& [id, role] : kSystems) std::ofstream(root / "audio" / (id + ".wav")) << "RIFF:" << id;
  return root;
}

json definition(std::size_t pool, std::size_t sample, const std::string& aspect = "naturalness") {
  json systems = json::array();
  for (const auto& [id, role] : kSystems) systems.push_back({{"id", id}, {"role", role}});
  json utts = json::array(), stim = json::array();
  for (std::size_t i = 0; i < pool; ++i) {
    const auto u = "utt" + std::to_string(i);
    utts.push_back(u);
    for (const auto& [id, role] : kSystems) stim.push_back({{"utterance", u}, {"system", id}, {"path", "audio/" + id + ".wav"}});
  }
  return {{"aspect", aspect}, {"systems", systems}, {"utterances", utts}, {"stimuli", stim}, {"sample_size", sample}};
}

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

json scores_for(const json& screen, double base) {
  json s = json::object();
  double v = base;
  for (const auto& st : screen.at("stimuli")) s[st.at("label").get<std::string>()] = v++;
  return s;
}

// A plausible listener: anchors at the ends, candidates in between.
json scores_by_system(const Service& svc, const std::string& id, const json& screen, double shift) {
  static const std::map<std::string, double> level{{"ref_orig", 90}, {"low_pass", 5}, {"tts_vc", 60}, {"tts_plain", 40}};
  json s = json::object();
  for (const auto& st : screen.at("stimuli")) {
    const auto url = st.at("url").get<std::string>();
    s[st.at("label").get<std::string>()] = level.at(svc.audio(id, url.substr(url.rfind('/') + 1)).stem().string()) + shift;
  }
  return s;
}

void submit_all(Service& svc, const std::string& id, const std::string& listener, std::size_t screens, double shift) {
  const auto a = svc.assignment(id, listener);
  for (std::size_t i = 0; i < screens; ++i) {
    const auto& screen = a.at("screens").at(i);
    svc.submit(id, {{"listener", listener},
                    {"utterance", screen.at("utterance")},
                    {"scores", scores_by_system(svc, id, screen, shift + static_cast<double>(i))}});
  }
}

}  // namespace

TEST_CASE("test creation validates the definition") {
  const auto dir = write_audio(testing::scratch_dir("create"));
  Service svc({dir, {}});
  const auto id = svc.create_test(definition(200, 50));
  CHECK(svc.summary(id).at("pool") == 200);
  CHECK(svc.summary(id).at("sample_size") == 50);
  CHECK(svc.summary(id).at("quota") == kDefaultQuota);

  CHECK(status_of([&] { svc.create_test(definition(40, 50)); }) == 400);
  auto two_upper = definition(10, 5);
  two_upper["systems"][1]["role"] = "upper_anchor";
  CHECK(status_of([&] { svc.create_test(two_upper); }) == 400);
  auto no_candidate = definition(10, 5);
  no_candidate["systems"][2]["role"] = "lower_anchor";
  no_candidate["systems"][3]["role"] = "upper_anchor";
  CHECK(status_of([&] { svc.create_test(no_candidate); }) == 400);
  auto missing = definition(10, 5);
  missing["stimuli"][3]["path"] = "audio/nowhere.wav";
  CHECK(status_of([&] { svc.create_test(missing); }) == 400);
  auto gap = definition(10, 5);
  gap["stimuli"].erase(gap["stimuli"].size() - 1);
  CHECK(status_of([&] { svc.create_test(gap); }) == 400);
  auto unsafe = definition(10, 5);
  unsafe["systems"][2]["id"] = "a,b";
  CHECK(status_of([&] { svc.create_test(unsafe); }) == 400);
  CHECK(status_of([&] { svc.create_test(definition(10, 5, "loudness")); }) == 400);
  CHECK(status_of([&] { svc.create_test(json::array()); }) == 400);
  CHECK(status_of([&] { svc.summary("nope"); }) == 404);
}

TEST_CASE("assignments are deterministic per listener, sampled without replacement, and quota-bound") {
  const auto dir = write_audio(testing::scratch_dir("assign"));
  Service svc({dir, {}});
  auto def = definition(200, 50);
  def["quota"] = 60;
  const auto id = svc.create_test(def);

  const auto a1 = svc.assignment(id, "alice");
  CHECK(svc.assignment(id, "alice") == a1);
  const auto b = svc.assignment(id, "bob");
  CHECK(a1.at("screens") != b.at("screens"));
  CHECK(a1.at("total") == 50);
  std::set<std::string> seen;
  for (const auto& s : a1.at("screens")) {
    seen.insert(s.at("utterance").get<std::string>());
    CHECK(s.at("stimuli").size() == kSystems.size());
    CHECK(s.at("reference").is_null());
  }
  CHECK(seen.size() == 50);

  // Pure function of (definition, seed, listener).
  const auto parsed = TestDefinition::from_json(def, dir);
  const auto direct = make_assignment(parsed, "alice");
  CHECK(direct.screens.size() == 50);
  CHECK(make_assignment(parsed, "alice").screens.front().systems == direct.screens.front().systems);

  for (int i = 2; i < 60; ++i) svc.assignment(id, "l" + std::to_string(i));
  CHECK(svc.summary(id).at("listeners") == 60);
  CHECK(status_of([&] { svc.assignment(id, "late"); }) == 409);
  CHECK(status_of([&] { svc.assignment(id, "alice"); }) == 0);
  CHECK(status_of([&] { svc.assignment("t000", "alice"); }) == 404);
  CHECK(status_of([&] { svc.assignment(id, ""); }) == 400);
}

TEST_CASE("listener payloads never name a system") {
  const auto dir = write_audio(testing::scratch_dir("blind"));
  Service svc({dir, {}});
  const auto id = svc.create_test(definition(30, 10, "speaker_similarity"));
  for (const std::string l : {"p1", "p2", "p3"}) {
    const auto text = svc.assignment(id, l).dump();
    for (const auto& [sys, role] : kSystems) CHECK(text.find(sys) == std::string::npos);
    for (const std::string word : {"anchor", "candidate", ".wav"}) CHECK(text.find(word) == std::string::npos);
  }
  // Similarity screens carry a labelled reference that plays the upper anchor.
  const auto a = svc.assignment(id, "p1");
  const auto ref = a.at("screens").at(0).at("reference").get<std::string>();
  const auto token = ref.substr(ref.rfind('/') + 1);
  CHECK(svc.audio(id, token).filename() == "ref_orig.wav");
  CHECK(status_of([&] { svc.audio(id, "00000000000000000000000000000000"); }) == 404);
}

TEST_CASE("responses: validation, duplicates and export") {
  const auto dir = write_audio(testing::scratch_dir("respond"));
  Service svc({dir, {}});
  const auto id = svc.create_test(definition(20, 3));
  CHECK(svc.export_csv(id) == std::string(eval::kCsvHeader) + "\n");

  const auto a = svc.assignment(id, "alice");
  const auto& screen = a.at("screens").at(0);
  const auto utt = screen.at("utterance");
  auto scores = scores_for(screen, 10);

  CHECK(status_of([&] { svc.submit(id, {{"listener", "bob"}, {"utterance", utt}, {"scores", scores}}); }) == 400);
  auto high = scores;
  high["A"] = 101;
  CHECK(status_of([&] { svc.submit(id, {{"listener", "alice"}, {"utterance", utt}, {"scores", high}}); }) == 400);
  auto partial = scores;
  partial.erase("B");
  CHECK(status_of([&] { svc.submit(id, {{"listener", "alice"}, {"utterance", utt}, {"scores", partial}}); }) == 400);
  auto extra = scores;
  extra["Z"] = 5;
  CHECK(status_of([&] { svc.submit(id, {{"listener", "alice"}, {"utterance", utt}, {"scores", extra}}); }) == 400);
  auto text = scores;
  text["A"] = "high";
  CHECK(status_of([&] { svc.submit(id, {{"listener", "alice"}, {"utterance", utt}, {"scores", text}}); }) == 400);
  CHECK(status_of([&] { svc.submit(id, {{"listener", "alice"}, {"utterance", "utt19x"}, {"scores", scores}}); }) == 400);

  CHECK(status_of([&] { svc.submit(id, {{"listener", "alice"}, {"utterance", utt}, {"scores", scores}}); }) == 0);
  CHECK(status_of([&] { svc.submit(id, {{"listener", "alice"}, {"utterance", utt}, {"scores", scores}}); }) == 409);
  const auto after = svc.assignment(id, "alice");
  CHECK(after.at("submitted") == json::array({0}));
  CHECK(after.at("next_screen") == 1);

  // Scores land on the system behind each label.
  std::istringstream csv(svc.export_csv(id));
  const auto rs = eval::read_responses_csv(csv);
  REQUIRE(rs.ratings.size() == kSystems.size());
  for (const auto& st : screen.at("stimuli")) {
    const auto tok = st.at("url").get<std::string>().substr(st.at("url").get<std::string>().rfind('/') + 1);
    const auto sys = svc.audio(id, tok).stem().string();
    const double want = scores.at(st.at("label").get<std::string>()).get<double>();
    bool found = false;
    for (const auto& r : rs.ratings) found = found || (r.system_id == sys && r.score == want && r.utterance_id == utt);
    CHECK(found);
  }
}

TEST_CASE("export is the analysis input, row for row") {
  const auto dir = write_audio(testing::scratch_dir("export"));
  Service svc({dir, {}});
  const auto id = svc.create_test(definition(20, 3));
  submit_all(svc, id, "alice", 3, 1);
  submit_all(svc, id, "bob", 3, 3);
  const auto text = svc.export_csv(id);
  std::istringstream in(text);
  const auto rs = eval::read_responses_csv(in);
  CHECK(rs.ratings.size() == 2 * 3 * 4);
  CHECK(rs.listeners() == std::set<std::string>{"alice", "bob"});
  const auto report = eval::analyze(rs);
  REQUIRE(report.aspects.size() == 1);
  CHECK(report.aspects[0].listeners == 2);
  CHECK(report.aspects[0].screens == 6);
  CHECK(report.aspects[0].means.size() == 4);
  CHECK(report.aspects[0].means.at("tts_vc") == doctest::Approx(63.0));
  CHECK(report.aspects[0].means.at("low_pass") == doctest::Approx(8.0));
  CHECK(report.aspects[0].ctg.size() == 2);
  std::ostringstream again;
  eval::write_responses_csv(again, rs);
  CHECK(again.str() == text);
}

TEST_CASE("state survives a restart, including a torn final log line") {
  const auto dir = write_audio(testing::scratch_dir("durable"));
  std::string id, before;
  json assignment;
  {
    Service svc({dir, {}});
    id = svc.create_test(definition(20, 3));
    submit_all(svc, id, "alice", 2, 1);
    assignment = svc.assignment(id, "alice");
    before = svc.export_csv(id);
  }
  const auto log = dir / "tests" / id / "events.jsonl";
  {
    Service svc({dir, {}});
    CHECK(svc.export_csv(id) == before);
    CHECK(svc.assignment(id, "alice") == assignment);
    const auto& screen = assignment.at("screens").at(0);
    CHECK(status_of([&] {
            svc.submit(id, {{"listener", "alice"}, {"utterance", screen.at("utterance")}, {"scores", scores_for(screen, 1)}});
          }) == 409);
  }
  std::ofstream(log, std::ios::app) << R"({"type":"response","listener":"alice","utt)";
  {
    Service svc({dir, {}});
    CHECK(svc.export_csv(id) == before);
    submit_all(svc, id, "bob", 1, 3);
  }
  Service svc({dir, {}});
  std::istringstream in(svc.export_csv(id));
  CHECK(eval::read_responses_csv(in).ratings.size() == 3 * 4);
  CHECK(svc.summary(id).at("listeners") == 2);
}

TEST_CASE("HTTP round trip") {
  const auto dir = write_audio(testing::scratch_dir("http"));
  fs::create_directories(dir / "static");
  std::ofstream(dir / "static" / "index.html") << "<html>listen</html>";
  Service svc({dir, dir / "static"});
  HttpServer server(svc);
  const int port = server.bind_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto r = cli.Post("/tests", definition(20, 3).dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  const auto id = json::parse(r->body).at("test_id").get<std::string>();

  auto bad = definition(4, 9);
  CHECK(cli.Post("/tests", bad.dump(), "application/json")->status == 400);
  CHECK(cli.Post("/tests", "{not json", "application/json")->status == 400);
  CHECK(cli.Get("/tests/nope")->status == 404);
  CHECK(cli.Get("/tests/" + id + "/assignment")->status == 400);

  r = cli.Get("/tests/" + id + "/assignment?listener=alice");
  REQUIRE(r);
  CHECK(r->status == 200);
  const auto a = json::parse(r->body);
  const auto& screen = a.at("screens").at(0);
  const auto url = screen.at("stimuli").at(0).at("url").get<std::string>();
  r = cli.Get(url);
  CHECK(r->status == 200);
  CHECK(r->body.rfind("RIFF:", 0) == 0);
  CHECK(cli.Get("/tests/" + id + "/audio/abcdef")->status == 404);

  json body{{"listener", "alice"}, {"utterance", screen.at("utterance")}, {"scores", scores_for(screen, 20)}};
  CHECK(cli.Post("/tests/" + id + "/responses", body.dump(), "application/json")->status == 204);
  CHECK(cli.Post("/tests/" + id + "/responses", body.dump(), "application/json")->status == 409);
  body["scores"]["A"] = -1;
  body["utterance"] = a.at("screens").at(1).at("utterance");
  CHECK(cli.Post("/tests/" + id + "/responses", body.dump(), "application/json")->status == 400);

  r = cli.Get("/tests/" + id + "/export.csv");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == svc.export_csv(id));
  CHECK(json::parse(cli.Get("/tests/" + id)->body).at("responses") == 1);
  CHECK(cli.Get("/index.html")->body == "<html>listen</html>");

  server.stop();
  th.join();
}
