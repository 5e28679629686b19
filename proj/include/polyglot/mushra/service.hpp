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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyglot/eval/mushra.hpp"

namespace httplib {
class Server;
}

namespace polyglot::mushra {

inline constexpr std::size_t kDefaultPool = 200;
inline constexpr std::size_t kDefaultSample = 50;
inline constexpr std::size_t kDefaultQuota = 60;

struct SystemDef {
  std::string id;
  eval::Role role = eval::Role::candidate;
};

struct TestDefinition {
  std::string test_id;
  eval::Aspect aspect = eval::Aspect::naturalness;
  std::vector<SystemDef> systems;
  std::vector<std::string> utterances;
  std::map<std::string, std::map<std::string, std::filesystem::path>> stimuli;  // utterance -> system -> audio
  std::size_t sample_size = kDefaultSample;
  std::size_t quota = kDefaultQuota;
  bool reference = false;  // labelled reference (the upper anchor's audio) on every screen
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// Throws ServiceError(400) naming the offending field.
  static TestDefinition from_json(const nlohmann::json& j, const std::filesystem::path& audio_root);
  const SystemDef& system(const std::string& id) const;
};

struct Screen {
  std::string utterance;
  std::vector<std::string> labels;   // "A", "B", ...
  std::vector<std::string> systems;  // systems[k] sits behind labels[k]
};

/// Deterministic in (test seed, listener id).
struct Assignment {
  std::string listener;
  std::vector<Screen> screens;
};

Assignment make_assignment(const TestDefinition& def, const std::string& listener);

class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct ServiceOptions {
  std::filesystem::path data_dir;
  std::filesystem::path static_dir;  // optional listener page bundle
};

/// Tests, assignments and responses persisted under data_dir as an immutable
/// definition.json plus an fsync'd JSON-lines event log per test, replayed on
/// construction. All methods are serialized by one mutex.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  /// Returns the new test id.
  std::string create_test(const nlohmann::json& body);
  /// Listener-facing assignment: opaque labels and audio URLs only.
  nlohmann::json assignment(const std::string& test_id, const std::string& listener);
  void submit(const std::string& test_id, const nlohmann::json& body);
  std::string export_csv(const std::string& test_id) const;
  nlohmann::json summary(const std::string& test_id) const;
  /// Audio file behind an opaque token.
  std::filesystem::path audio(const std::string& test_id, const std::string& token) const;

  const ServiceOptions& options() const { return options_; }

 private:
  struct TestState;
  TestState& state(const std::string& test_id);
  const TestState& state(const std::string& test_id) const;
  void replay(TestState& t);
  void append(TestState& t, const nlohmann::json& event);
  void apply_assign(TestState& t, const std::string& listener);
  std::string token(const TestState& t, const std::string& listener, const std::string& utterance,
                    const std::string& label) const;

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<TestState>> tests_;
};

/// HTTP front end; the service must outlive it.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; follow with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace polyglot::mushra
