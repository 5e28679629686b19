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

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "polyglot/mushra/service.hpp"

namespace polyglot::mushra {

namespace {

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    send_error(res, e.status(), e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.Post("/tests", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = service_.create_test(nlohmann::json::parse(req.body));
      res.status = 201;
      res.set_content(nlohmann::json{{"test_id", id}}.dump(), "application/json");
    });
  });
  s.Get(R"(/tests/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(service_.summary(req.matches[1]).dump(), "application/json"); });
  });
  s.Get(R"(/tests/([^/]+)/assignment)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("listener")) throw ServiceError(400, "listener: query parameter is required");
      res.set_content(service_.assignment(req.matches[1], req.get_param_value("listener")).dump(), "application/json");
    });
  });
  s.Post(R"(/tests/([^/]+)/responses)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      service_.submit(req.matches[1], nlohmann::json::parse(req.body));
      res.status = 204;
    });
  });
  s.Get(R"(/tests/([^/]+)/export\.csv)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { res.set_content(service_.export_csv(req.matches[1]), "text/csv"); });
  });
  s.Get(R"(/tests/([^/]+)/audio/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::ifstream in(service_.audio(req.matches[1], req.matches[2]), std::ios::binary);
      std::ostringstream os;
      os << in.rdbuf();
      res.set_content(os.str(), "audio/wav");
    });
  });
  if (!service_.options().static_dir.empty()) s.set_mount_point("/", service_.options().static_dir.string());
}

HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }
int HttpServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }
void HttpServer::stop() { server_->stop(); }
void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace polyglot::mushra
