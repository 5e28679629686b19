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
#include <string>
#include <vector>

#include "json.hpp"

namespace polyglot::mushra {

std::string digest_hex(const std::string& bytes);

/// Write to a temporary file, fsync, rename.
void write_file_durably(const std::filesystem::path& path, const std::string& content);

/// Append-only JSON-lines log; each append is fsync'd before returning.
class EventLog {
 public:
  explicit EventLog(const std::filesystem::path& path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  void append(const std::string& line);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

/// Parses every complete line; a torn final line (crash mid-write) is dropped.
std::vector<nlohmann::json> read_events(const std::filesystem::path& path);

/// Terminates a complete final line or cuts a torn one, so appends start clean.
void seal_log(const std::filesystem::path& path);

}  // namespace polyglot::mushra
