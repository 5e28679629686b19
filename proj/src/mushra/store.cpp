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

#include "store.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

#include "polyglot/mushra/service.hpp"

namespace polyglot::mushra {

namespace fs = std::filesystem;

namespace {

void write_all(int fd, const std::string& data, const fs::path& path) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ServiceError(500, "write to " + path.string() + " failed: " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) throw ServiceError(500, "fsync of " + path.string() + " failed: " + std::strerror(errno));
}

}  // namespace

std::string digest_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw ServiceError(500, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_file_durably(const fs::path& path, const std::string& content) {
  const auto tmp = fs::path(path.string() + ".tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw ServiceError(500, "cannot create " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, content, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  fs::rename(tmp, path);
}

EventLog::EventLog(const fs::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd_ < 0) throw ServiceError(500, "cannot open " + path.string() + ": " + std::strerror(errno));
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

void EventLog::append(const std::string& line) { write_all(fd_, line + "\n", path_); }

std::vector<nlohmann::json> read_events(const fs::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (in.eof()) {
      // no trailing newline: possibly torn
      try {
        out.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception&) {
      }
      break;
    }
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ServiceError(500, "corrupt event log " + path.string() + ": " + e.what());
    }
  }
  return out;
}

void seal_log(const fs::path& path) {
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (bytes.empty() || bytes.back() == '\n') return;
  const auto cut = bytes.rfind('\n');
  const auto tail = bytes.substr(cut == std::string::npos ? 0 : cut + 1);
  bool whole = true;
  try {
    (void)nlohmann::json::parse(tail);
  } catch (const nlohmann::json::exception&) {
    whole = false;
  }
  if (whole) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND);
    if (fd < 0) throw ServiceError(500, "cannot open " + path.string() + ": " + std::strerror(errno));
    try {
      write_all(fd, "\n", path);
    } catch (...) {
      ::close(fd);
      throw;
    }
    ::close(fd);
  } else {
    fs::resize_file(path, cut == std::string::npos ? 0 : cut + 1);
  }
}

}  // namespace polyglot::mushra
