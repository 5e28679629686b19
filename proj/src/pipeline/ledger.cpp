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

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <vector>

#include "polyglot/pipeline/config.hpp"
#include "polyglot/pipeline/ledger.hpp"

namespace polyglot::pipeline {

namespace fs = std::filesystem;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw PipelineError("SHA-256 init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw PipelineError("SHA-256 update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw PipelineError("SHA-256 final failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_bytes(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot read " + path.string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string artifact_digest(const fs::path& path) {
  if (fs::is_regular_file(path)) return sha256_file(path);
  if (!fs::is_directory(path)) throw PipelineError("missing artifact " + path.string());
  std::vector<std::string> rel;
  for (const auto& e : fs::recursive_directory_iterator(path))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), path).generic_string());
  std::sort(rel.begin(), rel.end());
  std::string listing;
  for (const auto& r : rel) listing += r + '\t' + sha256_file(path / r) + '\n';
  return sha256_bytes(listing);
}

nlohmann::json LedgerEntry::to_json() const {
  return {{"key", key},         {"stage", stage},       {"status", status},
          {"seed", seed},       {"inputs", inputs},     {"outputs", outputs},
          {"wall_seconds", wall_seconds}, {"details", details}};
}

LedgerEntry LedgerEntry::from_json(const nlohmann::json& j) {
  LedgerEntry e;
  e.key = j.at("key").get<std::string>();
  e.stage = j.at("stage").get<int>();
  e.status = j.at("status").get<std::string>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  e.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  e.wall_seconds = j.at("wall_seconds").get<double>();
  e.details = j.value("details", nlohmann::json::object());
  return e;
}

StageLedger StageLedger::load(const fs::path& run_dir) {
  StageLedger l(run_dir);
  const auto path = run_dir / "ledger.json";
  if (!fs::exists(path)) return l;
  std::ifstream in(path);
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j.at("entries")) l.record(LedgerEntry::from_json(e));
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError("ledger " + path.string() + ": " + e.what());
  }
  return l;
}

void StageLedger::save() const {
  nlohmann::json j{{"entries", nlohmann::json::array()}};
  for (const auto& [k, e] : entries_) j["entries"].push_back(e.to_json());
  fs::create_directories(run_dir_);
  const auto tmp = run_dir_ / "ledger.json.tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << '\n';
    if (!out) throw PipelineError("cannot write ledger in " + run_dir_.string());
  }
  fs::rename(tmp, run_dir_ / "ledger.json");
}

const LedgerEntry* StageLedger::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void StageLedger::record(LedgerEntry entry) {
  auto key = entry.key;
  entries_[key] = std::move(entry);
}

std::string StageLedger::digest(const std::string& artifact) const { return artifact_digest(run_dir_ / artifact); }

void StageLedger::require_outputs(const std::string& key) const {
  const auto* e = find(key);
  if (!e || e->status != "done") throw PipelineError(key + " has not been run");
  for (const auto& [artifact, recorded] : e->outputs) {
    if (!fs::exists(run_dir_ / artifact)) throw PipelineError(key + " artifact " + artifact + " is missing");
    if (digest(artifact) != recorded)
      throw PipelineError(key + " artifact " + artifact + " changed since it was recorded (hash mismatch)");
  }
}

}  // namespace polyglot::pipeline
