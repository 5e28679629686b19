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

#include "polyglot/numerics/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace polyglot::numerics {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(std::string bytes, std::string origin) : buf_(std::move(bytes)), origin_(std::move(origin)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw NumericError("truncated checkpoint: " + origin_);
  }
  std::string buf_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors) {
  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.value.rank()));
    for (auto d : t.value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.value.values()) put_f64(out, v);
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw NumericError("cannot write checkpoint " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw NumericError("short write on checkpoint " + path.string());
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw NumericError("cannot open checkpoint " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(f), {}), path.string());
  if (r.bytes(4) != std::string(kMagic, 4)) throw NumericError("bad checkpoint magic in " + path.string());
  const auto version = r.u32();
  if (version != kVersion) throw NumericError("unsupported checkpoint version " + std::to_string(version));
  const auto count = r.u32();
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.bytes(r.u32());
    const auto rank = r.u32();
    Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = r.f64();
    t.value = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(t));
  }
  if (!r.done()) throw NumericError("trailing bytes in checkpoint " + path.string());
  return out;
}

std::vector<NamedTensor> to_named(const ParameterSet& params) {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < params.size(); ++i) out.push_back({params.name(i), params.value(i)});
  return out;
}

const Tensor& find_tensor(std::span<const NamedTensor> tensors, const std::string& name) {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw NumericError("checkpoint has no tensor named " + name);
}

void load_into(ParameterSet& params, std::span<const NamedTensor> tensors) {
  for (std::size_t i = 0; i < params.size(); ++i) params.set(i, find_tensor(tensors, params.name(i)));
}

}  // namespace polyglot::numerics
