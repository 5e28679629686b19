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

#include "polyglot/dsp/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace polyglot::dsp {

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>, std::int64_t, T>>;
  U bits;
  if constexpr (std::is_same_v<T, float>) {
    bits = std::bit_cast<std::uint32_t>(v);
  } else if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<U>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& buf, std::size_t& pos, const std::filesystem::path& path) {
  if (pos + sizeof(T) > buf.size()) throw DspError("truncated file " + path.string());
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  if constexpr (std::is_same_v<T, float>) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(bits));
  } else if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DspError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DspError("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DspError("short write on " + path.string());
}

}  // namespace

void write_wav(const std::filesystem::path& path, const std::vector<double>& samples) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out = "RIFF";
  put_le<std::uint32_t>(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, 1);  // PCM
  put_le<std::uint16_t>(out, 1);  // mono
  put_le<std::uint32_t>(out, kSampleRate);
  put_le<std::uint32_t>(out, kSampleRate * 2);
  put_le<std::uint16_t>(out, 2);
  put_le<std::uint16_t>(out, 16);
  out += "data";
  put_le<std::uint32_t>(out, data_bytes);
  for (double s : samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(c * 32767.0)));
  }
  dump(path, out);
}

std::vector<double> read_wav(const std::filesystem::path& path) {
  const std::string buf = slurp(path);
  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0) {
    throw DspError("not a RIFF/WAVE file: " + path.string());
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= buf.size()) {
    const std::string id = buf.substr(pos, 4);
    pos += 4;
    const auto len = get_le<std::uint32_t>(buf, pos, path);
    if (id == "fmt ") {
      std::size_t p = pos;
      const auto format = get_le<std::uint16_t>(buf, p, path);
      const auto channels = get_le<std::uint16_t>(buf, p, path);
      const auto rate = get_le<std::uint32_t>(buf, p, path);
      p += 6;
      const auto bits = get_le<std::uint16_t>(buf, p, path);
      if (format != 1 || channels != 1 || rate != kSampleRate || bits != 16) {
        throw DspError("unsupported WAV format in " + path.string() + " (need 16-bit PCM mono 24 kHz)");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw DspError("WAV data chunk before fmt chunk: " + path.string());
      if (pos + len > buf.size()) throw DspError("truncated WAV data: " + path.string());
      std::vector<double> out(len / 2);
      std::size_t p = pos;
      for (auto& s : out) s = get_le<std::int16_t>(buf, p, path) / 32767.0;
      for (auto& s : out) s = std::clamp(s, -1.0, 1.0);
      return out;
    }
    pos += len + (len & 1);
  }
  throw DspError("WAV without data chunk: " + path.string());
}

void write_mel(const std::filesystem::path& path, const MelSpectrogram& mel) {
  std::string out = "FMEL";
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mel.frames));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kMelBins));
  for (double v : mel.values) put_le<float>(out, static_cast<float>(v));
  dump(path, out);
}

MelSpectrogram read_mel(const std::filesystem::path& path) {
  const std::string buf = slurp(path);
  if (buf.size() < 12 || buf.compare(0, 4, "FMEL") != 0) throw DspError("bad mel magic: " + path.string());
  std::size_t pos = 4;
  const auto frames = get_le<std::uint32_t>(buf, pos, path);
  const auto bins = get_le<std::uint32_t>(buf, pos, path);
  if (bins != kMelBins) throw DspError("mel file has " + std::to_string(bins) + " bins: " + path.string());
  if (buf.size() != 12 + static_cast<std::size_t>(frames) * bins * 4) {
    throw DspError("mel payload size mismatch: " + path.string());
  }
  std::vector<double> values(static_cast<std::size_t>(frames) * bins);
  for (auto& v : values) v = get_le<float>(buf, pos, path);
  return MelSpectrogram(frames, std::move(values));
}

std::size_t read_mel_frames(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DspError("cannot open " + path.string());
  std::string head(12, '\0');
  f.read(head.data(), 12);
  if (f.gcount() != 12 || head.compare(0, 4, "FMEL") != 0) throw DspError("bad mel header: " + path.string());
  std::size_t pos = 4;
  return get_le<std::uint32_t>(head, pos, path);
}

void write_f0(const std::filesystem::path& path, const F0Track& track) {
  std::string out = "FF0T";
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(track.frames()));
  for (double v : track.f0_hz) put_le<double>(out, v);
  for (bool v : track.voiced) out.push_back(v ? 1 : 0);
  dump(path, out);
}

F0Track read_f0(const std::filesystem::path& path) {
  const std::string buf = slurp(path);
  if (buf.size() < 8 || buf.compare(0, 4, "FF0T") != 0) throw DspError("bad f0 magic: " + path.string());
  std::size_t pos = 4;
  const auto frames = get_le<std::uint32_t>(buf, pos, path);
  if (buf.size() != 8 + static_cast<std::size_t>(frames) * 9) throw DspError("f0 payload size mismatch: " + path.string());
  F0Track t;
  t.f0_hz.resize(frames);
  for (auto& v : t.f0_hz) v = get_le<double>(buf, pos, path);
  t.voiced.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) t.voiced[i] = buf[pos + i] != 0;
  return t;
}

MelSpectrogram quantize_f32(const MelSpectrogram& mel) {
  MelSpectrogram out = mel;
  for (auto& v : out.values) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace polyglot::dsp
