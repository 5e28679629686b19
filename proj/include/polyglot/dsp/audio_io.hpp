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
#include <vector>

#include "polyglot/dsp/features.hpp"

namespace polyglot::dsp {

/// 16-bit PCM mono WAV at kSampleRate. Samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const std::vector<double>& samples);
std::vector<double> read_wav(const std::filesystem::path& path);

/// "FMEL" | u32 frames | u32 bins (=80) | f32 payload row-major, little-endian.
void write_mel(const std::filesystem::path& path, const MelSpectrogram& mel);
MelSpectrogram read_mel(const std::filesystem::path& path);
/// Reads only the header.
std::size_t read_mel_frames(const std::filesystem::path& path);

/// "FF0T" | u32 frames | f64 f0_hz[frames] | u8 voiced[frames].
void write_f0(const std::filesystem::path& path, const F0Track& track);
F0Track read_f0(const std::filesystem::path& path);

/// Rounds through f32 the way write_mel stores values.
MelSpectrogram quantize_f32(const MelSpectrogram& mel);

}  // namespace polyglot::dsp
