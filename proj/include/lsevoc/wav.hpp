// Copyright 2026 The lsevoc Authors. All Rights Reserved.
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

// Minimal RIFF/WAVE codec: PCM 8/16/24/32-bit and IEEE float32/64 in,
// PCM16 or float32 out.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lsevoc::wav {

enum class SampleFormat { pcm16, float32 };

struct Audio {
  int sample_rate = 0;
  int channels = 0;
  std::vector<std::vector<float>> data;  // [channel][frame], nominal range [-1, 1]

  std::size_t frames() const { return data.empty() ? 0 : data.front().size(); }
  std::vector<float> mono() const;
};

// Throws DataError on malformed or unsupported files.
Audio read(const std::filesystem::path& path);

void write(const std::filesystem::path& path, const std::vector<float>& mono, int sample_rate,
           SampleFormat format = SampleFormat::pcm16);
void write(const std::filesystem::path& path, const Audio& audio,
           SampleFormat format = SampleFormat::pcm16);

}  // namespace lsevoc::wav
