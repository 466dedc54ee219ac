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

#include "lsevoc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lsevoc/error.hpp"

namespace lsevoc::wav {

namespace {

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

std::vector<float> Audio::mono() const {
  if (channels == 1) return data.front();
  std::vector<float> out(frames(), 0.0f);
  for (const auto& ch : data)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += ch[i];
  const float scale = 1.0f / static_cast<float>(channels);
  for (auto& v : out) v *= scale;
  return out;
}

Audio read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  const auto fail = [&](const char* why) {
    return DataError("'" + path.string() + "': " + why);
  };
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, buf.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw fail("truncated fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible && avail >= 26) format = le16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = buf.data() + body;
      pcm_bytes = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (!pcm || channels == 0 || rate == 0) throw fail("missing fmt or data chunk");
  if (format != kFormatPcm && format != kFormatFloat) throw fail("unsupported sample encoding");
  const std::size_t width = bits / 8;
  if (width == 0 || (format == kFormatFloat && width != 4 && width != 8) ||
      (format == kFormatPcm && width > 4))
    throw fail("unsupported bit depth");

  Audio audio;
  audio.sample_rate = static_cast<int>(rate);
  audio.channels = channels;
  const std::size_t frames = pcm_bytes / (width * channels);
  audio.data.assign(channels, std::vector<float>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = pcm + (i * channels + c) * width;
      float v = 0.0f;
      if (format == kFormatFloat) {
        if (width == 4) {
          std::uint32_t u = le32(p);
          std::memcpy(&v, &u, 4);
        } else {
          std::uint64_t u = le32(p) | std::uint64_t(le32(p + 4)) << 32;
          double d;
          std::memcpy(&d, &u, 8);
          v = static_cast<float>(d);
        }
      } else if (width == 1) {
        v = (static_cast<int>(p[0]) - 128) / 128.0f;
      } else {
        std::int32_t s = 0;
        for (std::size_t b = 0; b < width; ++b) s |= std::int32_t(p[b]) << (8 * b);
        const int shift = 32 - 8 * static_cast<int>(width);
        s = static_cast<std::int32_t>(static_cast<std::uint32_t>(s) << shift) >> shift;
        v = static_cast<float>(s / std::ldexp(1.0, 8 * static_cast<int>(width) - 1));
      }
      audio.data[c][i] = v;
    }
  }
  return audio;
}

void write(const std::filesystem::path& path, const Audio& audio, SampleFormat format) {
  if (audio.channels <= 0 || audio.data.size() != std::size_t(audio.channels))
    throw DataError("write: inconsistent channel layout");
  const std::size_t frames = audio.frames();
  const std::uint16_t width = format == SampleFormat::pcm16 ? 2 : 4;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * audio.channels * width);

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, format == SampleFormat::pcm16 ? kFormatPcm : kFormatFloat);
  put16(out, static_cast<std::uint16_t>(audio.channels));
  put32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put32(out, static_cast<std::uint32_t>(audio.sample_rate * audio.channels * width));
  put16(out, static_cast<std::uint16_t>(audio.channels * width));
  put16(out, static_cast<std::uint16_t>(8 * width));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < audio.channels; ++c) {
      const float v = audio.data[c][i];
      if (format == SampleFormat::pcm16) {
        const double clipped = std::clamp(static_cast<double>(v), -1.0, 1.0);
        const auto s = static_cast<std::int16_t>(std::lrint(clipped * 32767.0));
        put16(out, static_cast<std::uint16_t>(s));
      } else {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        put32(out, u);
      }
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write to '" + path.string() + "'");
}

void write(const std::filesystem::path& path, const std::vector<float>& mono, int sample_rate,
           SampleFormat format) {
  Audio a;
  a.sample_rate = sample_rate;
  a.channels = 1;
  a.data = {mono};
  write(path, a, format);
}

}  // namespace lsevoc::wav
