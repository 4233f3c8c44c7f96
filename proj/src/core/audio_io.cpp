// Copyright 2026 The psyhide Authors
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

#include "core/audio_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "core/errors.hpp"

namespace psyhide {

namespace {

constexpr double kScale = 32768.0;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ofstream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_len = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_len > bytes.size()) {
      throw IoError("truncated chunk in: " + path);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) {
        throw FormatError("fmt chunk too short: " + path);
      }
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word aligned
  }

  if (!have_fmt || data == nullptr) {
    throw FormatError("missing fmt or data chunk: " + path);
  }
  if (format != 1 || bits != 16) {
    throw FormatError("unsupported codec (need 16-bit PCM): " + path);
  }
  if (channels != 1 && channels != 2) {
    throw FormatError("unsupported channel count " + std::to_string(channels) +
                      ": " + path);
  }
  if (static_cast<int>(rate) != kCanonicalSampleRate) {
    throw FormatError("sample rate " + std::to_string(rate) +
                      " not supported (expected 16000): " + path);
  }
  const std::size_t bytes_per_frame = 2u * channels;
  if (data_len % bytes_per_frame != 0) {
    throw IoError("data chunk size not a whole number of frames: " + path);
  }

  const std::size_t frames = data_len / bytes_per_frame;
  AudioSignal sig;
  sig.sample_rate_hz = kCanonicalSampleRate;
  sig.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* p = data + i * bytes_per_frame;
    const std::int16_t left =
        static_cast<std::int16_t>(read_u16(p));
    if (channels == 1) {
      sig.samples[i] = left / kScale;
    } else {
      const std::int16_t right =
          static_cast<std::int16_t>(read_u16(p + 2));
      sig.samples[i] =
          (static_cast<double>(left) + static_cast<double>(right)) /
          (2.0 * kScale);
    }
  }
  return sig;
}

std::size_t write_wav(const AudioSignal& signal, const std::string& path) {
  if (signal.samples.empty()) {
    throw ArgumentError("refusing to write empty signal: " + path);
  }
  if (signal.sample_rate_hz <= 0) {
    throw ArgumentError("invalid sample rate");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }

  const std::uint32_t n = static_cast<std::uint32_t>(signal.samples.size());
  const std::uint32_t data_len = n * 2;
  const std::uint32_t rate = static_cast<std::uint32_t>(signal.sample_rate_hz);

  out.write("RIFF", 4);
  put_u32(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, 1);          // PCM
  put_u16(out, 1);          // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);   // byte rate
  put_u16(out, 2);          // block align
  put_u16(out, 16);         // bits per sample
  out.write("data", 4);
  put_u32(out, data_len);

  std::size_t clipped = 0;
  for (double s : signal.samples) {
    if (s > 1.0 || s < -1.0) {
      ++clipped;
      s = s > 1.0 ? 1.0 : -1.0;
    }
    long q = std::lround(s * kScale);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
  return clipped;
}

}  // namespace psyhide
