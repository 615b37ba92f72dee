// Copyright 2026 The vibrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Mono WAV: reads 16-bit PCM and 32-bit IEEE float, writes 32-bit float.

#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "vibrec/io/file.hpp"
#include "vibrec/types.hpp"

namespace vibrec::io {

inline std::vector<char> encode_wav(const SoundSignal& s) {
  s.validate();
  const std::uint64_t data_bytes = 4ull * s.size();
  if (data_bytes > 0xffffffffull - 64) throw UnsupportedFormat("signal too long for WAV");
  ByteWriter w;
  w.tag("RIFF");
  w.u32(static_cast<std::uint32_t>(4 + 26 + 12 + 8 + data_bytes));
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(18);
  w.u16(3);  // IEEE float
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(s.sample_rate));
  w.u32(static_cast<std::uint32_t>(s.sample_rate) * 4);
  w.u16(4);
  w.u16(32);
  w.u16(0);
  w.tag("fact");
  w.u32(4);
  w.u32(static_cast<std::uint32_t>(s.size()));
  w.tag("data");
  w.u32(static_cast<std::uint32_t>(data_bytes));
  for (double v : s.samples) w.f32(static_cast<float>(v));
  return w.bytes();
}

inline SoundSignal decode_wav(std::span<const char> bytes) {
  ByteReader r(bytes);
  try {
    if (r.tag() != "RIFF") throw UnsupportedFormat("not a RIFF file");
    r.u32();
    if (r.tag() != "WAVE") throw UnsupportedFormat("not a WAVE file");
  } catch (const CorruptFile&) {
    throw UnsupportedFormat("truncated WAV header");
  }
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (r.has(8)) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    if (!r.has(size)) throw UnsupportedFormat("chunk '" + id + "' runs past end of file");
    const std::size_t next = r.position() + size + (size & 1u);
    if (id == "fmt ") {
      if (size < 16) throw UnsupportedFormat("fmt chunk too short");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();
      r.u16();
      bits = r.u16();
      if (format == 0xFFFE) {
        if (size < 40) throw UnsupportedFormat("extensible fmt chunk too short");
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw UnsupportedFormat("data chunk before fmt chunk");
      if (channels != 1) throw UnsupportedFormat("only mono WAV is supported, got " + std::to_string(channels) + " channels");
      if (rate == 0 || rate > 0x7fffffffu) throw UnsupportedFormat("invalid sample rate");
      SoundSignal s;
      s.sample_rate = static_cast<int>(rate);
      if (format == 3 && bits == 32) {
        s.samples.resize(size / 4);
        for (auto& v : s.samples) {
          v = r.f32();
          if (!std::isfinite(v)) throw CorruptFile("non-finite sample in WAV payload");
        }
      } else if (format == 1 && bits == 16) {
        s.samples.resize(size / 2);
        for (auto& v : s.samples) v = r.i16() / 32768.0;
      } else {
        throw UnsupportedFormat("unsupported codec (format " + std::to_string(format) + ", " +
                                std::to_string(bits) + " bits)");
      }
      return s;
    }
    r.seek(std::min(next, bytes.size()));
  }
  throw UnsupportedFormat("no data chunk");
}

inline SoundSignal read_wav(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

inline void write_wav(const std::filesystem::path& path, const SoundSignal& s) {
  write_file_atomic(path, encode_wav(s));
}

}  // namespace vibrec::io
