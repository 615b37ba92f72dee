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

// VGRD container (vibration grids), FBNK container (filter banks) and a CSV
// import path. All payloads are little-endian float32.
//
// VGRD: "VGRD" u16 version, u16 n_points, u16 rows, u16 cols, u32 sample_rate,
//       u64 n_samples, f32 coords[N][2], f32 data[N][2][T]
// FBNK: "FBNK" u16 version, u16 n_points, u32 reserved, u32 sample_rate,
//       u64 taps, f32 filters[N][2][taps]

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vibrec/baselines.hpp"
#include "vibrec/io/file.hpp"
#include "vibrec/types.hpp"

namespace vibrec::io {

inline constexpr std::uint16_t kVgridVersion = 1;
inline constexpr std::uint16_t kFilterBankVersion = 1;
inline constexpr std::size_t kVgridHeaderBytes = 24;

inline std::uint64_t vgrid_file_size(std::uint64_t n_points, std::uint64_t n_samples) {
  return kVgridHeaderBytes + 8 * n_points + 8 * n_points * n_samples;
}

namespace detail {

inline float checked_f32(ByteReader& r) {
  const float v = r.f32();
  if (!std::isfinite(v)) throw CorruptFile("non-finite value in payload");
  return v;
}

}  // namespace detail

// Samples are stored as float32; values are rounded once on write.
inline std::vector<char> encode_vgrid(const VibrationGrid& g) {
  g.validate();
  if (g.n_points() > 0xffff || g.dims().rows > 0xffff || g.dims().cols > 0xffff) {
    throw UnsupportedFormat("grid too large for VGRD");
  }
  ByteWriter w;
  w.tag("VGRD");
  w.u16(kVgridVersion);
  w.u16(static_cast<std::uint16_t>(g.n_points()));
  w.u16(static_cast<std::uint16_t>(g.dims().rows));
  w.u16(static_cast<std::uint16_t>(g.dims().cols));
  w.u32(static_cast<std::uint32_t>(g.sample_rate()));
  w.u64(g.n_samples());
  for (const auto& p : g.coords()) {
    w.f32(static_cast<float>(p[0]));
    w.f32(static_cast<float>(p[1]));
  }
  for (double v : g.data()) w.f32(static_cast<float>(v));
  return w.bytes();
}

inline VibrationGrid decode_vgrid(std::span<const char> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kVgridHeaderBytes) throw CorruptFile("VGRD header truncated");
  if (r.tag() != "VGRD") throw CorruptFile("bad VGRD magic");
  const auto version = r.u16();
  if (version != kVgridVersion) throw CorruptFile("unsupported VGRD version " + std::to_string(version));
  const std::size_t n = r.u16();
  const std::size_t rows = r.u16();
  const std::size_t cols = r.u16();
  const std::uint32_t fs = r.u32();
  const std::uint64_t T = r.u64();
  if (n < 1 || T < 2 || fs == 0 || fs > 0x7fffffffu) throw CorruptFile("invalid VGRD header fields");
  if ((rows == 0) != (cols == 0) || (rows > 0 && rows * cols != n)) {
    throw CorruptFile("VGRD grid layout does not match point count");
  }
  if (T > (std::numeric_limits<std::uint64_t>::max() - kVgridHeaderBytes) / (8 * n + 8) ||
      bytes.size() != vgrid_file_size(n, T)) {
    throw CorruptFile("VGRD size " + std::to_string(bytes.size()) + " does not match header");
  }
  VibrationGrid g(n, static_cast<std::size_t>(T), static_cast<int>(fs));
  g.set_dims({rows, cols});
  for (auto& p : g.coords()) {
    p[0] = detail::checked_f32(r);
    p[1] = detail::checked_f32(r);
  }
  for (double& v : g.data()) v = detail::checked_f32(r);
  return g;
}

inline VibrationGrid read_vgrid(const std::filesystem::path& path) { return decode_vgrid(read_file(path)); }

inline void write_vgrid(const std::filesystem::path& path, const VibrationGrid& g) {
  write_file_atomic(path, encode_vgrid(g));
}

// Rounds a grid to the float32 values a VGRD file stores.
inline VibrationGrid quantize_f32(VibrationGrid g) {
  for (double& v : g.data()) v = static_cast<float>(v);
  for (auto& p : g.coords()) {
    for (double& v : p) v = static_cast<float>(v);
  }
  return g;
}

inline std::vector<char> encode_filter_bank(const FilterBank& b) {
  b.validate();
  if (b.n_points > 0xffff) throw UnsupportedFormat("filter bank too large");
  ByteWriter w;
  w.tag("FBNK");
  w.u16(kFilterBankVersion);
  w.u16(static_cast<std::uint16_t>(b.n_points));
  w.u32(0);
  w.u32(static_cast<std::uint32_t>(b.sample_rate));
  w.u64(b.taps);
  for (double v : b.filters) w.f32(static_cast<float>(v));
  return w.bytes();
}

inline FilterBank decode_filter_bank(std::span<const char> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 24) throw CorruptFile("FBNK header truncated");
  if (r.tag() != "FBNK") throw CorruptFile("bad FBNK magic");
  if (r.u16() != kFilterBankVersion) throw CorruptFile("unsupported FBNK version");
  const std::size_t n = r.u16();
  r.u32();
  const std::uint32_t fs = r.u32();
  const std::uint64_t taps = r.u64();
  if (n < 1 || taps < 1 || fs == 0 || fs > 0x7fffffffu) throw CorruptFile("invalid FBNK header fields");
  if (taps > (std::numeric_limits<std::uint64_t>::max() - 24) / (8 * n) || bytes.size() != 24 + 8 * n * taps) {
    throw CorruptFile("FBNK size does not match header");
  }
  FilterBank b(n, static_cast<std::size_t>(taps), static_cast<int>(fs));
  for (double& v : b.filters) v = detail::checked_f32(r);
  for (std::size_t c = 0; c < b.n_channels(); ++c) b.silent[c] = is_silent(b.filter(c));
  return b;
}

inline FilterBank read_filter_bank(const std::filesystem::path& path) {
  return decode_filter_bank(read_file(path));
}

inline void write_filter_bank(const std::filesystem::path& path, const FilterBank& b) {
  write_file_atomic(path, encode_filter_bank(b));
}

// CSV import. Optional header line "# sample_rate=<Hz> rows=<r> cols=<c>";
// then one line per channel: x,y,axis,s_0,...,s_{T-1}. Each point appears as
// an axis-0 line followed by its axis-1 line.
inline VibrationGrid parse_grid_csv(const std::string& text, int default_rate = 22000) {
  std::istringstream in(text);
  std::string line;
  int fs = default_rate;
  std::size_t rows = 0, cols = 0;
  std::vector<Point2> coords;
  std::vector<std::vector<double>> channels;
  std::size_t line_no = 0;
  auto parse_num = [&](std::string_view tok) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw CorruptFile("CSV line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string kv;
      while (hs >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const auto key = kv.substr(0, eq);
        const double v = parse_num(std::string_view(kv).substr(eq + 1));
        if (key == "sample_rate") fs = static_cast<int>(v);
        else if (key == "rows") rows = static_cast<std::size_t>(v);
        else if (key == "cols") cols = static_cast<std::size_t>(v);
        else throw CorruptFile("CSV header: unknown key '" + key + "'");
      }
      continue;
    }
    std::vector<double> vals;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      vals.push_back(parse_num(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (vals.size() < 5) throw CorruptFile("CSV line " + std::to_string(line_no) + ": need x,y,axis and >= 2 samples");
    const auto axis = static_cast<std::size_t>(vals[2]);
    if (vals[2] != static_cast<double>(axis) || axis != channels.size() % 2) {
      throw CorruptFile("CSV line " + std::to_string(line_no) + ": expected axis " + std::to_string(channels.size() % 2));
    }
    if (axis == 0) coords.push_back({vals[0], vals[1]});
    channels.emplace_back(vals.begin() + 3, vals.end());
    if (channels.back().size() != channels.front().size()) {
      throw CorruptFile("CSV line " + std::to_string(line_no) + ": channel length differs");
    }
  }
  if (channels.empty() || channels.size() % 2 != 0) throw CorruptFile("CSV must hold both axes of every point");
  VibrationGrid g(coords.size(), channels.front().size(), fs);
  g.set_dims({rows, cols});
  g.coords() = coords;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    std::copy(channels[c].begin(), channels[c].end(), g.channel(c).begin());
  }
  g.validate();
  return g;
}

}  // namespace vibrec::io
