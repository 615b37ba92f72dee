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

// Experiment configuration as "key = value" lines. '#' starts a comment.
// Unknown keys, duplicate keys and malformed values are errors.

#pragma once

#include <charconv>
#include <cstdio>
#include <limits>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vibrec/error.hpp"
#include "vibrec/extraction.hpp"
#include "vibrec/io/file.hpp"
#include "vibrec/recovery.hpp"

namespace vibrec::io {

struct SynthSettings {
  std::string signal = "music";  // music | chirp | clap | impulse | tone | file
  std::string source_path;       // WAV, when signal = file
  double duration = 3.0;         // s
  int sample_rate = 22000;
  double tone_freq = 440.0;
  std::size_t grid_rows = 10;
  std::size_t grid_cols = 10;
  std::size_t mode_count = 5;
  double f_base = 132.0;
  double length_x = 1.0;
  double length_y = 1.4;
  double damping = 0.01;
  double gamma = 1.0;
  double snr_db = std::numeric_limits<double>::infinity();  // per channel; inf disables noise
  double beta_min = 1.0;         // per-point optical scale drawn from [beta_min, beta_max]
  double beta_max = 1.0;
};

struct ExperimentConfig {
  std::string input_grid;        // VGRD; empty: synthesize
  std::string input_modes;       // modes JSON
  std::string input_reference;   // reference WAV (calibration source or evaluation reference)
  std::string output_dir = "out";

  SynthSettings synth;
  std::string mode_signal = "clap";  // excitation of the recording used for mode extraction
  double mode_snr_db = 20.0;

  double band_low = 50.0;
  double band_high = 10000.0;
  int band_order = 7;

  ExtractionConfig extract;
  RecoveryConfig recover;

  std::string baseline_method = "dns";  // single | avg | dns | calibrated
  std::size_t baseline_max_lag = 200;
  std::size_t calibrate_taps = 4096;
  double calibrate_duration = 3.0;

  std::vector<std::size_t> metric_resolutions{512, 1024, 2048};
  std::size_t metric_max_lag = 2048;

  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "'");
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "none" || v == "off") return std::numeric_limits<double>::infinity();
  return parse_number<double>(key, v);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define VIBREC_STR(member) \
  {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.member = v; }, \
   [](const ExperimentConfig& c) { return c.member; }}
#define VIBREC_DBL(member) \
  {[](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }, \
   [](const ExperimentConfig& c) { return fmt(c.member); }}
#define VIBREC_INT(member, type) \
  {[](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = parse_number<type>(k, v); }, \
   [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define VIBREC_BOOL(member) \
  {[](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }, \
   [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }}

inline const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"input.grid", VIBREC_STR(input_grid)},
      {"input.modes", VIBREC_STR(input_modes)},
      {"input.reference", VIBREC_STR(input_reference)},
      {"output.dir", VIBREC_STR(output_dir)},
      {"synth.signal", VIBREC_STR(synth.signal)},
      {"synth.source", VIBREC_STR(synth.source_path)},
      {"synth.duration", VIBREC_DBL(synth.duration)},
      {"synth.sample_rate", VIBREC_INT(synth.sample_rate, int)},
      {"synth.tone_freq", VIBREC_DBL(synth.tone_freq)},
      {"synth.grid_rows", VIBREC_INT(synth.grid_rows, std::size_t)},
      {"synth.grid_cols", VIBREC_INT(synth.grid_cols, std::size_t)},
      {"synth.mode_count", VIBREC_INT(synth.mode_count, std::size_t)},
      {"synth.f_base", VIBREC_DBL(synth.f_base)},
      {"synth.length_x", VIBREC_DBL(synth.length_x)},
      {"synth.length_y", VIBREC_DBL(synth.length_y)},
      {"synth.damping", VIBREC_DBL(synth.damping)},
      {"synth.gamma", VIBREC_DBL(synth.gamma)},
      {"synth.snr_db", VIBREC_DBL(synth.snr_db)},
      {"synth.beta_min", VIBREC_DBL(synth.beta_min)},
      {"synth.beta_max", VIBREC_DBL(synth.beta_max)},
      {"modes.signal", VIBREC_STR(mode_signal)},
      {"modes.snr_db", VIBREC_DBL(mode_snr_db)},
      {"band.low", VIBREC_DBL(band_low)},
      {"band.high", VIBREC_DBL(band_high)},
      {"band.order", VIBREC_INT(band_order, int)},
      {"extract.savgol_window_hz", VIBREC_DBL(extract.savgol_window_hz)},
      {"extract.savgol_order", VIBREC_INT(extract.savgol_order, int)},
      {"extract.peak_prominence", VIBREC_DBL(extract.peak_prominence)},
      {"extract.min_peak_separation_hz", VIBREC_DBL(extract.min_peak_separation_hz)},
      {"extract.shape_corr_threshold", VIBREC_DBL(extract.shape_corr_threshold)},
      {"extract.tv_outlier_zscore", VIBREC_DBL(extract.tv_outlier_zscore)},
      {"extract.tv_scale_floor", VIBREC_DBL(extract.tv_scale_floor)},
      {"extract.pool_axes", VIBREC_BOOL(extract.pool_axes)},
      {"extract.damping_ratio", VIBREC_DBL(extract.damping_ratio)},
      {"extract.low_prominence_ratio", VIBREC_DBL(extract.low_prominence_ratio)},
      {"extract.min_width_fraction", VIBREC_DBL(extract.min_width_fraction)},
      {"extract.reference",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          if (v == "auto") {
            c.extract.reference.reset();
            return;
          }
          const auto colon = v.find(':');
          if (colon == std::string::npos) throw ConfigError("config key '" + k + "': expected auto or point:axis");
          c.extract.reference = Channel{parse_number<std::size_t>(k, v.substr(0, colon)),
                                        parse_number<std::size_t>(k, v.substr(colon + 1))};
        },
        [](const ExperimentConfig& c) {
          return c.extract.reference ? std::to_string(c.extract.reference->point) + ":" +
                                           std::to_string(c.extract.reference->axis)
                                     : std::string("auto");
        }}},
      {"recover.lambda", VIBREC_DBL(recover.lambda)},
      {"recover.steps", VIBREC_INT(recover.steps, std::size_t)},
      {"recover.learning_rate", VIBREC_DBL(recover.learning_rate)},
      {"recover.damping_ratio", VIBREC_DBL(recover.damping_ratio)},
      {"recover.beta1", VIBREC_DBL(recover.beta1)},
      {"recover.beta2", VIBREC_DBL(recover.beta2)},
      {"recover.epsilon", VIBREC_DBL(recover.epsilon)},
      {"recover.target_rms", VIBREC_DBL(recover.target_rms)},
      {"recover.warm_start", VIBREC_BOOL(recover.warm_start)},
      {"baseline.method", VIBREC_STR(baseline_method)},
      {"baseline.max_lag", VIBREC_INT(baseline_max_lag, std::size_t)},
      {"calibrate.taps", VIBREC_INT(calibrate_taps, std::size_t)},
      {"calibrate.duration", VIBREC_DBL(calibrate_duration)},
      {"metrics.resolutions",
       {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.metric_resolutions.clear();
          std::istringstream in(v);
          std::string tok;
          while (std::getline(in, tok, ',')) c.metric_resolutions.push_back(parse_number<std::size_t>(k, trim(tok)));
          if (c.metric_resolutions.empty()) throw ConfigError("config key '" + k + "': empty list");
        },
        [](const ExperimentConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.metric_resolutions.size(); ++i) {
            s += (i ? "," : "") + std::to_string(c.metric_resolutions[i]);
          }
          return s;
        }}},
      {"metrics.max_lag", VIBREC_INT(metric_max_lag, std::size_t)},
      {"seed", VIBREC_INT(seed, std::uint64_t)},
  };
  return table;
}

#undef VIBREC_STR
#undef VIBREC_DBL
#undef VIBREC_INT
#undef VIBREC_BOOL

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  c.extract.validate();
  c.recover.validate();
  if (!(c.band_low > 0.0 && c.band_low < c.band_high)) throw ConfigError("band edges must satisfy 0 < low < high");
  if (c.band_order < 1) throw ConfigError("band.order must be >= 1");
  if (c.synth.sample_rate <= 0) throw ConfigError("synth.sample_rate must be positive");
  if (!(c.synth.duration > 0.0)) throw ConfigError("synth.duration must be positive");
  if (c.synth.grid_rows < 1 || c.synth.grid_cols < 1) throw ConfigError("synth grid must be at least 1x1");
  if (c.synth.mode_count < 1) throw ConfigError("synth.mode_count must be >= 1");
  if (!(c.synth.beta_min > 0.0 && c.synth.beta_min <= c.synth.beta_max)) {
    throw ConfigError("synth beta range must satisfy 0 < beta_min <= beta_max");
  }
  const std::string m = c.baseline_method;
  if (m != "single" && m != "avg" && m != "dns" && m != "calibrated") {
    throw ConfigError("baseline.method must be single, avg, dns or calibrated");
  }
  if (c.calibrate_taps < 1) throw ConfigError("calibrate.taps must be >= 1");
}

inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto& f = detail::fields();
  const auto it = f.find(key);
  if (it == f.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(c, key, value);
}

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (!seen.emplace(key, line_no).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    try {
      apply_setting(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

// Every key with its effective value, sorted by key.
inline std::string canonical_text(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [key, field] : detail::fields()) out += key + " = " + field.get(c) + "\n";
  return out;
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_text(c))));
  return buf;
}

}  // namespace vibrec::io
