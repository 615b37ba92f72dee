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

// Scene construction and the end-to-end experiment shared by the CLI and the
// acceptance suite.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "vibrec/baselines.hpp"
#include "vibrec/dsp.hpp"
#include "vibrec/extraction.hpp"
#include "vibrec/io/config.hpp"
#include "vibrec/io/json_io.hpp"
#include "vibrec/io/vgrid.hpp"
#include "vibrec/io/wav.hpp"
#include "vibrec/metrics.hpp"
#include "vibrec/modal.hpp"
#include "vibrec/recovery.hpp"
#include "vibrec/signals.hpp"

namespace vibrec {

// Independent deterministic seed per purpose (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t {
  kSourceStream = 1,
  kNoiseStream = 2,
  kModeSignalStream = 3,
  kModeNoiseStream = 4,
  kBetaStream = 5,
  kCalibrationNoiseStream = 6,
};

inline PlateSpec plate_spec(const io::SynthSettings& s) {
  PlateSpec p;
  p.grid = {s.grid_rows, s.grid_cols};
  p.mode_count = s.mode_count;
  p.f_base = s.f_base;
  p.damping = s.damping;
  p.length_x = s.length_x;
  p.length_y = s.length_y;
  p.max_m = p.max_n = std::max<std::size_t>(6, s.mode_count);
  return p;
}

inline SoundSignal make_signal(const std::string& kind, const io::SynthSettings& s, std::uint64_t seed) {
  const int fs = s.sample_rate;
  if (kind == "music") return music_like(s.duration, fs, seed);
  if (kind == "chirp") return log_chirp(50.0, 10000.0, s.duration, fs);
  if (kind == "clap") return clap(sample_count(s.duration, fs), fs, seed, 2.0, 100);
  if (kind == "impulse") return impulse(sample_count(s.duration, fs), fs, 100);
  if (kind == "tone") return tone(s.tone_freq, s.duration, fs);
  if (kind == "file") {
    auto w = io::read_wav(s.source_path);
    if (w.sample_rate != fs) throw ConfigError("source WAV sample rate differs from synth.sample_rate");
    return w;
  }
  throw ConfigError("unknown signal kind '" + kind + "'");
}

inline SceneParams make_scene(const io::SynthSettings& s, std::size_t n_points, std::uint64_t seed) {
  SceneParams scene;
  scene.gamma = s.gamma;
  if (s.beta_max > s.beta_min) {
    std::mt19937_64 rng(derive_seed(seed, kBetaStream));
    std::uniform_real_distribution<double> u(s.beta_min, s.beta_max);
    scene.beta.resize(n_points);
    for (double& b : scene.beta) b = u(rng);
  } else if (s.beta_min != 1.0) {
    scene.beta.assign(n_points, s.beta_min);
  }
  return scene;
}

// Synthesizes a recording at a per-channel SNR relative to the clean grid;
// a non-finite SNR disables noise.
inline VibrationGrid record(const SoundSignal& source, const ModeSet& modes, SceneParams scene, double snr_db,
                            std::uint64_t noise_seed) {
  scene.noise_std = 0.0;
  auto grid = synthesize(source, modes, scene, noise_seed);
  if (std::isfinite(snr_db)) add_gaussian_noise(grid, noise_std_for_snr(grid, snr_db), noise_seed);
  return grid;
}

inline VibrationGrid preprocess(const VibrationGrid& g, const io::ExperimentConfig& c) {
  return bandpass_grid(g, c.band_low, c.band_high, c.band_order);
}

inline SoundSignal preprocess(const SoundSignal& s, const io::ExperimentConfig& c) {
  return {bandpass(s.samples, s.sample_rate, c.band_low, c.band_high, c.band_order), s.sample_rate};
}

inline SoundSignal run_baseline(const std::string& method, const VibrationGrid& g, const io::ExperimentConfig& c,
                                const FilterBank* bank = nullptr) {
  if (method == "single") {
    const auto ref = c.extract.reference.value_or(select_reference(g));
    return single_point(g, ref.point, ref.axis);
  }
  if (method == "avg") return average_all(g);
  if (method == "dns") {
    const auto ref = c.extract.reference.value_or(select_reference(g));
    return delay_and_sum(g, ref, std::min(c.baseline_max_lag, (g.n_samples() - 1) / 2));
  }
  if (method == "calibrated") {
    if (bank == nullptr) throw ConfigError("calibrated baseline needs a filter bank");
    return apply_calibrated(g, *bank);
  }
  throw ConfigError("unknown baseline method '" + method + "'");
}

struct PipelineSummary {
  io::Json report;
  std::string config_hash;
};

// Synthesizes (or loads) a scene, extracts modes from a broadband recording,
// recovers the test signal, runs every baseline and scores all outputs
// against the band-passed source. Every file is written atomically.
inline PipelineSummary run_pipeline(const io::ExperimentConfig& c,
                                    const std::function<void(const std::string&)>& log = {}) {
  io::validate(c);
  namespace fs = std::filesystem;
  const fs::path out = c.output_dir;
  fs::create_directories(out);
  auto note = [&](const std::string& m) {
    if (log) log(m);
  };
  PipelineSummary summary;
  summary.config_hash = io::config_hash(c);
  io::Json report;
  report["config_hash"] = summary.config_hash;
  report["seed"] = c.seed;

  VibrationGrid grid, mode_grid;
  SoundSignal source;
  ModeSet truth;
  const bool synthetic = c.input_grid.empty();
  if (synthetic) {
    truth = analytic_plate_modes(plate_spec(c.synth));
    const auto scene = make_scene(c.synth, truth.n_points, c.seed);
    source = make_signal(c.synth.signal, c.synth, derive_seed(c.seed, kSourceStream));
    note("synthesizing test recording");
    grid = record(source, truth, scene, c.synth.snr_db, derive_seed(c.seed, kNoiseStream));
    const auto excitation = make_signal(c.mode_signal, c.synth, derive_seed(c.seed, kModeSignalStream));
    mode_grid = record(excitation, truth, scene, c.mode_snr_db, derive_seed(c.seed, kModeNoiseStream));
    io::write_wav(out / "source.wav", source);
    io::write_vgrid(out / "grid.vgrd", grid);
    io::write_vgrid(out / "mode_grid.vgrd", mode_grid);
    io::write_json(out / "modes_truth.json", io::to_json(truth));
  } else {
    grid = io::read_vgrid(c.input_grid);
    mode_grid = grid;
    if (!c.input_reference.empty()) source = io::read_wav(c.input_reference);
  }

  const auto g = preprocess(grid, c);
  ModeSet modes;
  if (!c.input_modes.empty()) {
    modes = io::read_mode_set(c.input_modes);
  } else {
    note("extracting modes");
    const auto ex = extract_modes(preprocess(mode_grid, c), c.extract);
    modes = ex.modes;
    io::write_json(out / "diagnostics.json", io::to_json(ex));
  }
  io::write_json(out / "modes.json", io::to_json(modes));
  report["modes"] = modes.frequencies();

  io::Json outputs;
  std::vector<std::pair<std::string, SoundSignal>> results;
  if (!modes.empty()) {
    note("recovering sound");
    const auto rec = recover_sound(g, modes, c.recover);
    io::write_wav(out / "recovered.wav", rec.recovered);
    report["recovery"] = io::to_json(rec);
    results.emplace_back("ours", rec.recovered);
  }
  for (const std::string m : {"single", "avg", "dns"}) {
    try {
      auto b = run_baseline(m, g, c);
      io::write_wav(out / ("baseline_" + m + ".wav"), b);
      results.emplace_back(m, std::move(b));
    } catch (const ZeroSignal& e) {
      outputs[m] = {{"error", e.what()}};
    }
  }
  if (synthetic) {
    note("calibrating inverse filters");
    io::SynthSettings cs = c.synth;
    cs.duration = c.calibrate_duration;
    const auto chirp = make_signal("chirp", cs, 0);
    const auto scene = make_scene(c.synth, truth.n_points, c.seed);
    const auto cal = record(chirp, truth, scene, c.synth.snr_db, derive_seed(c.seed, kCalibrationNoiseStream));
    const auto cg = preprocess(cal, c);
    const auto taps = std::min(c.calibrate_taps, cg.n_samples() / 4);
    const auto bank = estimate_inverse_filters(cg, preprocess(chirp, c), taps);
    io::write_filter_bank(out / "filters.fbnk", bank);
    auto b = run_baseline("calibrated", g, c, &bank);
    io::write_wav(out / "baseline_calibrated.wav", b);
    results.emplace_back("calibrated", std::move(b));
  }

  if (!source.samples.empty()) {
    const auto reference = preprocess(source, c);
    for (const auto& [name, sig] : results) {
      outputs[name] = io::to_json(si_mr_stft(sig, reference, c.metric_resolutions, c.metric_max_lag));
    }
    io::write_json(out / "metrics.json", outputs);
  }
  report["metrics"] = outputs;
  report["config"] = io::canonical_text(c);
  io::write_json(out / "report.json", report);
  summary.report = std::move(report);
  return summary;
}

}  // namespace vibrec
