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

// vibrec command-line driver.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vibrec/vibrec.hpp"

namespace {

using vibrec::io::ExperimentConfig;
using vibrec::io::Json;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;
};

ExperimentConfig load(const Globals& g) {
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("VIBREC_CONFIG")) path = env;
  }
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : vibrec::io::load_config(path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw vibrec::ConfigError("--set expects key=value, got '" + kv + "'");
    vibrec::io::apply_setting(c, vibrec::io::detail::trim(kv.substr(0, eq)),
                              vibrec::io::detail::trim(kv.substr(eq + 1)));
  }
  if (g.seed) {
    c.seed = *g.seed;
    c.recover.seed = *g.seed;
  }
  vibrec::io::validate(c);
  return c;
}

void log_line(const Globals& g, const std::string& cmd, const ExperimentConfig& c, const std::string& msg = "") {
  if (g.quiet) return;
  std::cerr << "[vibrec] " << cmd << " config_hash=" << vibrec::io::config_hash(c) << " seed=" << c.seed;
  if (!msg.empty()) std::cerr << " " << msg;
  std::cerr << "\n";
}

int fail(const std::string& kind, const std::string& message, int code) {
  Json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sound recovery from multi-point surface vibrations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("-c,--config", g.config_path, "key = value config file (default: $VIBREC_CONFIG)");
  app.add_option("--seed", g.seed, "Seed for all randomness (overrides the config)");
  app.add_option("--set", g.overrides, "Override a config key: --set key=value");
  app.add_flag("-q,--quiet", g.quiet, "Suppress log lines");

  std::string grid_path, out_path, modes_path, diag_path, source_out, reference_path, filters_path, report_path;
  std::string method, csv_path;
  std::vector<std::string> eval_pos;
  std::optional<std::size_t> taps;

  auto* synth = app.add_subcommand("synth", "Synthesize a plate scene recording");
  synth->add_option("-o,--out", out_path, "Output VGRD")->required();
  synth->add_option("--modes-out", modes_path, "Ground-truth modes JSON");
  synth->add_option("--source-out", source_out, "Source WAV");

  auto* modes = app.add_subcommand("modes", "Extract modes from a recording");
  modes->add_option("-g,--grid", grid_path, "Input VGRD")->required();
  modes->add_option("-o,--out", out_path, "Modes JSON")->required();
  modes->add_option("--diagnostics", diag_path, "Diagnostics JSON");

  auto* recover = app.add_subcommand("recover", "Recover sound from a recording and a mode set");
  recover->add_option("-g,--grid", grid_path, "Input VGRD")->required();
  recover->add_option("-m,--modes", modes_path, "Modes JSON")->required();
  recover->add_option("-o,--out", out_path, "Output WAV")->required();
  recover->add_option("--report", report_path, "Recovery report JSON");

  auto* baseline = app.add_subcommand("baseline", "Run a baseline recovery");
  baseline->add_option("--method", method, "single | avg | dns | calibrated")
      ->check(CLI::IsMember({"single", "avg", "dns", "calibrated"}));
  baseline->add_option("-g,--grid", grid_path, "Input VGRD")->required();
  baseline->add_option("-f,--filters", filters_path, "Filter bank (calibrated method)");
  baseline->add_option("-o,--out", out_path, "Output WAV")->required();

  auto* calibrate = app.add_subcommand("calibrate", "Estimate inverse filters from a calibration recording");
  calibrate->add_option("-g,--grid", grid_path, "Calibration VGRD")->required();
  calibrate->add_option("-r,--reference", reference_path, "Calibration source WAV")->required();
  calibrate->add_option("--taps", taps, "Filter length");
  calibrate->add_option("-o,--out", out_path, "Output filter bank")->required();

  auto* eval = app.add_subcommand("eval", "Score a WAV against a reference WAV");
  eval->add_option("files", eval_pos, "candidate.wav reference.wav")->expected(2)->required();
  eval->add_option("-o,--out", out_path, "Metrics JSON (default: stdout)");

  auto* pipeline = app.add_subcommand("pipeline", "End-to-end experiment from one config");
  pipeline->add_option("-o,--out-dir", out_path, "Output directory (overrides output.dir)");

  auto* import_csv = app.add_subcommand("import-csv", "Convert a CSV recording to VGRD");
  import_csv->add_option("csv", csv_path, "Input CSV")->required();
  import_csv->add_option("-o,--out", out_path, "Output VGRD")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), 2);
  }

  try {
    const auto c = load(g);
    if (synth->parsed()) {
      log_line(g, "synth", c);
      const auto truth = vibrec::analytic_plate_modes(vibrec::plate_spec(c.synth));
      const auto scene = vibrec::make_scene(c.synth, truth.n_points, c.seed);
      const auto source =
          vibrec::make_signal(c.synth.signal, c.synth, vibrec::derive_seed(c.seed, vibrec::kSourceStream));
      const auto grid =
          vibrec::record(source, truth, scene, c.synth.snr_db, vibrec::derive_seed(c.seed, vibrec::kNoiseStream));
      vibrec::io::write_vgrid(out_path, grid);
      if (!modes_path.empty()) vibrec::io::write_json(modes_path, vibrec::io::to_json(truth));
      if (!source_out.empty()) vibrec::io::write_wav(source_out, source);
    } else if (modes->parsed()) {
      log_line(g, "modes", c);
      const auto grid = vibrec::preprocess(vibrec::io::read_vgrid(grid_path), c);
      const auto ex = vibrec::extract_modes(grid, c.extract);
      vibrec::io::write_json(out_path, vibrec::io::to_json(ex.modes));
      if (!diag_path.empty()) vibrec::io::write_json(diag_path, vibrec::io::to_json(ex));
    } else if (recover->parsed()) {
      log_line(g, "recover", c);
      const auto grid = vibrec::preprocess(vibrec::io::read_vgrid(grid_path), c);
      const auto set = vibrec::io::read_mode_set(modes_path);
      const auto res = vibrec::recover_sound(grid, set, c.recover);
      vibrec::io::write_wav(out_path, res.recovered);
      if (!report_path.empty()) vibrec::io::write_json(report_path, vibrec::io::to_json(res));
    } else if (baseline->parsed()) {
      const std::string m = method.empty() ? c.baseline_method : method;
      log_line(g, "baseline", c, "method=" + m);
      const auto grid = vibrec::preprocess(vibrec::io::read_vgrid(grid_path), c);
      std::optional<vibrec::FilterBank> bank;
      if (m == "calibrated") {
        if (filters_path.empty()) throw vibrec::ConfigError("--filters is required for the calibrated method");
        bank = vibrec::io::read_filter_bank(filters_path);
      }
      vibrec::io::write_wav(out_path, vibrec::run_baseline(m, grid, c, bank ? &*bank : nullptr));
    } else if (calibrate->parsed()) {
      log_line(g, "calibrate", c);
      const auto grid = vibrec::preprocess(vibrec::io::read_vgrid(grid_path), c);
      const auto ref = vibrec::preprocess(vibrec::io::read_wav(reference_path), c);
      const auto bank = vibrec::estimate_inverse_filters(grid, ref, taps.value_or(c.calibrate_taps));
      for (const auto& w : bank.warnings) {
        if (!g.quiet) std::cerr << "[vibrec] warning: " << w << "\n";
      }
      vibrec::io::write_filter_bank(out_path, bank);
    } else if (eval->parsed()) {
      log_line(g, "eval", c);
      const auto cand = vibrec::io::read_wav(eval_pos[0]);
      const auto ref = vibrec::io::read_wav(eval_pos[1]);
      const auto rep = vibrec::si_mr_stft(cand, ref, c.metric_resolutions, c.metric_max_lag);
      const auto j = vibrec::io::to_json(rep);
      if (out_path.empty()) {
        std::cout << vibrec::io::dump(j);
      } else {
        vibrec::io::write_json(out_path, j);
      }
    } else if (pipeline->parsed()) {
      auto pc = c;
      if (!out_path.empty()) pc.output_dir = out_path;
      log_line(g, "pipeline", pc, "out=" + pc.output_dir);
      vibrec::run_pipeline(pc, [&](const std::string& m) {
        if (!g.quiet) std::cerr << "[vibrec] " << m << "\n";
      });
    } else if (import_csv->parsed()) {
      log_line(g, "import-csv", c);
      const auto grid = vibrec::io::parse_grid_csv(vibrec::io::read_text(csv_path), c.synth.sample_rate);
      vibrec::io::write_vgrid(out_path, grid);
    }
  } catch (const vibrec::Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), 1);
  }
  return 0;
}
