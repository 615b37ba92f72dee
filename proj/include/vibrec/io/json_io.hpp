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

// JSON documents for mode sets, extraction diagnostics and metric reports.
// Non-finite numbers are written as null.

#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "vibrec/extraction.hpp"
#include "vibrec/io/file.hpp"
#include "vibrec/metrics.hpp"
#include "vibrec/modal.hpp"
#include "vibrec/recovery.hpp"

namespace vibrec::io {

using Json = nlohmann::ordered_json;

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const ModeSet& set) {
  Json j;
  j["n_points"] = set.n_points;
  j["grid"] = {{"rows", set.dims.rows}, {"cols", set.dims.cols}};
  Json coords = Json::array();
  for (const auto& p : set.point_coords) coords.push_back({p[0], p[1]});
  j["point_coords"] = coords;
  Json modes = Json::array();
  for (const auto& m : set.modes) {
    Json shape = Json::array();
    for (const auto& g : m.shape_grad) shape.push_back({g[0], g[1]});
    modes.push_back({{"natural_freq", m.natural_freq},
                     {"damping_ratio", m.damping_ratio},
                     {"coupling", m.coupling},
                     {"shape_grad", shape}});
  }
  j["modes"] = modes;
  return j;
}

inline ModeSet mode_set_from_json(const Json& j) {
  try {
    ModeSet set;
    set.n_points = j.at("n_points").get<std::size_t>();
    if (j.contains("grid")) {
      set.dims = {j.at("grid").at("rows").get<std::size_t>(), j.at("grid").at("cols").get<std::size_t>()};
    }
    if (j.contains("point_coords")) {
      for (const auto& p : j.at("point_coords")) set.point_coords.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    for (const auto& mj : j.at("modes")) {
      Mode m;
      m.natural_freq = mj.at("natural_freq").get<double>();
      m.damping_ratio = mj.value("damping_ratio", 0.01);
      m.coupling = mj.value("coupling", 1.0);
      for (const auto& g : mj.at("shape_grad")) m.shape_grad.push_back({g.at(0).get<double>(), g.at(1).get<double>()});
      set.modes.push_back(std::move(m));
    }
    set.validate();
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("malformed mode set JSON: ") + e.what());
  }
}

inline Json to_json(const ExtractedModes& ex) {
  Json j;
  j["reference"] = {{"point", ex.reference.point}, {"axis", ex.reference.axis}};
  j["sigma_median"] = number(ex.sigma_median);
  j["freq_resolution"] = number(ex.freq_resolution);
  Json cands = Json::array();
  for (const auto& c : ex.candidates) {
    Json cj;
    cj["frequency"] = number(c.frequency);
    cj["bin"] = c.bin;
    cj["prominence"] = number(c.prominence);
    cj["prominence_ratio"] = number(c.prominence_ratio);
    cj["peak_width_hz"] = number(c.peak_width_hz);
    cj["resonance_width_hz"] = number(c.resonance_width_hz);
    cj["low_prominence"] = c.low_prominence;
    cj["total_variation"] = number(c.total_variation);
    cj["tv_residual"] = number(c.tv_residual);
    cj["stage"] = to_string(c.stage);
    cj["correlated_with"] = c.correlated_with ? number(*c.correlated_with) : Json(nullptr);
    cj["correlation"] = number(c.correlation);
    cands.push_back(cj);
  }
  j["candidates"] = cands;
  return j;
}

inline Json to_json(const MetricReport& m) {
  Json j;
  j["si_mr_stft"] = number(m.si_mr_stft);
  j["max_xcorr"] = number(m.max_xcorr);
  j["abs_xcorr"] = number(std::abs(m.max_xcorr));
  j["best_lag"] = m.best_lag;
  Json res = Json::array();
  for (const auto& r : m.per_resolution) {
    res.push_back({{"window", r.window},
                   {"spectral_convergence", number(r.spectral_convergence)},
                   {"log_magnitude", number(r.log_magnitude)}});
  }
  j["per_resolution"] = res;
  return j;
}

inline Json to_json(const RecoveryResult& r) {
  Json j;
  Json a = Json::array();
  for (double v : r.couplings) a.push_back(number(v));
  j["couplings"] = a;
  j["data_term"] = number(r.data_term);
  j["reg_term"] = number(r.reg_term);
  j["grid_scale"] = number(r.grid_scale);
  j["initial_loss"] = r.loss_trace.empty() ? Json(nullptr) : number(r.loss_trace.front());
  j["final_loss"] = number(r.data_term + r.reg_term);
  j["steps"] = r.loss_trace.size();
  return j;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text_atomic(path, dump(j)); }

inline Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptFile(path.string() + ": " + e.what());
  }
}

inline ModeSet read_mode_set(const std::filesystem::path& path) { return mode_set_from_json(read_json(path)); }

}  // namespace vibrec::io
