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

// Modal forward model: second-order oscillator transfer functions, their
// impulse responses, and synthesis of two-axis surface-gradient vibrations
// driven by a uniform sound pressure.
//
//   v_a(x_n, t) = gamma * beta_n * sum_k dphi_k(x_n)[a] * (s * g_k)(t) + noise
//
// Convolutions are circular with g_k the inverse DFT of G_k sampled on the
// DFT grid of the signal length. With light damping g_k decays long before
// the end of a typical clip, so wrap-around is small but not zero: a
// response that has not decayed by the end of the clip leaks into its start.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "vibrec/fft.hpp"
#include "vibrec/types.hpp"

namespace vibrec {

struct Mode {
  double natural_freq = 0.0;   // Hz
  double damping_ratio = 0.01;
  double coupling = 1.0;
  std::vector<Point2> shape_grad;  // one (d/dx, d/dy) pair per point

  void validate(std::size_t n_points) const {
    if (!(natural_freq > 0.0) || !std::isfinite(natural_freq)) {
      throw InvalidSignal("mode natural frequency must be positive");
    }
    if (!(damping_ratio > 0.0 && damping_ratio < 1.0)) {
      throw InvalidSignal("mode damping ratio must lie in (0, 1)");
    }
    if (!std::isfinite(coupling)) throw InvalidSignal("mode coupling must be finite");
    if (shape_grad.size() != n_points) {
      throw ShapeMismatch("mode shape has " + std::to_string(shape_grad.size()) +
                          " rows, expected " + std::to_string(n_points));
    }
    for (const auto& g : shape_grad) {
      if (!std::isfinite(g[0]) || !std::isfinite(g[1])) {
        throw InvalidSignal("mode shape gradient must be finite");
      }
    }
  }
};

struct ModeSet {
  std::vector<Mode> modes;  // strictly ascending natural_freq
  std::size_t n_points = 0;
  std::vector<Point2> point_coords;
  GridDims dims{};

  std::size_t size() const { return modes.size(); }
  bool empty() const { return modes.empty(); }

  std::vector<double> frequencies() const {
    std::vector<double> f;
    f.reserve(modes.size());
    for (const auto& m : modes) f.push_back(m.natural_freq);
    return f;
  }

  void validate() const {
    for (std::size_t k = 0; k < modes.size(); ++k) {
      modes[k].validate(n_points);
      if (k > 0 && !(modes[k].natural_freq > modes[k - 1].natural_freq)) {
        throw InvalidSignal("mode frequencies must be strictly increasing");
      }
    }
    if (!point_coords.empty() && point_coords.size() != n_points) {
      throw ShapeMismatch("point_coords size does not match n_points");
    }
    if (dims.structured() && dims.count() != n_points) {
      throw ShapeMismatch("grid dims do not match n_points");
    }
  }
};

struct SceneParams {
  double gamma = 1.0;         // pressure scale (Pa per unit source)
  std::vector<double> beta;   // per-point optical scale; empty means all 1
  double noise_std = 0.0;     // i.i.d. Gaussian noise per sample

  void validate(std::size_t n_points) const {
    if (!(gamma > 0.0)) throw InvalidSignal("scene gamma must be positive");
    if (!(noise_std >= 0.0)) throw InvalidSignal("scene noise_std must be >= 0");
    if (!beta.empty() && beta.size() != n_points) {
      throw ShapeMismatch("scene beta has " + std::to_string(beta.size()) +
                          " entries, mode set has " + std::to_string(n_points) + " points");
    }
    for (double b : beta) {
      if (!(b > 0.0)) throw InvalidSignal("scene beta must be positive");
    }
  }

  double beta_at(std::size_t n) const { return beta.empty() ? 1.0 : beta[n]; }
};

// G(f) = alpha / (-w^2 + j 2 zeta w_k w + w_k^2), w = 2 pi f.
inline Complex modal_transfer(double freq_hz, double natural_freq, double damping_ratio,
                              double coupling) {
  const double w = 2.0 * kPi * freq_hz;
  const double wk = 2.0 * kPi * natural_freq;
  return coupling / Complex(wk * wk - w * w, 2.0 * damping_ratio * wk * w);
}

inline std::vector<Complex> transfer_function(const Mode& mode, std::span<const double> freqs) {
  std::vector<Complex> out;
  out.reserve(freqs.size());
  for (double f : freqs) {
    out.push_back(modal_transfer(f, mode.natural_freq, mode.damping_ratio, mode.coupling));
  }
  return out;
}

// Transfer function sampled on the one-sided DFT grid of `length` samples.
// For even lengths the Nyquist bin keeps only its real part, the value a real
// impulse response of that length can represent.
inline std::vector<Complex> dft_transfer(double natural_freq, double damping_ratio, double coupling,
                                         std::size_t length, double sample_rate) {
  std::vector<Complex> g(length / 2 + 1);
  const double df = sample_rate / static_cast<double>(length);
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] = modal_transfer(static_cast<double>(k) * df, natural_freq, damping_ratio, coupling);
  }
  if (length % 2 == 0) g.back() = Complex(g.back().real(), 0.0);
  return g;
}

inline std::vector<Complex> dft_transfer(const Mode& mode, std::size_t length, double sample_rate) {
  return dft_transfer(mode.natural_freq, mode.damping_ratio, mode.coupling, length, sample_rate);
}

inline void check_below_nyquist(double natural_freq, double sample_rate) {
  if (!(natural_freq < sample_rate / 2.0)) {
    throw AliasError("mode at " + std::to_string(natural_freq) + " Hz is not below Nyquist (" +
                     std::to_string(sample_rate / 2.0) + " Hz)");
  }
}

// Impulse response g_k of `length` samples: the inverse DFT of the sampled
// transfer function. Units follow the transfer function (per second^2);
// a discrete-time unit impulse input produces this sequence.
inline std::vector<double> impulse_response(const Mode& mode, std::size_t length, double sample_rate) {
  if (length < 2) throw InvalidSignal("impulse_response: length must be >= 2");
  check_below_nyquist(mode.natural_freq, sample_rate);
  Spectrum g;
  g.bins = dft_transfer(mode, length, sample_rate);
  g.source_length = length;
  g.freq_resolution = sample_rate / static_cast<double>(length);
  return ifft_real(g);
}

// Per-channel RMS of a grid averaged in power over all channels.
inline double grid_rms(const VibrationGrid& grid) {
  double acc = 0.0;
  for (double v : grid.data()) acc += v * v;
  return grid.data().empty() ? 0.0 : std::sqrt(acc / static_cast<double>(grid.data().size()));
}

// Noise standard deviation giving the requested per-channel SNR (dB),
// relative to the mean channel power of a clean grid.
inline double noise_std_for_snr(const VibrationGrid& clean, double snr_db) {
  return grid_rms(clean) * std::pow(10.0, -snr_db / 20.0);
}

inline void add_gaussian_noise(VibrationGrid& grid, double noise_std, std::uint64_t seed) {
  if (noise_std <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_std);
  for (double& v : grid.data()) v += dist(rng);
}

inline VibrationGrid synthesize(const SoundSignal& source, const ModeSet& modeset,
                                const SceneParams& scene, std::uint64_t seed) {
  source.validate();
  if (source.size() < 2) throw InvalidSignal("synthesize: source needs at least 2 samples");
  modeset.validate();
  scene.validate(modeset.n_points);
  const double fs = source.sample_rate;
  const std::size_t T = source.size();
  for (const auto& m : modeset.modes) check_below_nyquist(m.natural_freq, fs);

  const auto S = rfft(source.samples);
  std::vector<std::vector<double>> responses;
  responses.reserve(modeset.size());
  for (const auto& m : modeset.modes) {
    auto spec = dft_transfer(m, T, fs);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= S[k];
    responses.push_back(irfft(spec, T));
  }

  VibrationGrid grid(modeset.n_points, T, source.sample_rate);
  if (!modeset.point_coords.empty()) grid.coords() = modeset.point_coords;
  grid.set_dims(modeset.dims);
  for (std::size_t n = 0; n < modeset.n_points; ++n) {
    for (std::size_t a = 0; a < 2; ++a) {
      auto out = grid.channel(n, a);
      for (std::size_t k = 0; k < modeset.size(); ++k) {
        // (shape * beta) * gamma: a beta folded into the shape gives the
        // same bits.
        const double w = modeset.modes[k].shape_grad[n][a] * scene.beta_at(n) * scene.gamma;
        if (w == 0.0) continue;
        const auto& y = responses[k];
        for (std::size_t t = 0; t < T; ++t) out[t] += w * y[t];
      }
    }
  }
  add_gaussian_noise(grid, scene.noise_std, seed);
  return grid;
}

// ---------------------------------------------------------------------------
// Analytic ground truth: simply supported rectangular plate.
// ---------------------------------------------------------------------------

struct PlateSpec {
  std::size_t max_m = 6;           // largest index along x
  std::size_t max_n = 6;           // largest index along y
  GridDims grid{10, 10};           // measurement grid (rows along y, cols along x)
  std::size_t mode_count = 5;
  double f_base = 100.0;           // Hz
  double damping = 0.01;
  double length_x = 1.0;
  double length_y = 1.0;
  // Measured window as fractions of the plate, [x0, x1] x [y0, y1]; points
  // sit at cell centres of a rows x cols partition of the window.
  double window_x0 = 0.0, window_x1 = 1.0;
  double window_y0 = 0.0, window_y1 = 1.0;
};

// Plate eigenfunctions phi_mn = sin(m pi x / Lx) sin(n pi y / Ly) with
// f_mn = f_base ((m / Lx)^2 + (n / Ly)^2), lowest mode_count kept. Equal
// frequencies are separated by a relative 1e-4 step to keep the order strict.
// Points are numbered row-major (row = y index, col = x index).
inline ModeSet analytic_plate_modes(const PlateSpec& spec) {
  if (!spec.grid.structured()) throw ShapeMismatch("plate grid dims must be positive");
  if (spec.mode_count < 1) throw InvalidSignal("plate mode_count must be >= 1");
  if (spec.mode_count > spec.max_m * spec.max_n) {
    throw InvalidSignal("plate mode_count exceeds available (m, n) pairs");
  }
  struct Index {
    double f;
    std::size_t m, n;
  };
  std::vector<Index> idx;
  for (std::size_t m = 1; m <= spec.max_m; ++m) {
    for (std::size_t n = 1; n <= spec.max_n; ++n) {
      const double rx = static_cast<double>(m) / spec.length_x;
      const double ry = static_cast<double>(n) / spec.length_y;
      idx.push_back({spec.f_base * (rx * rx + ry * ry), m, n});
    }
  }
  std::stable_sort(idx.begin(), idx.end(), [](const Index& a, const Index& b) {
    return std::tie(a.f, a.m, a.n) < std::tie(b.f, b.m, b.n);
  });
  idx.resize(spec.mode_count);
  for (std::size_t k = 1; k < idx.size(); ++k) {
    if (!(idx[k].f > idx[k - 1].f)) idx[k].f = idx[k - 1].f * (1.0 + 1e-4);
  }

  ModeSet set;
  set.dims = spec.grid;
  set.n_points = spec.grid.count();
  set.point_coords.resize(set.n_points);
  for (std::size_t r = 0; r < spec.grid.rows; ++r) {
    for (std::size_t c = 0; c < spec.grid.cols; ++c) {
      const double fx = spec.window_x0 + (spec.window_x1 - spec.window_x0) *
                                             (static_cast<double>(c) + 0.5) /
                                             static_cast<double>(spec.grid.cols);
      const double fy = spec.window_y0 + (spec.window_y1 - spec.window_y0) *
                                             (static_cast<double>(r) + 0.5) /
                                             static_cast<double>(spec.grid.rows);
      set.point_coords[r * spec.grid.cols + c] = {fx * spec.length_x, fy * spec.length_y};
    }
  }
  for (const auto& e : idx) {
    Mode mode;
    mode.natural_freq = e.f;
    mode.damping_ratio = spec.damping;
    mode.coupling = 1.0;
    const double kx = static_cast<double>(e.m) * kPi / spec.length_x;
    const double ky = static_cast<double>(e.n) * kPi / spec.length_y;
    mode.shape_grad.reserve(set.n_points);
    for (const auto& p : set.point_coords) {
      mode.shape_grad.push_back({kx * std::cos(kx * p[0]) * std::sin(ky * p[1]),
                                 ky * std::sin(kx * p[0]) * std::cos(ky * p[1])});
    }
    set.modes.push_back(std::move(mode));
  }
  return set;
}

}  // namespace vibrec
