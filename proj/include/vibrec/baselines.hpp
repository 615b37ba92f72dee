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

// Reference recovery methods: single channel, plain average, delay-and-sum,
// and per-channel inverse filters estimated from a calibration recording.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vibrec/dsp.hpp"
#include "vibrec/extraction.hpp"
#include "vibrec/fft.hpp"
#include "vibrec/types.hpp"

namespace vibrec {

// Scales to unit peak |amplitude|.
inline SoundSignal peak_normalized(std::vector<double> x, int sample_rate) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw ZeroSignal("output is identically zero");
  for (double& v : x) v /= peak;
  return {std::move(x), sample_rate};
}

inline SoundSignal single_point(const VibrationGrid& grid, std::size_t point, std::size_t axis) {
  grid.validate();
  grid.check_channel({point, axis});
  const auto ch = grid.channel(point, axis);
  return peak_normalized({ch.begin(), ch.end()}, grid.sample_rate());
}

namespace detail {

// Mean over channels after advancing channel c by delays[c].
inline std::vector<double> shifted_mean(const VibrationGrid& grid, std::span<const long> delays) {
  const std::size_t T = grid.n_samples();
  std::vector<double> acc(T, 0.0);
  for (std::size_t c = 0; c < grid.n_channels(); ++c) {
    const auto ch = grid.channel(c);
    const long d = delays[c];
    for (std::size_t t = 0; t < T; ++t) {
      const long src = static_cast<long>(t) + d;
      if (src >= 0 && src < static_cast<long>(T)) acc[t] += ch[static_cast<std::size_t>(src)];
    }
  }
  const double inv = 1.0 / static_cast<double>(grid.n_channels());
  for (double& v : acc) v *= inv;
  return acc;
}

}  // namespace detail

// Mean of all 2N channels before normalization.
inline std::vector<double> channel_mean(const VibrationGrid& grid) {
  const std::vector<long> zero(grid.n_channels(), 0);
  return detail::shifted_mean(grid, zero);
}

inline SoundSignal average_all(const VibrationGrid& grid) {
  grid.validate();
  return peak_normalized(channel_mean(grid), grid.sample_rate());
}

// Per-channel integer delays d_c such that channel c at t + d_c lines up
// with the reference at t. Silent channels get 0.
inline std::vector<long> channel_delays(const VibrationGrid& grid, Channel reference, std::size_t max_lag) {
  grid.validate();
  grid.check_channel(reference);
  if (2 * max_lag >= grid.n_samples()) throw InvalidSignal("delay_and_sum: max_lag must be < T/2");
  const auto ref = grid.channel(reference);
  if (is_silent(ref)) throw ZeroSignal("delay_and_sum: reference channel is silent");
  std::vector<long> delays(grid.n_channels(), 0);
  for (std::size_t c = 0; c < grid.n_channels(); ++c) {
    const auto ch = grid.channel(c);
    if (is_silent(ch)) continue;
    delays[c] = best_integer_delay(ref, ch, max_lag);
  }
  return delays;
}

inline std::vector<double> delay_and_sum_raw(const VibrationGrid& grid, Channel reference, std::size_t max_lag) {
  const auto delays = channel_delays(grid, reference, max_lag);
  return detail::shifted_mean(grid, delays);
}

inline SoundSignal delay_and_sum(const VibrationGrid& grid, Channel reference, std::size_t max_lag) {
  return peak_normalized(delay_and_sum_raw(grid, reference, max_lag), grid.sample_rate());
}

inline SoundSignal delay_and_sum(const VibrationGrid& grid, std::size_t max_lag) {
  return delay_and_sum(grid, select_reference(grid), max_lag);
}

// Per-channel FIR inverse filters. Tap i acts at time offset i - taps/2, so
// the filters may advance as well as delay.
struct FilterBank {
  std::size_t n_points = 0;
  std::size_t taps = 0;
  int sample_rate = 0;
  std::vector<double> filters;  // channel-major, 2N x taps
  std::vector<bool> silent;     // channels that got an all-zero filter
  std::vector<std::string> warnings;

  FilterBank() = default;
  FilterBank(std::size_t points, std::size_t n_taps, int fs)
      : n_points(points), taps(n_taps), sample_rate(fs), filters(2 * points * n_taps, 0.0),
        silent(2 * points, false) {}

  std::size_t offset() const { return taps / 2; }
  std::size_t n_channels() const { return 2 * n_points; }
  std::span<double> filter(std::size_t c) { return {filters.data() + c * taps, taps}; }
  std::span<const double> filter(std::size_t c) const { return {filters.data() + c * taps, taps}; }

  static FilterBank identity(std::size_t points, std::size_t n_taps, int fs) {
    FilterBank b(points, n_taps, fs);
    for (std::size_t c = 0; c < b.n_channels(); ++c) b.filter(c)[b.offset()] = 1.0;
    return b;
  }

  void validate() const {
    if (taps < 1) throw InvalidSignal("filter bank needs at least one tap");
    if (sample_rate <= 0) throw InvalidSignal("filter bank sample_rate must be positive");
    if (filters.size() != 2 * n_points * taps) throw ShapeMismatch("filter bank payload size mismatch");
    if (!all_finite(filters)) throw InvalidSignal("filter bank contains non-finite taps");
  }
};

// Solves the symmetric Toeplitz system T x = y, T_ij = r[|i - j|], by
// Levinson recursion in O(n^2).
inline std::vector<double> levinson_solve(std::span<const double> r, std::span<const double> y) {
  const std::size_t n = y.size();
  if (r.size() < n) throw ShapeMismatch("levinson: autocorrelation shorter than system");
  if (n == 0) return {};
  if (!(r[0] > 0.0)) throw InvalidSignal("levinson: matrix is not positive definite");
  std::vector<double> f{1.0 / r[0]};  // forward vector; backward is its reverse
  std::vector<double> x{y[0] / r[0]};
  f.reserve(n);
  x.reserve(n);
  std::vector<double> nf;
  nf.reserve(n);
  for (std::size_t m = 1; m < n; ++m) {
    double ef = 0.0;  // error of the extended forward vector
    for (std::size_t i = 0; i < m; ++i) ef += r[m - i] * f[i];
    const double den = 1.0 - ef * ef;
    if (!(den > 0.0)) throw InvalidSignal("levinson: matrix is not positive definite");
    // f_new = (f ; 0 - ef (0 ; reverse f)) / den
    nf.assign(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) nf[i] += f[i];
    for (std::size_t i = 0; i < m; ++i) nf[i + 1] -= ef * f[m - 1 - i];
    for (double& v : nf) v /= den;
    f.swap(nf);
    double ex = 0.0;
    for (std::size_t i = 0; i < m; ++i) ex += r[m - i] * x[i];
    const double c = y[m] - ex;
    x.push_back(0.0);
    // Backward vector of order m+1 is reverse(f).
    for (std::size_t i = 0; i <= m; ++i) x[i] += c * f[m - i];
  }
  return x;
}

// Least-squares inverse filter for each channel:
//
//   h = argmin || (v * h)[t + taps/2] - s[t] ||^2
//
// over the full linear convolution (v and s zero outside [0, T)), which makes
// the normal matrix Toeplitz in the autocorrelation of v. A ridge of 1e-8
// times the diagonal keeps narrowband channels solvable.
inline FilterBank estimate_inverse_filters(const VibrationGrid& ref_grid, const SoundSignal& ref_source,
                                           std::size_t taps) {
  ref_grid.validate();
  ref_source.validate();
  const std::size_t T = ref_grid.n_samples();
  if (ref_source.size() != T) throw ShapeMismatch("calibration source and grid lengths differ");
  if (ref_source.sample_rate != ref_grid.sample_rate()) throw ShapeMismatch("calibration sample rates differ");
  if (taps < 1 || taps > T / 4) throw InvalidSignal("taps must lie in [1, T/4]");

  FilterBank bank(ref_grid.n_points(), taps, ref_grid.sample_rate());
  const std::size_t D = bank.offset();
  const std::size_t L = fast_fft_length(2 * T);
  std::vector<double> pad(L, 0.0);
  std::copy(ref_source.samples.begin(), ref_source.samples.end(), pad.begin());
  const auto Sf = rfft(pad);

  for (std::size_t c = 0; c < ref_grid.n_channels(); ++c) {
    const auto v = ref_grid.channel(c);
    if (is_silent(v)) {
      bank.silent[c] = true;
      bank.warnings.push_back("channel " + std::to_string(c / 2) + "/" + std::to_string(c % 2) +
                              " is silent; filter set to zero");
      continue;
    }
    std::fill(pad.begin(), pad.end(), 0.0);
    std::copy(v.begin(), v.end(), pad.begin());
    const auto Vf = rfft(pad);
    std::vector<Complex> tmp(Vf.size());
    // r_vv[k] = sum_t v[t] v[t + k]
    for (std::size_t j = 0; j < Vf.size(); ++j) tmp[j] = std::norm(Vf[j]);
    const auto rvv = irfft(tmp, L);
    // x_sv[k] = sum_t s[t] v[t + k], circular index for negative k
    for (std::size_t j = 0; j < Vf.size(); ++j) tmp[j] = std::conj(Sf[j]) * Vf[j];
    const auto xsv = irfft(tmp, L);

    std::vector<double> r(rvv.begin(), rvv.begin() + static_cast<std::ptrdiff_t>(taps));
    r[0] *= 1.0 + 1e-8;
    // p_i = sum_t s[t] v[t + D - i]
    std::vector<double> p(taps);
    for (std::size_t i = 0; i < taps; ++i) {
      const long k = static_cast<long>(D) - static_cast<long>(i);
      p[i] = k >= 0 ? xsv[static_cast<std::size_t>(k)] : xsv[L - static_cast<std::size_t>(-k)];
    }
    const auto h = levinson_solve(r, p);
    std::copy(h.begin(), h.end(), bank.filter(c).begin());
  }
  return bank;
}

// Mean over channels of (v * h)[t + taps/2], before normalization.
inline std::vector<double> apply_calibrated_raw(const VibrationGrid& grid, const FilterBank& bank) {
  grid.validate();
  bank.validate();
  if (bank.n_points != grid.n_points()) throw ShapeMismatch("filter bank and grid disagree on point count");
  const std::size_t T = grid.n_samples();
  const std::size_t D = bank.offset();
  std::vector<double> acc(T, 0.0);
  for (std::size_t c = 0; c < grid.n_channels(); ++c) {
    const auto h = bank.filter(c);
    if (is_silent(h)) continue;
    const auto y = linear_convolve(grid.channel(c), h);
    for (std::size_t t = 0; t < T; ++t) acc[t] += y[t + D];
  }
  const double inv = 1.0 / static_cast<double>(grid.n_channels());
  for (double& v : acc) v *= inv;
  return acc;
}

inline SoundSignal apply_calibrated(const VibrationGrid& grid, const FilterBank& bank) {
  return peak_normalized(apply_calibrated_raw(grid, bank), grid.sample_rate());
}

}  // namespace vibrec
