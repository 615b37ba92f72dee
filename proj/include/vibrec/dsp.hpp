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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vibrec/fft.hpp"
#include "vibrec/types.hpp"

namespace vibrec {

// ---------------------------------------------------------------------------
// Butterworth band-pass
// ---------------------------------------------------------------------------

// Second-order section, b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  Complex response(Complex z) const {
    const Complex zi = 1.0 / z;
    return (b0 + b1 * zi + b2 * zi * zi) / (1.0 + a1 * zi + a2 * zi * zi);
  }
};

// Digital Butterworth band-pass of the given prototype order, as order
// biquads. The analog prototype is mapped with the bilinear transform after
// pre-warping the band edges, and the gain is normalized to unity at the
// (digital) geometric centre frequency.
inline std::vector<Biquad> butterworth_bandpass(double sample_rate, double low, double high,
                                                int order) {
  if (order < 1) throw InvalidBand("bandpass order must be >= 1");
  if (!(low > 0.0 && low < high && high < sample_rate / 2.0)) {
    throw InvalidBand("bandpass edges must satisfy 0 < low < high < fs/2 (got " +
                      std::to_string(low) + ", " + std::to_string(high) + ")");
  }
  const double fs2 = 2.0 * sample_rate;
  const double w1 = fs2 * std::tan(kPi * low / sample_rate);
  const double w2 = fs2 * std::tan(kPi * high / sample_rate);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);

  std::vector<Complex> poles;
  poles.reserve(2 * order);
  for (int m = -order + 1; m < order; m += 2) {
    const Complex proto = -std::exp(Complex(0.0, kPi * m / (2.0 * order)));
    const Complex half = proto * bw / 2.0;
    const Complex disc = std::sqrt(half * half - w0 * w0);
    for (const Complex& s : {half + disc, half - disc}) {
      poles.push_back((fs2 + s) / (fs2 - s));
    }
  }

  std::vector<Complex> upper;
  std::vector<double> real;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) < 1e-12 * std::max(1.0, std::abs(p))) {
      real.push_back(p.real());
    } else if (p.imag() > 0.0) {
      upper.push_back(p);
    }
  }
  std::sort(real.begin(), real.end());
  if (upper.size() * 2 + real.size() != poles.size() || real.size() % 2 != 0) {
    throw InvalidBand("bandpass design produced an unpaired pole");
  }

  // Every section carries one zero at z = 1 and one at z = -1.
  std::vector<Biquad> sections;
  for (const auto& p : upper) {
    sections.push_back({1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
  }
  for (std::size_t i = 0; i < real.size(); i += 2) {
    sections.push_back({1.0, 0.0, -1.0, -(real[i] + real[i + 1]), real[i] * real[i + 1]});
  }

  const double omega0 = 2.0 * std::atan(w0 / fs2);
  const Complex z0 = std::exp(Complex(0.0, omega0));
  Complex h(1.0, 0.0);
  for (const auto& s : sections) h *= s.response(z0);
  const double g = 1.0 / std::abs(h);
  sections.front().b0 *= g;
  sections.front().b1 *= g;
  sections.front().b2 *= g;
  return sections;
}

// Causal cascade, transposed direct form II, zero initial state.
inline void sos_filter_inplace(std::span<const Biquad> sections, std::span<double> x) {
  for (const auto& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

// Zero-phase (forward-backward) band-pass. The signal is extended at both
// ends by point reflection so the start-up transient decays before the data.
inline std::vector<double> bandpass(std::span<const double> signal, double sample_rate, double low,
                                    double high, int order) {
  const auto sections = butterworth_bandpass(sample_rate, low, high, order);
  if (!all_finite(signal)) throw InvalidSignal("bandpass: non-finite sample");
  const std::size_t n = signal.size();
  if (n < 2) return {signal.begin(), signal.end()};

  const auto wanted = static_cast<std::size_t>(std::ceil(10.0 * sample_rate / low));
  const std::size_t pad = std::min(n - 1, wanted);
  std::vector<double> ext(n + 2 * pad);
  const double first = signal.front();
  const double last = signal.back();
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * first - signal[pad - i];
    ext[pad + n + i] = 2.0 * last - signal[n - 2 - i];
  }
  std::copy(signal.begin(), signal.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  sos_filter_inplace(sections, ext);
  std::reverse(ext.begin(), ext.end());
  sos_filter_inplace(sections, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

inline VibrationGrid bandpass_grid(const VibrationGrid& grid, double low, double high, int order) {
  VibrationGrid out = grid;
  const double fs = grid.sample_rate();
  for (std::size_t c = 0; c < grid.n_channels(); ++c) {
    const auto filtered = bandpass(grid.channel(c), fs, low, high, order);
    std::copy(filtered.begin(), filtered.end(), out.channel(c).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Savitzky-Golay smoothing
// ---------------------------------------------------------------------------

namespace detail {

// Weights w such that sum_j w[j] * y[j] evaluates, at offset `at` (sample
// units from the window start), the least-squares polynomial of degree
// `order` through y[0..window).
inline std::vector<double> savgol_weights(std::size_t window, int order, double at) {
  const std::size_t p = static_cast<std::size_t>(order) + 1;
  const double centre = (static_cast<double>(window) - 1.0) / 2.0;
  const double scale = std::max(centre, 1.0);
  auto basis = [&](double x, std::size_t k) { return std::pow((x - centre) / scale, k); };

  // Normal matrix A^T A (p x p), then solve (A^T A) c = phi(at).
  std::vector<double> ata(p * p, 0.0);
  for (std::size_t j = 0; j < window; ++j) {
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        ata[r * p + c] += basis(static_cast<double>(j), r) * basis(static_cast<double>(j), c);
      }
    }
  }
  std::vector<double> rhs(p);
  for (std::size_t r = 0; r < p; ++r) rhs[r] = basis(at, r);
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(ata[r * p + col]) > std::abs(ata[piv * p + col])) piv = r;
    }
    for (std::size_t c = 0; c < p; ++c) std::swap(ata[col * p + c], ata[piv * p + c]);
    std::swap(rhs[col], rhs[piv]);
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = ata[r * p + col] / ata[col * p + col];
      for (std::size_t c = col; c < p; ++c) ata[r * p + c] -= f * ata[col * p + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> coef(p);
  for (std::size_t i = p; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t c = i + 1; c < p; ++c) acc -= ata[i * p + c] * coef[c];
    coef[i] = acc / ata[i * p + i];
  }
  std::vector<double> w(window, 0.0);
  for (std::size_t j = 0; j < window; ++j) {
    for (std::size_t k = 0; k < p; ++k) w[j] += coef[k] * basis(static_cast<double>(j), k);
  }
  return w;
}

}  // namespace detail

// Window length in samples for a window given in Hz: rounded, at least
// poly_order + 1, and forced odd.
inline std::size_t savgol_window_samples(double window_hz, double freq_resolution, int poly_order) {
  if (!(freq_resolution > 0.0) || !(window_hz > 0.0) || poly_order < 0) {
    throw InvalidWindow("savgol: window and resolution must be positive");
  }
  auto w = static_cast<std::size_t>(std::llround(window_hz / freq_resolution));
  w = std::max<std::size_t>(w, static_cast<std::size_t>(poly_order) + 1);
  if (w % 2 == 0) ++w;
  return w;
}

// Savitzky-Golay smoothing. The edges use the polynomial fitted to the first
// (last) full window, so every polynomial of degree <= poly_order passes
// through unchanged.
inline std::vector<double> savgol_smooth(std::span<const double> values, double window_hz,
                                         double freq_resolution, int poly_order = 2) {
  const std::size_t window = savgol_window_samples(window_hz, freq_resolution, poly_order);
  const std::size_t n = values.size();
  if (window > n) {
    throw InvalidWindow("savgol: window of " + std::to_string(window) +
                        " samples exceeds sequence length " + std::to_string(n));
  }
  const std::size_t half = window / 2;
  std::vector<double> out(n, 0.0);
  const auto centre = detail::savgol_weights(window, poly_order, static_cast<double>(half));
  for (std::size_t i = half; i + half < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < window; ++j) acc += centre[j] * values[i - half + j];
    out[i] = acc;
  }
  for (std::size_t i = 0; i < half; ++i) {
    const auto head = detail::savgol_weights(window, poly_order, static_cast<double>(i));
    const auto tail = detail::savgol_weights(window, poly_order, static_cast<double>(window - half + i));
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < window; ++j) {
      a += head[j] * values[j];
      b += tail[j] * values[n - window + j];
    }
    out[i] = a;
    out[n - half + i] = b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Peak finding
// ---------------------------------------------------------------------------

// Local maxima; flat tops report their middle sample.
inline std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  const std::size_t n = x.size();
  if (n < 3) return peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return peaks;
}

// Topographic prominence of a local maximum: its height above the higher of
// the lowest points on either side before reaching a higher sample.
inline double peak_prominence(std::span<const double> x, std::size_t peak) {
  const double h = x[peak];
  double left_min = h;
  for (std::size_t i = peak + 1; i-- > 0;) {
    if (x[i] > h) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = h;
  for (std::size_t i = peak; i < x.size(); ++i) {
    if (x[i] > h) break;
    right_min = std::min(right_min, x[i]);
  }
  return h - std::max(left_min, right_min);
}

// Peak picking in the manner of scipy.signal.find_peaks: local maxima, then
// the minimum-distance rule (higher peaks win), then the prominence test.
inline PeakList find_peaks(std::span<const double> values, double min_prominence,
                           std::size_t min_distance_bins, double freq_resolution = 1.0) {
  if (!all_finite(values)) throw InvalidSignal("find_peaks: non-finite value");
  auto peaks = local_maxima(values);

  if (min_distance_bins > 1 && peaks.size() > 1) {
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[peaks[a]] > values[peaks[b]];
    });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t j : order) {
      if (!keep[j]) continue;
      for (std::size_t k = j; k-- > 0 && peaks[j] - peaks[k] < min_distance_bins;) keep[k] = false;
      for (std::size_t k = j + 1; k < peaks.size() && peaks[k] - peaks[j] < min_distance_bins; ++k) {
        keep[k] = false;
      }
    }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < peaks.size(); ++j) {
      if (keep[j]) kept.push_back(peaks[j]);
    }
    peaks = std::move(kept);
  }

  PeakList out;
  for (std::size_t p : peaks) {
    const double prom = peak_prominence(values, p);
    if (prom >= min_prominence) {
      out.indices.push_back(p);
      out.frequencies.push_back(static_cast<double>(p) * freq_resolution);
      out.prominences.push_back(prom);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-correlation
// ---------------------------------------------------------------------------

// Normalized cross-correlation r[d] = <a[t], b[t + d]> / (|a| |b|) over the
// overlapping samples, for d in [-max_lag, max_lag] (index d + max_lag).
inline std::vector<double> normalized_xcorr(std::span<const double> a, std::span<const double> b,
                                            std::size_t max_lag) {
  const std::size_t n = a.size();
  if (b.size() != n) throw ShapeMismatch("xcorr: sequences must have equal length");
  if (n < 2 || 2 * max_lag >= n) throw InvalidSignal("xcorr: max_lag must be < length / 2");

  const std::size_t m = fast_fft_length(2 * n);
  std::vector<double> pa(m, 0.0), pb(m, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  auto fa = rfft(pa);
  const auto fb = rfft(pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] = std::conj(fa[k]) * fb[k];
  const auto raw = irfft(fa, m);

  std::vector<double> ca(n + 1, 0.0), cb(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    ca[t + 1] = ca[t] + a[t] * a[t];
    cb[t + 1] = cb[t] + b[t] * b[t];
  }
  const auto lag_count = 2 * max_lag + 1;
  std::vector<double> r(lag_count, 0.0);
  for (std::size_t i = 0; i < lag_count; ++i) {
    const auto d = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(max_lag);
    double num, ea, eb;
    if (d >= 0) {
      const auto ud = static_cast<std::size_t>(d);
      num = raw[ud];
      ea = ca[n - ud];
      eb = cb[n] - cb[ud];
    } else {
      const auto ud = static_cast<std::size_t>(-d);
      num = raw[m - ud];
      ea = ca[n] - ca[ud];
      eb = cb[n - ud];
    }
    const double den = std::sqrt(ea * eb);
    r[i] = den > 0.0 ? num / den : 0.0;
  }
  return r;
}

inline bool is_silent(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

// Lag d maximizing the normalized cross-correlation, so that b[t] ~ a[t - d].
// Ties go to the smaller |d|.
inline long best_integer_delay(std::span<const double> a, std::span<const double> b,
                               std::size_t max_lag) {
  if (is_silent(a) || is_silent(b)) throw ZeroSignal("best_integer_delay: all-zero input");
  const auto r = normalized_xcorr(a, b, max_lag);
  const auto L = static_cast<long>(max_lag);
  long best = 0;
  double best_val = r[max_lag];
  for (long d = 1; d <= L; ++d) {
    for (long s : {-d, d}) {
      const double v = r[static_cast<std::size_t>(s + L)];
      if (v > best_val) {
        best_val = v;
        best = s;
      }
    }
  }
  return best;
}

// Shift with zero fill: out[t] = x[t + d].
inline std::vector<double> advance(std::span<const double> x, long d) {
  const auto n = static_cast<long>(x.size());
  std::vector<double> out(x.size(), 0.0);
  for (long t = 0; t < n; ++t) {
    const long src = t + d;
    if (src >= 0 && src < n) out[static_cast<std::size_t>(t)] = x[static_cast<std::size_t>(src)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// STFT
// ---------------------------------------------------------------------------

// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

// Hann-windowed frames without padding; frame f starts at f * hop.
inline ComplexMatrix stft(std::span<const double> signal, std::size_t window_len, std::size_t hop) {
  if (window_len < 2 || (window_len & (window_len - 1)) != 0) {
    throw InvalidWindow("stft: window length must be a power of two");
  }
  if (hop == 0 || hop > window_len) throw InvalidWindow("stft: hop must be in [1, window_len]");
  if (signal.size() < window_len) throw InvalidSignal("stft: signal shorter than window");
  const auto win = hann_window(window_len);
  ComplexMatrix out;
  out.rows = (signal.size() - window_len) / hop + 1;
  out.cols = window_len / 2 + 1;
  out.values.resize(out.rows * out.cols);
  std::vector<double> frame(window_len);
  for (std::size_t f = 0; f < out.rows; ++f) {
    for (std::size_t i = 0; i < window_len; ++i) frame[i] = signal[f * hop + i] * win[i];
    const auto bins = rfft(frame);
    std::copy(bins.begin(), bins.end(), out.values.begin() + static_cast<std::ptrdiff_t>(f * out.cols));
  }
  return out;
}

}  // namespace vibrec
