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

// Real-input FFTs backed by FFTW. Plans are created once per length with
// FFTW_ESTIMATE (deterministic) and executed on private aligned buffers, so
// the functions here are safe to call concurrently.

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "vibrec/types.hpp"

namespace vibrec {

namespace detail {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(std::max<std::size_t>(bytes, 16))) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  double* real() { return static_cast<double*>(ptr); }
  fftw_complex* complex() { return static_cast<fftw_complex*>(ptr); }

  void* ptr;
};

class RealFftPlan {
 public:
  explicit RealFftPlan(std::size_t n) : n_(n) {
    const int len = static_cast<int>(n);
    FftwBuffer in(sizeof(double) * n);
    FftwBuffer out(sizeof(fftw_complex) * (n / 2 + 1));
    forward_ = fftw_plan_dft_r2c_1d(len, in.real(), out.complex(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(len, out.complex(), in.real(), FFTW_ESTIMATE);
    if (forward_ == nullptr || inverse_ == nullptr) throw Error("FFTW planning failed");
  }
  ~RealFftPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFftPlan(const RealFftPlan&) = delete;
  RealFftPlan& operator=(const RealFftPlan&) = delete;

  // Unnormalized forward transform, bins 0..n/2.
  void forward(std::span<const double> x, std::span<Complex> out) const {
    FftwBuffer in(sizeof(double) * n_);
    FftwBuffer spec(sizeof(fftw_complex) * (n_ / 2 + 1));
    std::memcpy(in.real(), x.data(), sizeof(double) * n_);
    fftw_execute_dft_r2c(forward_, in.real(), spec.complex());
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      out[k] = Complex(spec.complex()[k][0], spec.complex()[k][1]);
    }
  }

  // Inverse transform including the 1/n normalization. Imaginary parts of
  // the DC and (even n) Nyquist bins are ignored.
  void inverse(std::span<const Complex> bins, std::span<double> out) const {
    FftwBuffer spec(sizeof(fftw_complex) * (n_ / 2 + 1));
    FftwBuffer res(sizeof(double) * n_);
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      spec.complex()[k][0] = bins[k].real();
      spec.complex()[k][1] = bins[k].imag();
    }
    fftw_execute_dft_c2r(inverse_, spec.complex(), res.real());
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t t = 0; t < n_; ++t) out[t] = res.real()[t] * scale;
  }

  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline const RealFftPlan& real_plan(std::size_t n) {
  // FFTW's planner is not thread-safe; execution on distinct buffers is.
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<RealFftPlan>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFftPlan>(n);
  return *slot;
}

}  // namespace detail

// Raw one-sided transform without validation, for internal hot loops.
inline std::vector<Complex> rfft(std::span<const double> x) {
  std::vector<Complex> out(x.size() / 2 + 1);
  detail::real_plan(x.size()).forward(x, out);
  return out;
}

// Raw inverse of `rfft` for an output of `n` samples.
inline std::vector<double> irfft(std::span<const Complex> bins, std::size_t n) {
  if (bins.size() != n / 2 + 1) throw ShapeMismatch("irfft: bin count does not match length");
  std::vector<double> out(n);
  detail::real_plan(n).inverse(bins, out);
  return out;
}

// Smallest 2^a 3^b 5^c 7^d >= n; FFTW is fastest on such sizes.
inline std::size_t fast_fft_length(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

inline Spectrum fft_forward(std::span<const double> signal, double sample_rate = 1.0) {
  if (signal.size() < 2) throw InvalidSignal("fft_forward: need at least 2 samples");
  if (!all_finite(signal)) throw InvalidSignal("fft_forward: non-finite sample");
  if (!(sample_rate > 0.0)) throw InvalidSignal("fft_forward: sample_rate must be positive");
  Spectrum s;
  s.source_length = signal.size();
  s.freq_resolution = sample_rate / static_cast<double>(signal.size());
  s.bins = rfft(signal);
  return s;
}

inline Spectrum fft_forward(const SoundSignal& signal) {
  signal.validate();
  return fft_forward(signal.samples, static_cast<double>(signal.sample_rate));
}

inline std::vector<double> ifft_real(const Spectrum& spectrum) {
  const std::size_t n = spectrum.source_length;
  if (n < 2 || spectrum.bins.size() != n / 2 + 1) {
    throw ShapeMismatch("ifft_real: expected " + std::to_string(n / 2 + 1) + " bins, got " +
                        std::to_string(spectrum.bins.size()));
  }
  double peak = 1.0;
  for (const auto& b : spectrum.bins) peak = std::max(peak, std::abs(b));
  const double tol = 1e-9 * peak;
  if (std::abs(spectrum.bins.front().imag()) > tol ||
      (n % 2 == 0 && std::abs(spectrum.bins.back().imag()) > tol)) {
    throw InvalidSignal("ifft_real: DC/Nyquist bins must be real for a real signal");
  }
  return irfft(spectrum.bins, n);
}

// Weight of a one-sided bin in Parseval's sum: 1 for DC and even-length
// Nyquist, 2 otherwise.
inline double one_sided_weight(std::size_t bin, std::size_t n) {
  if (bin == 0) return 1.0;
  if (n % 2 == 0 && bin == n / 2) return 1.0;
  return 2.0;
}

// Time-domain energy sum(x^2) recovered from a one-sided spectrum.
inline double spectral_energy(const Spectrum& s) {
  double e = 0.0;
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    e += one_sided_weight(k, s.source_length) * std::norm(s.bins[k]);
  }
  return e / static_cast<double>(s.source_length);
}

// Circular convolution of two equal-length real sequences.
inline std::vector<double> circular_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("circular_convolve: length mismatch");
  auto fa = rfft(a);
  const auto fb = rfft(b);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  return irfft(fa, a.size());
}

// Full linear convolution (length a + b - 1) via zero-padded FFT.
inline std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = fast_fft_length(out_len);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  auto fa = rfft(pa);
  const auto fb = rfft(pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  auto out = irfft(fa, n);
  out.resize(out_len);
  return out;
}

}  // namespace vibrec
