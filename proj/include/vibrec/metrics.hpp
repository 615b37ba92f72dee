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
#include <cmath>
#include <span>
#include <vector>

#include "vibrec/dsp.hpp"
#include "vibrec/types.hpp"

namespace vibrec {

struct ResolutionScore {
  std::size_t window = 0;
  double spectral_convergence = 0.0;
  double log_magnitude = 0.0;
};

struct MetricReport {
  double si_mr_stft = 0.0;
  double max_xcorr = 0.0;  // signed correlation at the best lag
  long best_lag = 0;
  std::vector<ResolutionScore> per_resolution;
};

inline const std::vector<std::size_t>& default_resolutions() {
  static const std::vector<std::size_t> r{512, 1024, 2048};
  return r;
}

namespace detail {

inline std::vector<double> stft_magnitude(std::span<const double> x, std::size_t window) {
  const auto m = stft(x, window, window / 4);
  std::vector<double> out(m.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(m.values[i]);
  return out;
}

}  // namespace detail

struct CorrelationResult {
  double correlation = 0.0;  // signed
  long lag = 0;              // candidate[t + lag] ~ reference[t]
  double magnitude() const { return std::abs(correlation); }
  int sign() const { return correlation < 0.0 ? -1 : 1; }
};

// Largest |normalized cross-correlation| over integer lags in
// [-max_lag, max_lag]; ties go to the smaller |lag|.
inline CorrelationResult aligned_correlation(std::span<const double> candidate,
                                             std::span<const double> reference, std::size_t max_lag) {
  const std::size_t n = std::min(candidate.size(), reference.size());
  const auto c = candidate.first(n);
  const auto r = reference.first(n);
  if (is_silent(c) || is_silent(r)) throw ZeroSignal("aligned_correlation: silent input");
  max_lag = std::min(max_lag, (n - 1) / 2);
  const auto xc = normalized_xcorr(r, c, max_lag);
  CorrelationResult best;
  const auto L = static_cast<long>(max_lag);
  best.correlation = xc[max_lag];
  for (long d = 1; d <= L; ++d) {
    for (long s : {-d, d}) {
      const double v = xc[static_cast<std::size_t>(s + L)];
      if (std::abs(v) > std::abs(best.correlation)) {
        best.correlation = v;
        best.lag = s;
      }
    }
  }
  return best;
}

// Scale-invariant multi-resolution STFT distance. The candidate is first
// projected onto the reference (optimal least-squares scalar), then for each
// window w (hop w/4, periodic Hann) the spectral convergence and mean
// log-magnitude distance are summed; the result averages over windows.
inline MetricReport si_mr_stft(const SoundSignal& candidate, const SoundSignal& reference,
                               std::span<const std::size_t> resolutions = default_resolutions(),
                               std::size_t max_lag = 2048) {
  candidate.validate();
  reference.validate();
  if (candidate.sample_rate != reference.sample_rate) {
    throw ShapeMismatch("si_mr_stft: sample rates differ");
  }
  if (resolutions.empty()) throw InvalidWindow("si_mr_stft: no resolutions given");
  const std::size_t n = std::min(candidate.size(), reference.size());
  std::span<const double> r(reference.samples.data(), n);
  std::span<const double> c0(candidate.samples.data(), n);
  if (is_silent(r)) throw DegenerateReference("si_mr_stft: reference is silent");

  double cr = 0.0, cc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    cr += c0[t] * r[t];
    cc += c0[t] * c0[t];
  }
  std::vector<double> c(n, 0.0);
  if (cc > 0.0) {
    const double a = cr / cc;
    for (std::size_t t = 0; t < n; ++t) c[t] = a * c0[t];
  }

  constexpr double kEps = 1e-7;
  MetricReport rep;
  for (std::size_t w : resolutions) {
    const auto R = detail::stft_magnitude(r, w);
    const auto C = detail::stft_magnitude(c, w);
    double num = 0.0, den = 0.0, lm = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) {
      num += (R[i] - C[i]) * (R[i] - C[i]);
      den += R[i] * R[i];
      lm += std::abs(std::log(R[i] + kEps) - std::log(C[i] + kEps));
    }
    ResolutionScore s;
    s.window = w;
    s.spectral_convergence = den > 0.0 ? std::sqrt(num) / std::sqrt(den) : 0.0;
    s.log_magnitude = lm / static_cast<double>(R.size());
    rep.per_resolution.push_back(s);
    rep.si_mr_stft += s.spectral_convergence + s.log_magnitude;
  }
  rep.si_mr_stft /= static_cast<double>(resolutions.size());
  if (!is_silent(c0)) {
    const auto corr = aligned_correlation(c0, r, max_lag);
    rep.max_xcorr = corr.correlation;
    rep.best_lag = corr.lag;
  }
  return rep;
}

}  // namespace vibrec
