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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vibrec/metrics.hpp"
#include "vibrec/signals.hpp"

namespace vibrec {
namespace {

constexpr int kRate = 22000;

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

double rms(const std::vector<double>& x) {
  double a = 0.0;
  for (double v : x) a += v * v;
  return std::sqrt(a / static_cast<double>(x.size()));
}

SoundSignal with_noise(const SoundSignal& s, double snr_db, std::uint64_t seed) {
  auto n = gaussian(s.size(), seed, rms(s.samples) * std::pow(10.0, -snr_db / 20.0));
  SoundSignal out = s;
  for (std::size_t t = 0; t < s.size(); ++t) out.samples[t] += n[t];
  return out;
}

// Direct evaluation of the distance from per-frame DFTs.
double brute_si_mr_stft(const std::vector<double>& c0, const std::vector<double>& r) {
  double cr = 0.0, cc = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    cr += c0[t] * r[t];
    cc += c0[t] * c0[t];
  }
  std::vector<double> c(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) c[t] = c0[t] * cr / cc;
  double total = 0.0;
  for (std::size_t w : {512u, 1024u, 2048u}) {
    const std::size_t hop = w / 4;
    double num = 0.0, den = 0.0, lm = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start + w <= r.size(); start += hop) {
      for (std::size_t k = 0; k <= w / 2; ++k) {
        Complex R(0.0, 0.0), C(0.0, 0.0);
        for (std::size_t i = 0; i < w; ++i) {
          const double win = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(w));
          const Complex e = std::polar(1.0, -2.0 * kPi * static_cast<double>(k * i % w) / static_cast<double>(w));
          R += win * r[start + i] * e;
          C += win * c[start + i] * e;
        }
        num += std::pow(std::abs(R) - std::abs(C), 2);
        den += std::norm(R);
        lm += std::abs(std::log(std::abs(R) + 1e-7) - std::log(std::abs(C) + 1e-7));
        ++count;
      }
    }
    total += std::sqrt(num / den) + lm / static_cast<double>(count);
  }
  return total / 3.0;
}

TEST(SiMrStft, MatchesBruteForce) {
  const auto r = gaussian(4096, 1);
  auto c = r;
  const auto n = gaussian(4096, 2, 0.5);
  for (std::size_t t = 0; t < c.size(); ++t) c[t] = 0.3 * c[t] + n[t];
  const auto rep = si_mr_stft({c, kRate}, {r, kRate});
  EXPECT_NEAR(rep.si_mr_stft, brute_si_mr_stft(c, r), 1e-9);
  ASSERT_EQ(rep.per_resolution.size(), 3u);
  double sum = 0.0;
  for (const auto& p : rep.per_resolution) sum += p.spectral_convergence + p.log_magnitude;
  EXPECT_DOUBLE_EQ(rep.si_mr_stft, sum / 3.0);
}

TEST(SiMrStft, IdentityAndScaleInvariance) {
  const auto s = music_like(1.0, kRate, 3);
  EXPECT_NEAR(si_mr_stft(s, s).si_mr_stft, 0.0, 1e-9);
  for (double a : {7.3, 0.01, 1e4}) {
    SoundSignal scaled = s;
    for (double& v : scaled.samples) v *= a;
    EXPECT_NEAR(si_mr_stft(scaled, s).si_mr_stft, 0.0, 1e-9) << a;
  }
}

TEST(SiMrStft, OrdersSnrLadder) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = music_like(1.0, kRate, seed);
    double prev = -1.0;
    for (double snr : {30.0, 20.0, 10.0, 0.0}) {
      const double d = si_mr_stft(with_noise(s, snr, 100 + seed), s).si_mr_stft;
      EXPECT_GT(d, prev) << seed << " " << snr;
      prev = d;
    }
  }
}

TEST(SiMrStft, Errors) {
  const auto s = music_like(0.5, kRate, 4);
  EXPECT_THROW(si_mr_stft(s, {std::vector<double>(s.size(), 0.0), kRate}), DegenerateReference);
  EXPECT_THROW(si_mr_stft({s.samples, 44100}, s), ShapeMismatch);
  EXPECT_THROW(si_mr_stft({std::vector<double>(100, 1.0), kRate}, {std::vector<double>(100, 1.0), kRate}),
               InvalidSignal);
}

TEST(SiMrStft, TrimsToShorter) {
  const auto s = music_like(1.0, kRate, 5);
  SoundSignal longer = s;
  longer.samples.resize(s.size() + 5000, 0.3);
  EXPECT_NEAR(si_mr_stft(longer, s).si_mr_stft, 0.0, 1e-9);
}

TEST(AlignedCorrelation, SignAndLag) {
  const auto r = gaussian(5000, 6);
  auto neg = r;
  for (double& v : neg) v = -v;
  const auto a = aligned_correlation(neg, r, 100);
  EXPECT_NEAR(a.magnitude(), 1.0, 1e-12);
  EXPECT_EQ(a.sign(), -1);
  EXPECT_EQ(a.lag, 0);
  const auto shifted = vibrec::advance(r, -13);  // shifted[t] = r[t - 13]
  const auto b = aligned_correlation(shifted, r, 100);
  EXPECT_NEAR(b.correlation, 1.0, 1e-12);
  EXPECT_EQ(b.lag, 13);
  EXPECT_THROW(aligned_correlation(std::vector<double>(10, 0.0), r, 3), ZeroSignal);
}

TEST(AlignedCorrelation, IndependentNoiseIsSmall) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = gaussian(22000, 2 * seed + 1000), b = gaussian(22000, 2 * seed + 1001);
    if (aligned_correlation(a, b, 0).magnitude() < 0.05) ++ok;
  }
  EXPECT_GE(ok, 95);
}

TEST(AlignedCorrelation, ReportedInMetricReport) {
  const auto s = music_like(1.0, kRate, 7);
  SoundSignal shifted{vibrec::advance(s.samples, -40), kRate};
  const auto rep = si_mr_stft(shifted, s);
  EXPECT_EQ(rep.best_lag, 40);
  EXPECT_GT(rep.max_xcorr, 0.99);
}

}  // namespace
}  // namespace vibrec
