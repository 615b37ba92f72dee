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

#include "../support/ode_oracle.hpp"
#include "vibrec/modal.hpp"
#include "vibrec/signals.hpp"

namespace vibrec {
namespace {

Mode make_mode(double f, double zeta, double alpha, std::size_t n_points = 0) {
  Mode m;
  m.natural_freq = f;
  m.damping_ratio = zeta;
  m.coupling = alpha;
  m.shape_grad.assign(n_points, Point2{0.0, 0.0});
  return m;
}

double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

TEST(ModalTransfer, DcAndResonance) {
  const double wk = 2.0 * kPi * 440.0;
  const auto dc = modal_transfer(0.0, 440.0, 0.02, 3.0);
  EXPECT_NEAR(dc.real(), 3.0 / (wk * wk), 1e-18);
  EXPECT_EQ(dc.imag(), 0.0);
  const auto res = modal_transfer(440.0, 440.0, 0.02, 3.0);
  EXPECT_NEAR(std::abs(res), 3.0 / (2.0 * 0.02 * wk * wk), 1e-15);
  EXPECT_NEAR(std::arg(res), -kPi / 2.0, 1e-12);
}

TEST(ModalTransfer, HighFrequencyAsymptote) {
  for (double fk : {100.0, 500.0, 2000.0}) {
    const double f = 10.0 * fk;
    const double w = 2.0 * kPi * f;
    EXPECT_NEAR(std::abs(modal_transfer(f, fk, 0.01, 1.0)) * w * w, 1.0, 0.02);
  }
}

// The displacement response peaks at fk * sqrt(1 - 2 zeta^2).
TEST(ModalTransfer, DftPeakAtNearestBin) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> fd(60.0, 5000.0), zd(0.001, 0.05);
  for (int trial = 0; trial < 200; ++trial) {
    const double fk = fd(rng), zeta = zd(rng);
    const std::size_t T = 4096;
    const double fs = 22000.0;
    const auto g = dft_transfer(fk, zeta, 1.0, T, fs);
    std::size_t arg = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::abs(g[k]) > std::abs(g[arg])) arg = k;
    }
    const double df = fs / static_cast<double>(T);
    const double peak = fk * std::sqrt(1.0 - 2.0 * zeta * zeta);
    // One of the two bins bracketing the peak; |G| is asymmetric about it.
    EXPECT_LT(std::abs(static_cast<double>(arg) * df - peak), df) << fk << " " << zeta;
  }
}

TEST(DftTransfer, EvenLengthNyquistIsReal) {
  const auto g = dft_transfer(1000.0, 0.01, 1.0, 64, 22000.0);
  EXPECT_EQ(g.back().imag(), 0.0);
  const auto odd = dft_transfer(1000.0, 0.01, 1.0, 65, 22000.0);
  EXPECT_NE(odd.back().imag(), 0.0);
}

TEST(ImpulseResponse, MatchesBandlimitedOde) {
  const auto m = make_mode(500.0, 0.01, 1.0);
  const auto g = impulse_response(m, 22000, 22000.0);
  const auto ref = testing::bandlimited_impulse_ode(500.0, 0.01, 1.0, 22000, 22000.0);
  EXPECT_LT(testing::relative_l2(g, ref), 1e-6);
}

TEST(ImpulseResponse, CloseToSampledDiracResponse) {
  // Sampling the transfer function drops the aliased copies of the Dirac
  // response spectrum, an error of order (f / fs)^2. The response is also
  // periodic in T, so the window must be long against the decay time.
  const auto m = make_mode(500.0, 0.01, 1.0);
  const auto g = impulse_response(m, 22000, 22000.0);
  const auto ref = testing::dirac_impulse_ode(500.0, 0.01, 1.0, 22000, 22000.0);
  EXPECT_LT(testing::relative_l2(g, ref), 2e-3);
  const auto m2 = make_mode(100.0, 0.01, 1.0);
  const auto g2 = impulse_response(m2, 66000, 22000.0);
  const auto ref2 = testing::dirac_impulse_ode(100.0, 0.01, 1.0, 66000, 22000.0);
  EXPECT_LT(testing::relative_l2(g2, ref2), 1e-4);
}

TEST(ImpulseResponse, HeavyDampingConcentratesEnergyEarly) {
  const auto g = impulse_response(make_mode(500.0, 0.5, 1.0), 4400, 22000.0);
  const double total = energy(g);
  double early = 0.0;
  for (std::size_t t = 0; t < 220; ++t) early += g[t] * g[t];
  EXPECT_GT(early / total, 0.9);
}

TEST(ImpulseResponse, ZeroCrossingInterval) {
  const double fs = 22000.0;
  const auto g = impulse_response(make_mode(500.0, 0.01, 1.0), 22000, fs);
  std::vector<double> crossings;
  for (std::size_t t = 1; t < 4400; ++t) {
    if ((g[t - 1] < 0.0) != (g[t] < 0.0)) {
      crossings.push_back(static_cast<double>(t - 1) + g[t - 1] / (g[t - 1] - g[t]));
    }
  }
  ASSERT_GT(crossings.size(), 100u);
  const double wd = 2.0 * kPi * 500.0 * std::sqrt(1.0 - 1e-4);
  const double expected = kPi / wd * fs;  // half period in samples
  for (std::size_t i = 2; i < crossings.size(); ++i) {
    EXPECT_NEAR(crossings[i] - crossings[i - 1], expected, 1.0);
  }
}

TEST(ImpulseResponse, ZeroCouplingAndAlias) {
  for (double v : impulse_response(make_mode(500.0, 0.01, 0.0), 100, 22000.0)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(impulse_response(make_mode(11000.0, 0.01, 1.0), 100, 22000.0), AliasError);
  EXPECT_THROW(impulse_response(make_mode(500.0, 0.01, 1.0), 1, 22000.0), InvalidSignal);
}

TEST(ImpulseResponse, EnergyScalesQuadratically) {
  const std::vector<double> alphas{0.5, 1.0, 2.0};
  std::vector<double> e;
  for (double a : alphas) e.push_back(energy(impulse_response(make_mode(700.0, 0.02, a), 8000, 22000.0)));
  // Least-squares fit e = c a^2; R^2 of the fit.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    num += e[i] * alphas[i] * alphas[i];
    den += std::pow(alphas[i], 4);
  }
  const double c = num / den;
  double ss_res = 0.0, ss_tot = 0.0, mean = (e[0] + e[1] + e[2]) / 3.0;
  for (std::size_t i = 0; i < 3; ++i) {
    ss_res += std::pow(e[i] - c * alphas[i] * alphas[i], 2);
    ss_tot += std::pow(e[i] - mean, 2);
  }
  EXPECT_GT(1.0 - ss_res / ss_tot, 0.9999);
}

ModeSet single_point_set(Point2 grad) {
  ModeSet s;
  s.n_points = 1;
  auto m = make_mode(500.0, 0.01, 1.0, 1);
  m.shape_grad[0] = grad;
  s.modes.push_back(m);
  return s;
}

TEST(Synthesize, DegenerateSinglePoint) {
  const auto src = music_like(0.2, 22000, 3);
  SceneParams scene;
  scene.gamma = 2.0;
  scene.beta = {0.5};
  const auto g = synthesize(src, single_point_set({1.0, 0.0}), scene, 0);
  const auto ref = circular_convolve(src.samples, impulse_response(make_mode(500.0, 0.01, 1.0), src.size(), 22000.0));
  double scale = 0.0;
  for (double v : ref) scale = std::max(scale, std::abs(v));
  for (std::size_t t = 0; t < src.size(); ++t) {
    EXPECT_NEAR(g.channel(0, 0)[t], 1.0 * ref[t], 1e-12 * scale);
    EXPECT_EQ(g.channel(0, 1)[t], 0.0);
  }
}

TEST(Synthesize, ImpulseSourceGivesImpulseResponses) {
  PlateSpec ps;
  ps.grid = {3, 4};
  ps.mode_count = 3;
  const auto set = analytic_plate_modes(ps);
  const auto src = impulse(2000, 22000);
  SceneParams scene;
  scene.gamma = 0.7;
  scene.beta.assign(12, 1.3);
  const auto g = synthesize(src, set, scene, 0);
  std::vector<std::vector<double>> h;
  for (const auto& m : set.modes) h.push_back(impulse_response(m, 2000, 22000.0));
  for (std::size_t n = 0; n < 12; ++n) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t t = 0; t < 2000; t += 13) {
        double expect = 0.0;
        for (std::size_t k = 0; k < 3; ++k) expect += set.modes[k].shape_grad[n][a] * h[k][t];
        expect *= 0.7 * 1.3;
        EXPECT_NEAR(g.channel(n, a)[t], expect, 1e-9 * (1.0 + std::abs(expect)) + 1e-12);
      }
    }
  }
}

TEST(Synthesize, OppositeShapesGiveNegatedChannels) {
  ModeSet s;
  s.n_points = 2;
  auto m = make_mode(800.0, 0.01, 1.0, 2);
  m.shape_grad = {{1.0, 0.0}, {-1.0, 0.0}};
  s.modes.push_back(m);
  const auto g = synthesize(music_like(0.3, 22000, 8), s, {}, 0);
  for (std::size_t t = 0; t < g.n_samples(); ++t) EXPECT_EQ(g.channel(0, 0)[t], -g.channel(1, 0)[t]);
}

TEST(Synthesize, BetaLengthMismatch) {
  SceneParams scene;
  scene.beta = {1.0, 1.0};
  EXPECT_THROW(synthesize(music_like(0.1, 22000, 1), single_point_set({1, 0}), scene, 0), ShapeMismatch);
  auto set = single_point_set({1, 0});
  set.modes[0].natural_freq = 12000.0;
  EXPECT_THROW(synthesize(music_like(0.1, 22000, 1), set, {}, 0), AliasError);
}

TEST(Synthesize, LinearInSource) {
  PlateSpec ps;
  ps.grid = {4, 4};
  const auto set = analytic_plate_modes(ps);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s1 = music_like(0.25, 22000, seed), s2 = log_chirp(80, 6000, 0.25, 22000);
    SoundSignal mix{std::vector<double>(s1.size()), 22000};
    const double a = 1.5 + static_cast<double>(seed), b = -0.25;
    for (std::size_t t = 0; t < mix.size(); ++t) mix.samples[t] = a * s1.samples[t] + b * s2.samples[t];
    const auto g1 = synthesize(s1, set, {}, 0), g2 = synthesize(s2, set, {}, 0), gm = synthesize(mix, set, {}, 0);
    double scale = 0.0;
    for (double v : gm.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < gm.data().size(); ++i) {
      EXPECT_NEAR(gm.data()[i], a * g1.data()[i] + b * g2.data()[i], 1e-9 * scale);
    }
  }
}

TEST(Synthesize, BetaAbsorbedIntoShapesBitIdentical) {
  PlateSpec ps;
  ps.grid = {5, 5};
  const auto set = analytic_plate_modes(ps);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> bd(0.5, 2.0);
  const auto src = music_like(0.2, 22000, 5);
  for (int trial = 0; trial < 5; ++trial) {
    SceneParams scene;
    scene.gamma = 1.0;
    for (std::size_t n = 0; n < 25; ++n) scene.beta.push_back(bd(rng));
    auto folded = set;
    for (auto& m : folded.modes) {
      for (std::size_t n = 0; n < 25; ++n) {
        m.shape_grad[n][0] *= scene.beta[n];
        m.shape_grad[n][1] *= scene.beta[n];
      }
    }
    EXPECT_EQ(synthesize(src, set, scene, 9).data(), synthesize(src, folded, {}, 9).data());
  }
}

TEST(Synthesize, NoiseIsSeededAndCalibrated) {
  PlateSpec ps;
  ps.grid = {4, 4};
  const auto set = analytic_plate_modes(ps);
  const auto src = music_like(1.0, 22000, 2);
  const auto clean = synthesize(src, set, {}, 0);
  SceneParams scene;
  scene.noise_std = noise_std_for_snr(clean, 10.0);
  const auto a = synthesize(src, set, scene, 42), b = synthesize(src, set, scene, 42),
             c = synthesize(src, set, scene, 43);
  EXPECT_EQ(a.data(), b.data());
  EXPECT_NE(a.data(), c.data());
  double noise = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) noise += std::pow(a.data()[i] - clean.data()[i], 2);
  noise = std::sqrt(noise / static_cast<double>(a.data().size()));
  EXPECT_NEAR(20.0 * std::log10(grid_rms(clean) / noise), 10.0, 0.05);
}

TEST(PlateModes, SquarePlateRatios) {
  PlateSpec ps;
  ps.mode_count = 3;
  const auto set = analytic_plate_modes(ps);
  ASSERT_EQ(set.size(), 3u);
  EXPECT_DOUBLE_EQ(set.modes[0].natural_freq, 200.0);
  EXPECT_NEAR(set.modes[1].natural_freq / 200.0, 2.5, 1e-3);
  EXPECT_NEAR(set.modes[2].natural_freq / 200.0, 2.5, 1e-3);
  EXPECT_GT(set.modes[2].natural_freq, set.modes[1].natural_freq);
  EXPECT_NO_THROW(set.validate());
}

TEST(PlateModes, FundamentalGradientSymmetry) {
  PlateSpec ps;
  ps.mode_count = 1;
  const auto set = analytic_plate_modes(ps);
  ASSERT_EQ(set.size(), 1u);
  const auto& g = set.modes[0].shape_grad;
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 10; ++c) {
      EXPECT_NEAR(g[r * 10 + c][0], -g[r * 10 + (9 - c)][0], 1e-12);
      EXPECT_NEAR(g[r * 10 + c][1], -g[(9 - r) * 10 + c][1], 1e-12);
      EXPECT_NEAR(g[r * 10 + c][1], g[r * 10 + (9 - c)][1], 1e-12);
    }
  }
}

TEST(PlateModes, GradientMatchesFiniteDifference) {
  PlateSpec ps;
  ps.length_x = 1.0;
  ps.length_y = 1.4;
  ps.mode_count = 6;
  ps.grid = {4, 6};
  const auto set = analytic_plate_modes(ps);
  // Identify (m, n) from the frequency and differentiate phi numerically.
  for (const auto& mode : set.modes) {
    bool found = false;
    for (int m = 1; m <= 6 && !found; ++m) {
      for (int n = 1; n <= 6 && !found; ++n) {
        const double f = 100.0 * (m * m + n * n / (1.4 * 1.4));
        if (std::abs(f - mode.natural_freq) > 1e-6 * f) continue;
        auto phi = [&](double x, double y) { return std::sin(m * kPi * x) * std::sin(n * kPi * y / 1.4); };
        bool all = true;
        for (std::size_t p = 0; p < set.n_points; ++p) {
          const auto [x, y] = set.point_coords[p];
          const double h = 1e-6;
          const double gx = (phi(x + h, y) - phi(x - h, y)) / (2 * h);
          const double gy = (phi(x, y + h) - phi(x, y - h)) / (2 * h);
          all = all && std::abs(gx - mode.shape_grad[p][0]) < 1e-6 && std::abs(gy - mode.shape_grad[p][1]) < 1e-6;
        }
        found = all;
      }
    }
    EXPECT_TRUE(found) << mode.natural_freq;
  }
}

TEST(PlateModes, SortedAndTruncated) {
  PlateSpec ps;
  ps.f_base = 132.0;
  ps.length_y = 1.4;
  for (std::size_t k = 1; k <= 8; ++k) {
    ps.mode_count = k;
    const auto set = analytic_plate_modes(ps);
    EXPECT_EQ(set.size(), k);
    EXPECT_NO_THROW(set.validate());
  }
  ps.mode_count = 0;
  EXPECT_THROW(analytic_plate_modes(ps), InvalidSignal);
}

}  // namespace
}  // namespace vibrec
