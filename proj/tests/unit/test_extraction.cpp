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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "../support/scenes.hpp"
#include "vibrec/extraction.hpp"

namespace vibrec {
namespace {

using testing::kRate;

VibrationGrid constant_grid(std::size_t points, std::size_t samples) {
  VibrationGrid g(points, samples, kRate);
  const auto s = music_like(static_cast<double>(samples) / kRate, kRate, 1);
  for (std::size_t c = 0; c < g.n_channels(); ++c) std::copy(s.samples.begin(), s.samples.end(), g.channel(c).begin());
  return g;
}

std::size_t matches(const ModeSet& found, const ModeSet& truth, double tol) {
  std::size_t hit = 0;
  for (const auto& t : truth.modes) {
    for (const auto& m : found.modes) {
      if (std::abs(m.natural_freq - t.natural_freq) <= tol * t.natural_freq) {
        ++hit;
        break;
      }
    }
  }
  return hit;
}

TEST(StdSpectrum, IdenticalChannelsGiveZero) {
  for (std::size_t n : {1u, 2u, 9u}) {
    for (double v : std_spectrum(constant_grid(n, 2000))) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(StdSpectrum, MatchesBruteForce) {
  const auto modes = testing::plate(3, 3, 3);
  const auto g = synthesize(music_like(0.05, kRate, 2), modes, {}, 0);
  const auto sigma = std_spectrum(g);
  const std::size_t T = g.n_samples();
  for (std::size_t k = 0; k < sigma.size(); k += 37) {
    std::vector<double> mags;
    for (std::size_t c = 0; c < g.n_channels(); ++c) {
      Complex acc(0.0, 0.0);
      const auto x = g.channel(c);
      for (std::size_t t = 0; t < T; ++t) acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t % T) / T);
      mags.push_back(std::abs(acc));
    }
    double mean = 0.0, var = 0.0;
    for (double m : mags) mean += m / static_cast<double>(mags.size());
    for (double m : mags) var += (m - mean) * (m - mean) / static_cast<double>(mags.size());
    EXPECT_NEAR(sigma[k], std::sqrt(var), 1e-9 * (1.0 + std::sqrt(var))) << k;
  }
}

TEST(StdSpectrum, SingleModePeaksAtModeBin) {
  ModeSet set;
  set.n_points = 3;
  Mode m;
  m.natural_freq = 733.0;
  m.shape_grad = {{-1.0, 0.0}, {0.0, 1.0}, {1.0, -1.0}};
  set.modes.push_back(m);
  const auto g = synthesize(clap(kRate, kRate, 3, 2.0, 100), set, {}, 0);
  const auto sigma = std_spectrum(g);
  EXPECT_EQ(std::max_element(sigma.begin(), sigma.end()) - sigma.begin(), 733);
}

TEST(RobustFindPeaks, ThreeModeGrid) {
  auto modes = testing::plate(6, 6, 3);
  const double truth[] = {500.0, 1200.0, 2600.0};
  for (int k = 0; k < 3; ++k) modes.modes[k].natural_freq = truth[k];
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = testing::recording(impulse(kRate, kRate, 100), modes, 20.0, seed);
    const auto peaks = robust_find_peaks(g, ExtractionConfig{});
    ASSERT_EQ(peaks.size(), 3u) << seed;
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(peaks.frequencies[k], truth[k], 0.002 * truth[k]);
  }
}

TEST(RobustFindPeaks, WhiteNoiseFalsePositives) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    VibrationGrid g(16, 11000, kRate);
    add_gaussian_noise(g, 1.0, seed);
    g = bandpass_grid(g, 50.0, 10000.0, 7);
    if (robust_find_peaks(g, ExtractionConfig{}).size() <= 1) ++ok;
  }
  EXPECT_GE(ok, 95);
}

TEST(RobustFindPeaks, SilentGridIsEmpty) {
  VibrationGrid g(4, 4000, kRate);
  EXPECT_TRUE(robust_find_peaks(g, ExtractionConfig{}).empty());
  EXPECT_TRUE(extract_modes(g, ExtractionConfig{}).modes.empty());
}

TEST(RobustFindPeaks, RespectsBand) {
  auto modes = testing::plate(4, 4, 3);
  modes.modes[0].natural_freq = 30.0;
  modes.modes[1].natural_freq = 900.0;
  modes.modes[2].natural_freq = 10500.0;
  const auto g = synthesize(impulse(kRate, kRate, 100), modes, {}, 0);
  const auto peaks = robust_find_peaks(g, ExtractionConfig{});
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_DOUBLE_EQ(peaks.frequencies[0], 900.0);
}

TEST(RecoverModeShapes, NoiselessSingleModeRoundTrip) {
  for (std::size_t k = 0; k < 4; ++k) {
    auto full = testing::plate(5, 5, 4);
    ModeSet one = full;
    one.modes = {full.modes[k]};
    const auto g = synthesize(impulse(kRate, kRate, 0), one, {}, 0);
    const std::vector<double> f{one.modes[0].natural_freq};
    const auto ref = select_reference(g);
    const auto shapes = recover_mode_shapes(g, f, ref);
    // Nearest-bin evaluation of a mode between bins still carries one phase.
    auto expected = one.modes[0].shape_grad;
    if (expected[ref.point][ref.axis] < 0.0) {
      for (auto& p : expected) p = {-p[0], -p[1]};
    }
    EXPECT_GE(testing::cosine(shapes[0], expected), 0.999) << k;
    EXPECT_GT(shapes[0][ref.point][ref.axis], 0.0);
  }
}

TEST(RecoverModeShapes, ReferenceEntryAndAntisymmetry) {
  ModeSet set;
  set.n_points = 3;
  Mode m;
  m.natural_freq = 640.0;
  m.shape_grad = {{0.5, 1.0}, {-0.5, -1.0}, {0.2, 0.1}};
  set.modes.push_back(m);
  const auto g = synthesize(music_like(1.0, kRate, 4), set, {}, 0);
  const std::vector<double> f{640.0};
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t a = 0; a < 2; ++a) {
      const auto s = recover_mode_shapes(g, f, {n, a});
      EXPECT_GT(s[0][n][a], 0.0);
      EXPECT_NEAR(s[0][0][0], -s[0][1][0], 1e-9);
      EXPECT_NEAR(s[0][0][1], -s[0][1][1], 1e-9);
    }
  }
}

TEST(RecoverModeShapes, Errors) {
  VibrationGrid g(2, 1000, kRate);
  g.channel(1, 0)[3] = 1.0;
  const std::vector<double> f{500.0};
  EXPECT_THROW(recover_mode_shapes(g, f, {0, 1}), DegenerateReference);
  EXPECT_THROW(recover_mode_shapes(g, f, {5, 0}), IndexError);
  const std::vector<double> high{20000.0};
  EXPECT_THROW(recover_mode_shapes(g, high, {1, 0}), IndexError);
}

std::vector<Point2> random_shape(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<Point2> s(n);
  for (auto& p : s) p = {d(rng), d(rng)};
  return s;
}

TEST(PruneCorrelated, DuplicateRemoved) {
  std::mt19937_64 rng(1);
  const auto s = random_shape(20, rng);
  std::vector<ModeCandidate> c{{300.0, 5.0, s}, {600.0, 2.0, s}};
  const auto out = prune_correlated(c, 0.95);
  ASSERT_EQ(out.kept.size(), 1u);
  EXPECT_EQ(out.kept[0], 0u);
  EXPECT_EQ(out.displaced_by[1], std::optional<std::size_t>(0));
}

TEST(PruneCorrelated, PlateModesAllKept) {
  const auto modes = testing::plate(10, 10, 8);
  std::vector<ModeCandidate> c;
  for (const auto& m : modes.modes) c.push_back({m.natural_freq, 1.0, m.shape_grad});
  EXPECT_EQ(prune_correlated(c, 0.95).kept.size(), 8u);
}

TEST(PruneCorrelated, NearCopyDropped) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 0.01);
  const auto a = random_shape(30, rng), b = random_shape(30, rng);
  auto c3 = a;
  for (auto& p : c3) {
    p[0] = 0.99 * p[0] + d(rng);
    p[1] = 0.99 * p[1] + d(rng);
  }
  ASSERT_GT(shape_correlation(a, c3), 0.95);
  EXPECT_NEAR(shape_correlation(a, c3), testing::pearson(testing::flatten(a), testing::flatten(c3)), 1e-12);
  std::vector<ModeCandidate> c{{200.0, 3.0, a}, {400.0, 3.0, b}, {600.0, 1.0, c3}};
  const auto out = prune_correlated(c, 0.95);
  EXPECT_EQ(out.kept, (std::vector<std::size_t>{0, 1}));
}

TEST(PruneCorrelated, HigherProminenceWinsAndSignIgnored) {
  std::mt19937_64 rng(3);
  const auto a = random_shape(30, rng);
  auto neg = a;
  for (auto& p : neg) p = {-p[0], -p[1]};
  std::vector<ModeCandidate> c{{200.0, 1.0, a}, {400.0, 9.0, neg}};
  const auto out = prune_correlated(c, 0.95);
  EXPECT_EQ(out.kept, (std::vector<std::size_t>{1}));
  EXPECT_EQ(out.displaced_by[0], std::optional<std::size_t>(1));
}

TEST(TotalVariation, HandCountedCases) {
  const GridDims dims{5, 6};
  std::vector<Point2> flat(30, Point2{2.0, -1.0});
  EXPECT_EQ(shape_total_variation(flat, dims), 0.0);
  std::vector<Point2> spike(30, Point2{0.0, 0.0});
  spike[2 * 6 + 3] = {3.0, 4.0};
  EXPECT_NEAR(shape_total_variation(spike, dims), 4.0 * 5.0, 1e-12);
  EXPECT_THROW(shape_total_variation(spike, GridDims{4, 6}), ShapeMismatch);
}

TEST(TotalVariation, HigherOrderPlateModeIsRougher) {
  PlateSpec ps;
  ps.max_m = ps.max_n = 3;
  ps.mode_count = 9;
  const auto set = analytic_plate_modes(ps);
  // (1,1) is the lowest and (3,3) the highest of the 3x3 family on a square plate.
  EXPECT_GT(shape_total_variation(set.modes.back().shape_grad, ps.grid),
            shape_total_variation(set.modes.front().shape_grad, ps.grid));
}

TEST(IsotonicFit, MatchesBruteForceProjection) {
  EXPECT_EQ(isotonic_fit(std::vector<double>{1, 3, 2, 4}), (std::vector<double>{1, 2.5, 2.5, 4}));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y(1 + trial % 12);
    for (double& v : y) v = d(rng);
    const auto fit = isotonic_fit(y);
    double sse = 0.0, sum_y = 0.0, sum_f = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (i > 0) {
        EXPECT_GE(fit[i], fit[i - 1] - 1e-12);
      }
      sse += (fit[i] - y[i]) * (fit[i] - y[i]);
      sum_y += y[i];
      sum_f += fit[i];
    }
    EXPECT_NEAR(sum_y, sum_f, 1e-9);
    // No monotone perturbation of the fit does better.
    for (int p = 0; p < 20; ++p) {
      auto alt = fit;
      for (double& v : alt) v += 0.05 * d(rng);
      std::sort(alt.begin(), alt.end());
      double e = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) e += (alt[i] - y[i]) * (alt[i] - y[i]);
      EXPECT_GE(e, sse - 1e-12);
    }
  }
}

TEST(TvFilter, MonotoneKeptAndFewPassThrough) {
  const std::vector<double> mono{1.0, 1.5, 2.2, 3.0, 3.1, 4.0};
  for (bool k : tv_monotonicity_filter(mono, 2.5).keep) EXPECT_TRUE(k);
  const std::vector<double> two{100.0, 1.0};
  for (bool k : tv_monotonicity_filter(two, 2.5).keep) EXPECT_TRUE(k);
}

TEST(TvFilter, InjectedRoughLowFrequencyModeDiscarded) {
  const auto modes = testing::plate(10, 10, 5);
  std::vector<double> freqs{200.0}, tvs;
  std::mt19937_64 rng(6);
  // Checkerboard-like noise field: far rougher than any low plate mode.
  tvs.push_back(shape_total_variation(random_shape(100, rng), modes.dims));
  for (const auto& m : modes.modes) {
    freqs.push_back(m.natural_freq);
    tvs.push_back(shape_total_variation(m.shape_grad, modes.dims));
  }
  const auto out = tv_monotonicity_filter(tvs, 2.5);
  EXPECT_FALSE(out.keep[0]);
  for (std::size_t i = 1; i < tvs.size(); ++i) EXPECT_TRUE(out.keep[i]);
}

TEST(TvFilter, DownwardOutliersKept) {
  const std::vector<double> tvs{1.0, 2.0, 3.0, 0.1, 5.0, 6.0};
  const auto out = tv_monotonicity_filter(tvs, 2.5);
  EXPECT_TRUE(out.keep[3]);
  EXPECT_LT(out.residual[3], 0.0);
  // The pooled trend sits between 3.0 and 0.1, so the upper neighbour can be
  // flagged; everything away from the dip survives.
  for (std::size_t i : {0u, 1u, 4u, 5u}) EXPECT_TRUE(out.keep[i]) << i;
}

TEST(ExtractModes, NoiselessSingleMode) {
  auto modes = testing::plate(6, 6, 1);
  const auto g = testing::recording(impulse(kRate, kRate, 100), modes, INFINITY, 0);
  const auto ex = extract_modes(g, ExtractionConfig{});
  ASSERT_EQ(ex.modes.size(), 1u);
  EXPECT_NEAR(ex.modes.modes[0].natural_freq, modes.modes[0].natural_freq, 1.0);
  EXPECT_EQ(ex.modes.modes[0].damping_ratio, 0.01);
  EXPECT_EQ(ex.modes.modes[0].coupling, 1.0);
  EXPECT_GE(std::abs(testing::cosine(ex.modes.modes[0].shape_grad, modes.modes[0].shape_grad)), 0.99);
}

TEST(ExtractModes, OffResonanceToneFlagged) {
  const auto modes = testing::plate(6, 6, 5);
  const auto clean = synthesize(music_like(1.0, kRate, 3), modes, {}, 0);
  for (double f : {1100.0, 1500.0, 3000.0}) {
    SceneParams scene;
    scene.noise_std = noise_std_for_snr(clean, 20.0);
    const auto g = bandpass_grid(synthesize(tone(f, 1.0, kRate), modes, scene, 7), 50.0, 10000.0, 7);
    const auto ex = extract_modes(g, ExtractionConfig{});
    EXPECT_LE(ex.modes.size(), 1u);
    for (const auto& c : ex.candidates) {
      EXPECT_NEAR(c.frequency, f, 1.0);
      EXPECT_TRUE(c.low_prominence);
    }
  }
}

TEST(ExtractModes, PlateRoundTripAtTwentyDb) {
  const auto modes = testing::plate(10, 10, 5);
  int pass = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = testing::recording(impulse(kRate, kRate, 100), modes, 20.0, 100 + seed);
    const auto ex = extract_modes(g, ExtractionConfig{});
    for (const auto& c : ex.candidates) {
      if (c.stage == CandidateStage::kKept) {
        EXPECT_FALSE(c.low_prominence) << c.frequency;
      }
    }
    const auto hit = matches(ex.modes, modes, 0.005);
    if (hit >= 4 && matches(modes, ex.modes, 0.005) == ex.modes.size()) ++pass;
  }
  EXPECT_GE(pass, 9);
}

class ExtractionInvariants : public ::testing::Test {
 protected:
  void SetUp() override {
    modes_ = testing::plate(6, 6, 4);
    grid_ = testing::recording(clap(kRate, kRate, 11, 2.0, 100), modes_, 25.0, 4);
    base_ = extract_modes(grid_, ExtractionConfig{});
    ASSERT_GE(base_.modes.size(), 3u);
  }
  ModeSet modes_;
  VibrationGrid grid_;
  ExtractedModes base_;
};

TEST_F(ExtractionInvariants, OutputSortedInBand) {
  const auto f = base_.modes.frequencies();
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_GE(f[i], 50.0);
    EXPECT_LE(f[i], 10000.0);
    if (i > 0) {
      EXPECT_GT(f[i], f[i - 1]);
    }
  }
  EXPECT_NO_THROW(base_.modes.validate());
}

TEST_F(ExtractionInvariants, GlobalScale) {
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    auto g = grid_;
    for (double& v : g.data()) v *= c;
    const auto ex = extract_modes(g, ExtractionConfig{});
    ASSERT_EQ(ex.modes.frequencies(), base_.modes.frequencies()) << c;
    for (std::size_t k = 0; k < ex.modes.size(); ++k) {
      for (std::size_t n = 0; n < 36; ++n) {
        for (int a = 0; a < 2; ++a) {
          EXPECT_NEAR(ex.modes.modes[k].shape_grad[n][a], base_.modes.modes[k].shape_grad[n][a], 1e-9);
        }
      }
    }
  }
}

TEST_F(ExtractionInvariants, PerPointScaleAbsorbed) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> beta(36);
  for (double& b : beta) b = u(rng);
  auto g = grid_;
  for (std::size_t n = 0; n < 36; ++n) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (double& v : g.channel(n, a)) v *= beta[n];
    }
  }
  ExtractionConfig cfg;
  cfg.reference = base_.reference;
  const auto ex = extract_modes(g, cfg);
  ASSERT_EQ(ex.modes.frequencies(), base_.modes.frequencies());
  for (std::size_t k = 0; k < ex.modes.size(); ++k) {
    // Row n scales by beta_n; the global mean normalization contributes one
    // common factor per mode.
    std::vector<Point2> expected = base_.modes.modes[k].shape_grad;
    for (std::size_t n = 0; n < 36; ++n) {
      expected[n][0] *= beta[n];
      expected[n][1] *= beta[n];
    }
    EXPECT_GT(testing::cosine(ex.modes.modes[k].shape_grad, expected), 1.0 - 1e-12);
  }
}

TEST_F(ExtractionInvariants, AxisSwapSwapsColumns) {
  auto g = grid_;
  for (std::size_t n = 0; n < 36; ++n) {
    std::swap_ranges(g.channel(n, 0).begin(), g.channel(n, 0).end(), g.channel(n, 1).begin());
  }
  ExtractionConfig cfg;
  cfg.reference = Channel{base_.reference.point, 1 - base_.reference.axis};
  const auto ex = extract_modes(g, cfg);
  EXPECT_EQ(select_reference(g), *cfg.reference);
  ASSERT_EQ(ex.modes.frequencies(), base_.modes.frequencies());
  for (std::size_t k = 0; k < ex.modes.size(); ++k) {
    for (std::size_t n = 0; n < 36; ++n) {
      EXPECT_NEAR(ex.modes.modes[k].shape_grad[n][0], base_.modes.modes[k].shape_grad[n][1], 1e-9);
      EXPECT_NEAR(ex.modes.modes[k].shape_grad[n][1], base_.modes.modes[k].shape_grad[n][0], 1e-9);
    }
  }
}

TEST(ExtractionConfig, Validation) {
  ExtractionConfig c;
  c.shape_corr_threshold = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.peak_prominence = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace vibrec
