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

// Mode identification from a vibration grid in three stages:
//
//   1. spectral: peaks of the smoothed across-channel std of |V(f)|;
//   2. spatial:  phase-aligned shape gradients at each peak, dropping
//                candidates whose shapes duplicate an earlier one;
//   3. physical: total variation of the shape must not jump above the
//                monotone trend expected as frequency grows.
//
// The grid is expected to be band-passed already; candidates are restricted
// to [band_low, band_high].

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vibrec/dsp.hpp"
#include "vibrec/fft.hpp"
#include "vibrec/modal.hpp"
#include "vibrec/types.hpp"

namespace vibrec {

struct ExtractionConfig {
  double savgol_window_hz = 5.0;
  int savgol_order = 2;
  double peak_prominence = 3.0;        // multiple of the in-band median smoothed sigma
  double min_peak_separation_hz = 10.0;
  double shape_corr_threshold = 0.95;
  double tv_outlier_zscore = 2.5;
  // Lower bound on the robust residual scale, as a fraction of the median TV.
  // Without it an exactly monotone set (MAD = 0) would reject any candidate
  // sitting even slightly above the fit.
  double tv_scale_floor = 0.05;
  double band_low = 50.0;
  double band_high = 10000.0;
  bool pool_axes = true;               // sigma over all 2N channels, else mean of per-axis stds
  double damping_ratio = 0.01;         // assigned to every extracted mode
  double low_prominence_ratio = 10.0;  // diagnostics flag threshold
  // Peaks narrower than this fraction of a resonance at damping_ratio are
  // flagged as low-prominence (forced lines rather than modes).
  double min_width_fraction = 0.25;
  std::optional<Channel> reference;    // unset: channel with the most energy

  void validate() const {
    if (!(savgol_window_hz > 0.0) || !(peak_prominence > 0.0) || !(min_peak_separation_hz > 0.0) ||
        !(tv_outlier_zscore > 0.0) || !(low_prominence_ratio > 0.0) || tv_scale_floor < 0.0 ||
        min_width_fraction < 0.0) {
      throw ConfigError("extraction thresholds must be positive");
    }
    if (!(shape_corr_threshold > 0.0 && shape_corr_threshold < 1.0)) {
      throw ConfigError("shape_corr_threshold must lie in (0, 1)");
    }
    if (!(band_low >= 0.0 && band_low < band_high)) throw ConfigError("invalid extraction band");
    if (!(damping_ratio > 0.0 && damping_ratio < 1.0)) throw ConfigError("invalid damping ratio");
  }
};

enum class CandidateStage { kKept, kPrunedCorrelated, kPrunedTotalVariation };

inline const char* to_string(CandidateStage s) {
  switch (s) {
    case CandidateStage::kKept: return "kept";
    case CandidateStage::kPrunedCorrelated: return "pruned_correlated";
    case CandidateStage::kPrunedTotalVariation: return "pruned_total_variation";
  }
  return "unknown";
}

struct CandidateDiagnostics {
  double frequency = 0.0;
  std::size_t bin = 0;
  double prominence = 0.0;
  double prominence_ratio = 0.0;  // prominence / median smoothed sigma
  double peak_width_hz = 0.0;        // half-prominence width of the raw sigma peak
  double resonance_width_hz = 0.0;   // same width for a resonance at the configured damping
  bool low_prominence = false;
  double total_variation = std::numeric_limits<double>::quiet_NaN();
  double tv_residual = std::numeric_limits<double>::quiet_NaN();
  CandidateStage stage = CandidateStage::kKept;
  std::optional<double> correlated_with;  // frequency of the conflicting mode
  double correlation = 0.0;
};

struct ExtractedModes {
  ModeSet modes;
  std::vector<CandidateDiagnostics> candidates;
  Channel reference;
  double sigma_median = 0.0;
  double freq_resolution = 0.0;
};

// One-sided spectra of every channel of a grid, indexed by flat channel.
struct GridSpectra {
  std::vector<std::vector<Complex>> channels;
  double freq_resolution = 0.0;
  std::size_t n_samples = 0;

  std::size_t n_bins() const { return n_samples / 2 + 1; }
};

inline GridSpectra grid_spectra(const VibrationGrid& grid) {
  grid.validate();
  GridSpectra out;
  out.n_samples = grid.n_samples();
  out.freq_resolution = static_cast<double>(grid.sample_rate()) / static_cast<double>(grid.n_samples());
  out.channels.reserve(grid.n_channels());
  for (std::size_t c = 0; c < grid.n_channels(); ++c) out.channels.push_back(rfft(grid.channel(c)));
  return out;
}

namespace detail {

inline double population_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  double m = *mid;
  if (xs.size() % 2 == 0) m = 0.5 * (m + *std::max_element(xs.begin(), mid));
  return m;
}

inline std::size_t band_bin(double freq, double df, std::size_t n_bins) {
  const auto b = static_cast<long long>(std::llround(freq / df));
  return static_cast<std::size_t>(std::clamp<long long>(b, 0, static_cast<long long>(n_bins) - 1));
}

}  // namespace detail

inline std::vector<double> std_spectrum(const GridSpectra& spectra, bool pool_axes = true) {
  const std::size_t bins = spectra.n_bins();
  const std::size_t channels = spectra.channels.size();
  std::vector<double> sigma(bins, 0.0);
  std::vector<double> mags(channels);
  std::vector<double> axis_mags;
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t c = 0; c < channels; ++c) mags[c] = std::abs(spectra.channels[c][k]);
    if (pool_axes) {
      sigma[k] = detail::population_std(mags);
    } else {
      double acc = 0.0;
      for (std::size_t a = 0; a < 2; ++a) {
        axis_mags.clear();
        for (std::size_t c = a; c < channels; c += 2) axis_mags.push_back(mags[c]);
        acc += detail::population_std(axis_mags);
      }
      sigma[k] = acc / 2.0;
    }
  }
  return sigma;
}

// Population standard deviation of |V| across channels, per frequency bin.
inline std::vector<double> std_spectrum(const VibrationGrid& grid, bool pool_axes = true) {
  return std_spectrum(grid_spectra(grid), pool_axes);
}

struct PeakSearch {
  PeakList peaks;
  std::vector<double> sigma;
  std::vector<double> smoothed;
  double sigma_median = 0.0;
};

inline PeakSearch robust_find_peaks(const GridSpectra& spectra, const ExtractionConfig& config) {
  config.validate();
  const double df = spectra.freq_resolution;
  PeakSearch out;
  out.sigma = std_spectrum(spectra, config.pool_axes);
  const auto& sigma = out.sigma;
  out.smoothed = savgol_smooth(sigma, config.savgol_window_hz, df, config.savgol_order);

  const std::size_t lo = detail::band_bin(config.band_low, df, sigma.size());
  const std::size_t hi = detail::band_bin(config.band_high, df, sigma.size());
  out.sigma_median = detail::median({out.smoothed.begin() + static_cast<std::ptrdiff_t>(lo),
                                     out.smoothed.begin() + static_cast<std::ptrdiff_t>(hi + 1)});
  const auto distance = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.min_peak_separation_hz / df)));
  const auto all = find_peaks(out.smoothed, config.peak_prominence * out.sigma_median, distance, df);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double f = all.frequencies[i];
    if (f < config.band_low || f > config.band_high) continue;
    // A flat (e.g. silent) spectrum has no meaningful peaks.
    if (!(all.prominences[i] > 0.0)) continue;
    out.peaks.indices.push_back(all.indices[i]);
    out.peaks.frequencies.push_back(f);
    out.peaks.prominences.push_back(all.prominences[i]);
  }
  return out;
}

namespace detail {

// Width in bins at half prominence of the highest raw sample within two bins
// of `bin`, with linear interpolation between samples.
inline double half_prominence_width(std::span<const double> x, std::size_t bin) {
  std::size_t p = bin;
  for (std::size_t i = bin >= 2 ? bin - 2 : 0; i <= std::min(bin + 2, x.size() - 1); ++i) {
    if (x[i] > x[p]) p = i;
  }
  const double level = x[p] - 0.5 * peak_prominence(x, p);
  double left = static_cast<double>(p), right = static_cast<double>(p);
  std::size_t i = p;
  while (i > 0 && x[i - 1] > level) --i;
  if (i > 0) left = static_cast<double>(i) - (x[i] - level) / (x[i] - x[i - 1]);
  else left = 0.0;
  std::size_t j = p;
  while (j + 1 < x.size() && x[j + 1] > level) ++j;
  if (j + 1 < x.size()) right = static_cast<double>(j) + (x[j] - level) / (x[j] - x[j + 1]);
  else right = static_cast<double>(x.size() - 1);
  return right - left;
}

}  // namespace detail

inline PeakList robust_find_peaks(const VibrationGrid& grid, const ExtractionConfig& config) {
  return robust_find_peaks(grid_spectra(grid), config).peaks;
}

// Channel with the largest total energy; ties go to the lowest index.
inline Channel select_reference(const VibrationGrid& grid) {
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t c = 0; c < grid.n_channels(); ++c) {
    double e = 0.0;
    for (double v : grid.channel(c)) e += v * v;
    if (e > best_energy) {
      best_energy = e;
      best = c;
    }
  }
  return {best / 2, best % 2};
}

using ShapeMatrix = std::vector<std::vector<Point2>>;  // K x N x 2

// Shape gradients at the given frequencies, phase-aligned to the reference
// channel and divided by the mean magnitude over all points and axes:
//   Re{ V(x_n, f) conj(V_ref(f)) } / ( mean_{n,a} |V(x_n, f)| * |V_ref(f)| )
inline ShapeMatrix recover_mode_shapes(const GridSpectra& spectra, std::span<const double> freqs,
                                       Channel reference) {
  const std::size_t channels = spectra.channels.size();
  const std::size_t n_points = channels / 2;
  if (reference.point >= n_points || reference.axis >= 2) {
    throw IndexError("reference channel out of range");
  }
  const auto& ref = spectra.channels[reference.point * 2 + reference.axis];
  ShapeMatrix shapes;
  shapes.reserve(freqs.size());
  for (double f : freqs) {
    const double pos = f / spectra.freq_resolution;
    if (!(pos >= 0.0) || pos > static_cast<double>(spectra.n_bins() - 1) + 0.5) {
      throw IndexError("frequency " + std::to_string(f) + " Hz outside the DFT grid");
    }
    const auto bin = static_cast<std::size_t>(std::llround(pos));
    const Complex r = ref[bin];
    const double r_mag = std::abs(r);
    if (!(r_mag > 0.0)) {
      throw DegenerateReference("reference channel has zero magnitude at " + std::to_string(f) + " Hz");
    }
    double mean_mag = 0.0;
    for (std::size_t c = 0; c < channels; ++c) mean_mag += std::abs(spectra.channels[c][bin]);
    mean_mag /= static_cast<double>(channels);
    std::vector<Point2> shape(n_points);
    const Complex phase = std::conj(r) / r_mag;
    for (std::size_t n = 0; n < n_points; ++n) {
      for (std::size_t a = 0; a < 2; ++a) {
        shape[n][a] = (spectra.channels[n * 2 + a][bin] * phase).real() / mean_mag;
      }
    }
    shapes.push_back(std::move(shape));
  }
  return shapes;
}

inline ShapeMatrix recover_mode_shapes(const VibrationGrid& grid, std::span<const double> freqs,
                                       Channel reference) {
  grid.check_channel(reference);
  return recover_mode_shapes(grid_spectra(grid), freqs, reference);
}

// Pearson correlation of two shapes flattened to 2N-vectors.
inline double shape_correlation(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.size() != b.size()) throw ShapeMismatch("shape_correlation: size mismatch");
  const double n = 2.0 * static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i][0] + a[i][1];
    mb += b[i][0] + b[i][1];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < 2; ++k) {
      const double da = a[i][k] - ma, db = b[i][k] - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct ModeCandidate {
  double frequency = 0.0;
  double prominence = 0.0;
  std::vector<Point2> shape;
};

struct PruneOutcome {
  std::vector<std::size_t> kept;  // indices into the input, ascending frequency
  // For each input: index of the kept mode that displaced it, if any.
  std::vector<std::optional<std::size_t>> displaced_by;
  std::vector<double> correlation;
};

// Greedy scan in ascending frequency. A candidate whose |corr| with any kept
// mode reaches the threshold either replaces all such modes (if its
// prominence beats every one of them) or is dropped.
inline PruneOutcome prune_correlated(std::span<const ModeCandidate> candidates, double threshold) {
  PruneOutcome out;
  out.displaced_by.assign(candidates.size(), std::nullopt);
  out.correlation.assign(candidates.size(), 0.0);
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].frequency < candidates[b].frequency;
  });

  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    std::vector<std::size_t> conflicts;
    std::vector<double> corr;
    for (std::size_t j : kept) {
      const double r = shape_correlation(candidates[i].shape, candidates[j].shape);
      if (std::abs(r) >= threshold) {
        conflicts.push_back(j);
        corr.push_back(r);
      }
    }
    if (conflicts.empty()) {
      kept.push_back(i);
      continue;
    }
    const bool wins = std::all_of(conflicts.begin(), conflicts.end(), [&](std::size_t j) {
      return candidates[i].prominence > candidates[j].prominence;
    });
    if (wins) {
      for (std::size_t c = 0; c < conflicts.size(); ++c) {
        const std::size_t j = conflicts[c];
        kept.erase(std::find(kept.begin(), kept.end(), j));
        out.displaced_by[j] = i;
        out.correlation[j] = corr[c];
      }
      kept.push_back(i);
    } else {
      std::size_t strongest = 0;
      for (std::size_t c = 1; c < conflicts.size(); ++c) {
        if (candidates[conflicts[c]].prominence > candidates[conflicts[strongest]].prominence) {
          strongest = c;
        }
      }
      out.displaced_by[i] = conflicts[strongest];
      out.correlation[i] = corr[strongest];
    }
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].frequency < candidates[b].frequency;
  });
  out.kept = std::move(kept);
  return out;
}

// Sum over sites of the L2 norms of the forward differences of the 2-vector
// field along x (columns) and y (rows); differences that would leave the
// grid are omitted. Points are row-major.
inline double shape_total_variation(std::span<const Point2> shape, GridDims dims) {
  if (!dims.structured() || dims.count() != shape.size()) {
    throw ShapeMismatch("total variation needs a structured grid matching the shape");
  }
  double tv = 0.0;
  auto at = [&](std::size_t r, std::size_t c) -> const Point2& { return shape[r * dims.cols + c]; };
  for (std::size_t r = 0; r < dims.rows; ++r) {
    for (std::size_t c = 0; c < dims.cols; ++c) {
      const Point2& g = at(r, c);
      if (c + 1 < dims.cols) {
        const Point2& e = at(r, c + 1);
        tv += std::hypot(e[0] - g[0], e[1] - g[1]);
      }
      if (r + 1 < dims.rows) {
        const Point2& s = at(r + 1, c);
        tv += std::hypot(s[0] - g[0], s[1] - g[1]);
      }
    }
  }
  return tv;
}

// Least-squares nondecreasing fit (pool adjacent violators, unit weights).
inline std::vector<double> isotonic_fit(std::span<const double> y) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (double v : y) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      blocks[blocks.size() - 2].sum += blocks.back().sum;
      blocks[blocks.size() - 2].count += blocks.back().count;
      blocks.pop_back();
    }
  }
  std::vector<double> fit;
  fit.reserve(y.size());
  for (const auto& b : blocks) fit.insert(fit.end(), b.count, b.mean());
  return fit;
}

struct TvFilterOutcome {
  std::vector<bool> keep;
  std::vector<double> residual;  // tv - isotonic trend (NaN when passed through)
  double robust_scale = 0.0;
};

// Rejects candidates whose TV lies more than zscore robust-sigmas above a
// nondecreasing trend in frequency. Input must be in ascending frequency.
// Fewer than three candidates pass through untouched.
inline TvFilterOutcome tv_monotonicity_filter(std::span<const double> tvs, double zscore,
                                              double scale_floor = 0.05) {
  TvFilterOutcome out;
  out.keep.assign(tvs.size(), true);
  out.residual.assign(tvs.size(), std::numeric_limits<double>::quiet_NaN());
  if (tvs.size() < 3) return out;
  const auto trend = isotonic_fit(tvs);
  std::vector<double> r(tvs.size());
  for (std::size_t i = 0; i < tvs.size(); ++i) r[i] = tvs[i] - trend[i];
  const double med = detail::median(r);
  std::vector<double> dev(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) dev[i] = std::abs(r[i] - med);
  std::vector<double> abs_tv(tvs.begin(), tvs.end());
  for (double& v : abs_tv) v = std::abs(v);
  out.robust_scale = std::max(1.4826 * detail::median(dev), scale_floor * detail::median(abs_tv));
  for (std::size_t i = 0; i < tvs.size(); ++i) {
    out.residual[i] = r[i];
    if (r[i] > 0.0 && r[i] > zscore * out.robust_scale) out.keep[i] = false;
  }
  return out;
}

inline ExtractedModes extract_modes(const VibrationGrid& grid, const ExtractionConfig& config) {
  config.validate();
  const auto spectra = grid_spectra(grid);
  const auto search = robust_find_peaks(spectra, config);

  ExtractedModes out;
  out.freq_resolution = spectra.freq_resolution;
  out.sigma_median = search.sigma_median;
  out.reference = config.reference.value_or(select_reference(grid));
  grid.check_channel(out.reference);
  out.modes.n_points = grid.n_points();
  out.modes.point_coords = grid.coords();
  out.modes.dims = grid.dims();

  const auto& peaks = search.peaks;
  if (peaks.empty()) return out;

  const auto shapes = recover_mode_shapes(spectra, peaks.frequencies, out.reference);
  std::vector<ModeCandidate> candidates(peaks.size());
  out.candidates.resize(peaks.size());
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    candidates[i] = {peaks.frequencies[i], peaks.prominences[i], shapes[i]};
    auto& d = out.candidates[i];
    d.frequency = peaks.frequencies[i];
    d.bin = peaks.indices[i];
    d.prominence = peaks.prominences[i];
    d.prominence_ratio = search.sigma_median > 0.0 ? d.prominence / search.sigma_median
                                                   : std::numeric_limits<double>::infinity();
    d.peak_width_hz = detail::half_prominence_width(search.sigma, d.bin) * spectra.freq_resolution;
    // |G| falls to half its peak at f_k (1 +- sqrt(3) zeta) for light damping.
    d.resonance_width_hz = 2.0 * std::sqrt(3.0) * config.damping_ratio * d.frequency;
    d.low_prominence = d.prominence_ratio < config.low_prominence_ratio ||
                       d.peak_width_hz < config.min_width_fraction * d.resonance_width_hz;
  }

  const auto pruned = prune_correlated(candidates, config.shape_corr_threshold);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (pruned.displaced_by[i]) {
      out.candidates[i].stage = CandidateStage::kPrunedCorrelated;
      out.candidates[i].correlated_with = candidates[*pruned.displaced_by[i]].frequency;
      out.candidates[i].correlation = pruned.correlation[i];
    }
  }

  std::vector<std::size_t> survivors = pruned.kept;
  if (grid.dims().structured()) {
    std::vector<double> tvs;
    for (std::size_t i : survivors) {
      const double tv = shape_total_variation(candidates[i].shape, grid.dims());
      out.candidates[i].total_variation = tv;
      tvs.push_back(tv);
    }
    const auto tv_out = tv_monotonicity_filter(tvs, config.tv_outlier_zscore, config.tv_scale_floor);
    std::vector<std::size_t> next;
    for (std::size_t j = 0; j < survivors.size(); ++j) {
      out.candidates[survivors[j]].tv_residual = tv_out.residual[j];
      if (tv_out.keep[j]) {
        next.push_back(survivors[j]);
      } else {
        out.candidates[survivors[j]].stage = CandidateStage::kPrunedTotalVariation;
      }
    }
    survivors = std::move(next);
  }

  for (std::size_t i : survivors) {
    Mode m;
    m.natural_freq = candidates[i].frequency;
    m.damping_ratio = config.damping_ratio;
    m.coupling = 1.0;
    m.shape_grad = candidates[i].shape;
    out.modes.modes.push_back(std::move(m));
  }
  return out;
}

}  // namespace vibrec
