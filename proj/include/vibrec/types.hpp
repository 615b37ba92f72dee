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

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vibrec/error.hpp"

namespace vibrec {

using Complex = std::complex<double>;
using Point2 = std::array<double, 2>;

inline constexpr double kPi = 3.14159265358979323846;

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Mono waveform. Amplitude is dimensionless (nominally [-1, 1]).
struct SoundSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }

  void validate() const {
    if (sample_rate <= 0) throw InvalidSignal("sample_rate must be positive");
    if (!all_finite(samples)) throw InvalidSignal("signal contains non-finite samples");
  }
};

// One-sided DFT (DC through Nyquist) of a real signal of `source_length`
// samples.
struct Spectrum {
  std::vector<Complex> bins;
  double freq_resolution = 1.0;
  std::size_t source_length = 0;

  double frequency(std::size_t bin) const { return static_cast<double>(bin) * freq_resolution; }
};

struct PeakList {
  std::vector<std::size_t> indices;
  std::vector<double> frequencies;
  std::vector<double> prominences;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

// A single measured 1-D vibration signal: one axis of one surface point.
struct Channel {
  std::size_t point = 0;
  std::size_t axis = 0;

  friend bool operator==(const Channel&, const Channel&) = default;
};

// Physical layout of the measured points. rows == cols == 0 declares an
// unstructured point cloud.
struct GridDims {
  std::size_t rows = 0;
  std::size_t cols = 0;

  bool structured() const { return rows > 0 && cols > 0; }
  std::size_t count() const { return rows * cols; }

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

// N points x 2 axes x T samples of speckle-shift signals, stored point-major,
// then axis, then time.
class VibrationGrid {
 public:
  VibrationGrid() = default;

  VibrationGrid(std::size_t n_points, std::size_t n_samples, int sample_rate)
      : n_points_(n_points),
        n_samples_(n_samples),
        sample_rate_(sample_rate),
        data_(n_points * 2 * n_samples, 0.0),
        coords_(n_points, Point2{0.0, 0.0}) {}

  std::size_t n_points() const { return n_points_; }
  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_channels() const { return 2 * n_points_; }
  int sample_rate() const { return sample_rate_; }

  const GridDims& dims() const { return dims_; }
  void set_dims(GridDims dims) {
    if (dims.structured() && dims.count() != n_points_) {
      throw ShapeMismatch("grid dims " + std::to_string(dims.rows) + "x" +
                          std::to_string(dims.cols) + " do not match " +
                          std::to_string(n_points_) + " points");
    }
    dims_ = dims;
  }

  std::vector<Point2>& coords() { return coords_; }
  const std::vector<Point2>& coords() const { return coords_; }

  std::span<double> channel(std::size_t point, std::size_t axis) {
    return {data_.data() + channel_offset(point, axis), n_samples_};
  }
  std::span<const double> channel(std::size_t point, std::size_t axis) const {
    return {data_.data() + channel_offset(point, axis), n_samples_};
  }
  std::span<double> channel(Channel c) { return channel(c.point, c.axis); }
  std::span<const double> channel(Channel c) const { return channel(c.point, c.axis); }

  // Flat channel index c = 2 * point + axis.
  std::span<double> channel(std::size_t flat) { return channel(flat / 2, flat % 2); }
  std::span<const double> channel(std::size_t flat) const { return channel(flat / 2, flat % 2); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void validate() const {
    if (n_points_ < 1) throw InvalidSignal("grid must contain at least one point");
    if (n_samples_ < 2) throw InvalidSignal("grid must contain at least two samples");
    if (sample_rate_ <= 0) throw InvalidSignal("grid sample_rate must be positive");
    if (!all_finite(data_)) throw InvalidSignal("grid contains non-finite samples");
  }

  void check_channel(Channel c) const {
    if (c.point >= n_points_ || c.axis >= 2) {
      throw IndexError("channel (" + std::to_string(c.point) + ", " + std::to_string(c.axis) +
                       ") out of range for " + std::to_string(n_points_) + " points");
    }
  }

  friend bool operator==(const VibrationGrid&, const VibrationGrid&) = default;

 private:
  std::size_t channel_offset(std::size_t point, std::size_t axis) const {
    return (point * 2 + axis) * n_samples_;
  }

  std::size_t n_points_ = 0;
  std::size_t n_samples_ = 0;
  int sample_rate_ = 0;
  GridDims dims_{};
  std::vector<double> data_;
  std::vector<Point2> coords_;
};

// Dense row-major complex matrix (STFT frames x bins).
struct ComplexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> values;

  Complex& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

}  // namespace vibrec
