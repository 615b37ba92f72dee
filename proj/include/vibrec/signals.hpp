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

// Deterministic test sources for the simulator.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vibrec/types.hpp"

namespace vibrec {

inline std::size_t sample_count(double seconds, int sample_rate) {
  if (!(seconds > 0.0) || sample_rate <= 0) throw InvalidSignal("duration and sample rate must be positive");
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

// Exponential sweep from f0 to f1 Hz over the whole duration.
inline SoundSignal log_chirp(double f0, double f1, double seconds, int sample_rate, double amplitude = 0.8) {
  if (!(f0 > 0.0 && f1 > f0)) throw InvalidBand("log_chirp needs 0 < f0 < f1");
  const std::size_t n = sample_count(seconds, sample_rate);
  const double k = std::log(f1 / f0);
  SoundSignal s{std::vector<double>(n), sample_rate};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double phase = 2.0 * kPi * f0 * seconds / k * (std::exp(t / seconds * k) - 1.0);
    s.samples[i] = amplitude * std::sin(phase);
  }
  return s;
}

struct MusicSpec {
  std::size_t notes = 6;
  double low_note = 110.0;       // fundamental range, Hz
  double high_note = 600.0;
  std::size_t harmonics = 24;    // partial h has amplitude 1/h
  double max_partial = 10000.0;  // partials above this are dropped
  double decay = 3.0;            // 1/s, note envelope
  double peak = 0.8;
};

// Overlapping decaying harmonic notes at random pitches: each note starts at
// a multiple of duration/notes and lasts two slots.
inline SoundSignal music_like(double seconds, int sample_rate, std::uint64_t seed, const MusicSpec& spec = {}) {
  const std::size_t n = sample_count(seconds, sample_rate);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pitch(spec.low_note, spec.high_note);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<double> s(n, 0.0);
  const std::size_t slot = std::max<std::size_t>(1, n / std::max<std::size_t>(1, spec.notes));
  for (std::size_t i = 0; i < spec.notes; ++i) {
    const double f0 = pitch(rng);
    const std::size_t start = std::min(n, i * slot);
    const std::size_t stop = std::min(n, start + 2 * slot);
    for (std::size_t h = 1; h <= spec.harmonics; ++h) {
      const double ph = phase(rng);
      const double f = f0 * static_cast<double>(h);
      if (f >= spec.max_partial || f >= sample_rate / 2.0) continue;
      for (std::size_t t = start; t < stop; ++t) {
        const double env = std::exp(-static_cast<double>(t - start) / sample_rate * spec.decay);
        s[t] += env * std::sin(2.0 * kPi * f * static_cast<double>(t) / sample_rate + ph) /
                static_cast<double>(h);
      }
    }
  }
  double peak = 0.0;
  for (double v : s) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : s) v *= spec.peak / peak;
  }
  return {std::move(s), sample_rate};
}

// Unit impulse at `at`.
inline SoundSignal impulse(std::size_t length, int sample_rate, std::size_t at = 0) {
  if (at >= length) throw IndexError("impulse position outside signal");
  SoundSignal s{std::vector<double>(length, 0.0), sample_rate};
  s.samples[at] = 1.0;
  return s;
}

// Short exponentially decaying white-noise burst starting at `at`.
inline SoundSignal clap(std::size_t length, int sample_rate, std::uint64_t seed, double decay_ms = 2.0,
                        std::size_t at = 0) {
  if (at >= length) throw IndexError("clap position outside signal");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SoundSignal s{std::vector<double>(length, 0.0), sample_rate};
  const double tau = decay_ms * 1e-3 * sample_rate;
  const auto len = static_cast<std::size_t>(std::ceil(10.0 * tau));
  for (std::size_t t = at; t < std::min(length, at + len); ++t) {
    s.samples[t] = noise(rng) * std::exp(-static_cast<double>(t - at) / tau);
  }
  return s;
}

inline SoundSignal tone(double freq, double seconds, int sample_rate, double amplitude = 0.5) {
  const std::size_t n = sample_count(seconds, sample_rate);
  SoundSignal s{std::vector<double>(n), sample_rate};
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amplitude * std::sin(2.0 * kPi * freq * static_cast<double>(i) / sample_rate);
  }
  return s;
}

}  // namespace vibrec
