// SPDX-License-Identifier: Apache-2.0
//
// Reproducible random streams. Every stream is keyed by
// (master seed, setup index, trial index, purpose) and seeded by hashing
// that key, so trials can run in any order or on any thread and still
// produce bit-identical draws.

#pragma once

#include "starcf/linalg.hpp"

#include <cstdint>
#include <random>

namespace starcf {

enum class StreamPurpose : std::uint64_t {
  kGeometry = 1,
  kStarPhases = 2,
  kWarmup = 3,
  kEvaluation = 4,
  kTest = 5,
};

inline constexpr std::uint64_t kSetupLevel = ~std::uint64_t{0};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t setup, std::uint64_t trial,
                                StreamPurpose purpose) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ setup);
  h = splitmix64(h ^ trial);
  return splitmix64(h ^ static_cast<std::uint64_t>(purpose));
}

/// Engine plus the distributions the simulation needs.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}
  RandomStream(std::uint64_t seed, std::uint64_t setup, std::uint64_t trial, StreamPurpose purpose)
      : engine_(stream_key(seed, setup, trial, purpose)) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }

  /// CN(0,1) sample.
  cdouble cnormal() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

  /// rows x cols matrix of i.i.d. CN(0,1).
  CMat cnormal(Eigen::Index rows, Eigen::Index cols) {
    CMat out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = cnormal();
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace starcf
