// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "taf/types.hpp"

namespace taf {

/// Role of a random stream inside one trial. Each role gets an independent
/// generator so that, e.g., changing the noise level does not perturb the
/// sensing vectors drawn for the same trial.
enum class Stream : std::uint64_t {
  Operator = 1,
  Signal = 2,
  Noise = 3,
  PowerStart = 4,
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the stream keyed by (master, cell, trial, role). Pure function of
/// its arguments, so trials can be generated in any order or in parallel.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t trial,
                                    Stream role) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ cell);
  h = mix64(h ^ trial);
  return mix64(h ^ static_cast<std::uint64_t>(role));
}

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

/// Real: i.i.d. N(0, 1). Complex: CN(0, 1), i.e. N(0, 1/2) per component.
template <class Scalar>
Vec<Scalar> random_gaussian(Index n, Rng& rng) {
  Vec<Scalar> v(n);
  if constexpr (is_complex_v<Scalar>) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    for (Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      v[i] = cplx(re, im);
    }
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  }
  return v;
}

template <class Scalar>
Vec<Scalar> random_unit_vector(Index n, Rng& rng) {
  Vec<Scalar> v = random_gaussian<Scalar>(n, rng);
  return v / v.norm();
}

}  // namespace taf
