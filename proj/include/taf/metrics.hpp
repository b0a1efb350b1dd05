// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "taf/model.hpp"
#include "taf/types.hpp"

namespace taf {

inline constexpr double kSuccessThreshold = 1e-5;

/// Distance modulo the global phase: min over the two signs (real) or over
/// the unimodular constant e^{j phi} (complex). The complex minimizer is
/// phi* = arg(x^H z); the distance is evaluated as ||z - e^{j phi*} x||, which
/// equals sqrt(||z||^2 + ||x||^2 - 2|x^H z|) without the cancellation.
template <class S>
double dist(const Vec<S>& z, const Vec<S>& x) {
  if constexpr (is_complex_v<S>) {
    const cplx inner = x.dot(z);  // x^H z
    const double mag = std::abs(inner);
    const cplx phase = mag > 0.0 ? inner / mag : cplx(1.0, 0.0);
    return (z - phase * x).norm();
  } else {
    return std::min((z - x).norm(), (z + x).norm());
  }
}

template <class S>
double relative_error(const Vec<S>& z, const Vec<S>& x) {
  const double nx = x.norm();
  if (!(nx > 0.0)) throw InvalidArgument("relative error: reference signal has zero norm");
  return dist(z, x) / nx;
}

double dist(const SignalVector& z, const SignalVector& x);
double relative_error(const SignalVector& z, const SignalVector& x);

/// Real: 0 when ||z - x|| <= ||z + x||, else pi. Complex: arg(x^H z), 0 when
/// x^H z = 0.
double phase_constant(const SignalVector& z, const SignalVector& x);

struct EvalResult {
  double dist = 0.0;
  double relative_error = 0.0;
  bool success = false;
  double threshold = kSuccessThreshold;
};

EvalResult evaluate(const SignalVector& z, const SignalVector& x,
                    double threshold = kSuccessThreshold);

/// Fraction of entries strictly below `threshold`.
double success_rate(std::span<const double> errors, double threshold = kSuccessThreshold);

/// dist^2(z, x) / ||x||^2.
double relative_mse(const SignalVector& z, const SignalVector& x);

/// 10 log10( sum |<a_i, x>|^2 / sum eta_i^2 ).
double snr_db(const SensingOperator& op, const SignalVector& x, const Vec<double>& eta);

}  // namespace taf
