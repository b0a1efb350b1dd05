// SPDX-License-Identifier: Apache-2.0
#include "taf/metrics.hpp"

#include <numbers>

namespace taf {

double dist(const SignalVector& z, const SignalVector& x) {
  require_same_field(z, x, "dist");
  return std::visit(
      [&](const auto& zv) {
        using V = std::decay_t<decltype(zv)>;
        return dist(zv, x.as<typename V::Scalar>());
      },
      z.storage());
}

double relative_error(const SignalVector& z, const SignalVector& x) {
  require_same_field(z, x, "relative_error");
  const double nx = x.norm();
  if (!(nx > 0.0)) throw InvalidArgument("relative error: reference signal has zero norm");
  return dist(z, x) / nx;
}

double phase_constant(const SignalVector& z, const SignalVector& x) {
  require_same_field(z, x, "phase_constant");
  if (z.field() == Field::Real) {
    const auto& zv = z.as<double>();
    const auto& xv = x.as<double>();
    return (zv - xv).norm() <= (zv + xv).norm() ? 0.0 : std::numbers::pi;
  }
  const cplx inner = x.as<cplx>().dot(z.as<cplx>());
  return inner == cplx(0.0, 0.0) ? 0.0 : std::arg(inner);
}

EvalResult evaluate(const SignalVector& z, const SignalVector& x, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("evaluate: threshold must be positive");
  EvalResult r;
  r.dist = dist(z, x);
  r.relative_error = relative_error(z, x);
  r.threshold = threshold;
  r.success = r.relative_error < threshold;
  return r;
}

double success_rate(std::span<const double> errors, double threshold) {
  if (errors.empty()) throw InvalidArgument("success_rate: empty error list");
  if (!(threshold > 0.0)) throw InvalidArgument("success_rate: threshold must be positive");
  const auto hits = std::count_if(errors.begin(), errors.end(),
                                  [threshold](double e) { return e < threshold; });
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

double relative_mse(const SignalVector& z, const SignalVector& x) {
  const double e = relative_error(z, x);
  return e * e;
}

double snr_db(const SensingOperator& op, const SignalVector& x, const Vec<double>& eta) {
  if (eta.size() != op.measurements()) {
    throw InvalidArgument("snr_db: noise vector length must equal the measurement count");
  }
  const double noise_energy = eta.squaredNorm();
  if (!(noise_energy > 0.0)) throw InvalidArgument("snr_db: noise vector is zero");
  const double signal_energy = op.visit([&](const auto& concrete) {
    using S = typename std::decay_t<decltype(concrete)>::Scalar;
    return concrete.apply(x.as<S>()).squaredNorm();
  });
  return 10.0 * std::log10(signal_energy / noise_energy);
}

}  // namespace taf
