// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "taf/types.hpp"

namespace taf {

/// Explicit m x n measurement matrix. Row i holds a_i^T (real) or a_i^H
/// (complex), so apply(x)_i = <a_i, x>.
template <class S>
class DenseOperator {
 public:
  using Scalar = S;

  explicit DenseOperator(Mat<S> rows);

  Index dim() const { return rows_.cols(); }
  Index measurements() const { return rows_.rows(); }

  Vec<S> apply(const Vec<S>& x) const;
  Vec<S> adjoint(const Vec<S>& v) const;

  const Mat<S>& matrix() const { return rows_; }
  const Vec<double>& row_norms_sq() const { return row_norms_sq_; }

  /// E||a_i||^2 for a standard Gaussian design; the normalization the
  /// mean-intensity norm estimate assumes.
  double expected_row_energy() const { return static_cast<double>(dim()); }

 private:
  Mat<S> rows_;
  Vec<double> row_norms_sq_;
};

/// Coded diffraction patterns: psi^(k) = |F D_k x| with F the unitary DFT
/// (1/sqrt(n) scaling) and D_k diagonal masks over {1, -1, j, -j}.
/// Measurements are stacked mask-major: index k*n + l.
class CdpOperator {
 public:
  using Scalar = cplx;

  explicit CdpOperator(std::vector<Vec<cplx>> masks);

  Index dim() const { return n_; }
  Index measurements() const { return n_ * masks(); }
  Index masks() const { return static_cast<Index>(masks_.size()); }

  Vec<cplx> apply(const Vec<cplx>& x) const;
  Vec<cplx> adjoint(const Vec<cplx>& v) const;

  const std::vector<Vec<cplx>>& mask_entries() const { return masks_; }
  /// Every row of F D_k has unit norm.
  const Vec<double>& row_norms_sq() const { return row_norms_sq_; }
  double expected_row_energy() const { return 1.0; }

 private:
  Index n_;
  std::vector<Vec<cplx>> masks_;
  Vec<double> row_norms_sq_;
};

/// Shared, immutable handle to one of the concrete measurement maps.
class SensingOperator {
 public:
  using Variant = std::variant<DenseOperator<double>, DenseOperator<cplx>, CdpOperator>;

  explicit SensingOperator(Variant op);

  Field field() const;
  Index dim() const;
  Index measurements() const;
  bool is_cdp() const { return std::holds_alternative<CdpOperator>(*impl_); }

  SignalVector apply(const SignalVector& x) const;
  SignalVector adjoint(const SignalVector& v) const;

  const Vec<double>& row_norms_sq() const;
  double expected_row_energy() const;

  const Variant& variant() const { return *impl_; }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), *impl_);
  }

 private:
  std::shared_ptr<const Variant> impl_;
};

SensingOperator gaussian_operator(Index n, Index m, Field field, std::uint64_t seed);
SensingOperator cdp_operator(Index n, Index masks, std::uint64_t seed);
SensingOperator cdp_operator(std::vector<Vec<cplx>> masks);
SensingOperator dense_operator(Mat<double> rows);
SensingOperator dense_operator(Mat<cplx> rows);

/// Draws x ~ N(0, I_n) or CN(0, I_n).
SignalVector random_signal(Index n, Field field, std::uint64_t seed);

struct MeasurementSet {
  Vec<double> psi;  ///< amplitudes, psi_i >= 0
  Vec<double> y;    ///< intensities psi_i^2
  SensingOperator op;
  std::optional<SignalVector> truth;
  double noise_sigma = 0.0;
  Vec<double> noise;  ///< realized eta (empty when noiseless)

  Index measurements() const { return psi.size(); }
  Index dim() const { return op.dim(); }
  Field field() const { return op.field(); }
};

/// psi_i = |(A x)_i + eta_i| with eta_i ~ N(0, sigma^2) real, added to the
/// inner product as a real scalar in both fields.
MeasurementSet generate_measurements(const SensingOperator& op, const SignalVector& x,
                                     double noise_sigma, std::uint64_t seed);

/// Wraps externally supplied amplitudes.
MeasurementSet measurements_from_amplitudes(const SensingOperator& op, Vec<double> psi);

}  // namespace taf
