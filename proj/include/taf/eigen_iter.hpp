// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Eigenvalues>

#include "taf/rng.hpp"
#include "taf/types.hpp"

namespace taf {

/// Power iteration on a Hermitian PSD operator given as a callable
/// `Vec<S>(const Vec<S>&)`. Applies matvec + renormalize `iters` times
/// starting from `start` and returns the final unit vector.
template <class S, class MatVec>
Vec<S> power_iteration(MatVec&& matvec, Vec<S> start, int iters) {
  if (iters < 1) throw InvalidArgument("power_iteration: iteration count must be >= 1");
  const double start_norm = start.norm();
  if (!(start_norm > 0.0) || !std::isfinite(start_norm)) {
    throw InvalidArgument("power_iteration: start vector must be nonzero and finite");
  }
  Vec<S> v = start / start_norm;
  for (int t = 0; t < iters; ++t) {
    Vec<S> w = matvec(v);
    const double nrm = w.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      throw DegenerateError("power_iteration: iterate collapsed at step " + std::to_string(t + 1) +
                            " (operator annihilates the current vector)");
    }
    v = w / nrm;
  }
  return v;
}

/// Seeded variant: the start vector is uniform on the unit sphere.
template <class S, class MatVec>
Vec<S> power_iteration(MatVec&& matvec, Index n, int iters, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return power_iteration<S>(std::forward<MatVec>(matvec), random_unit_vector<S>(n, rng), iters);
}

/// Eigenvector of the smallest eigenvalue of a Hermitian operator via
/// Lanczos with full reorthogonalization, using at most `steps` Krylov
/// vectors (capped at n). With steps >= n the answer is exact up to roundoff.
template <class S, class MatVec>
Vec<S> lanczos_smallest(MatVec&& matvec, Vec<S> start, int steps) {
  const Index n = start.size();
  if (steps < 1) throw InvalidArgument("lanczos_smallest: step count must be >= 1");
  const double start_norm = start.norm();
  if (!(start_norm > 0.0) || !std::isfinite(start_norm)) {
    throw InvalidArgument("lanczos_smallest: start vector must be nonzero and finite");
  }
  const Index k_max = std::min<Index>(steps, n);

  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> basis(n, k_max);
  Vec<double> alpha(k_max), beta(k_max);
  basis.col(0) = start / start_norm;

  Index k = 0;
  double scale = 0.0;
  for (; k < k_max; ++k) {
    Vec<S> w = matvec(Vec<S>(basis.col(k)));
    alpha[k] = std::real(basis.col(k).dot(w));
    scale = std::max(scale, std::abs(alpha[k]));
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Vec<S> coeff = basis.leftCols(k + 1).adjoint() * w;
      w.noalias() -= basis.leftCols(k + 1) * coeff;
    }
    beta[k] = w.norm();
    if (!std::isfinite(beta[k])) throw DegenerateError("lanczos_smallest: non-finite iterate");
    if (k + 1 == k_max || beta[k] <= 1e-14 * std::max(scale, 1e-300)) {
      ++k;
      break;
    }
    basis.col(k + 1) = w / beta[k];
  }

  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    tri(i, i) = alpha[i];
    if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
  if (eig.info() != Eigen::Success) throw DegenerateError("lanczos_smallest: tridiagonal solve failed");
  const Vec<double> ritz = eig.eigenvectors().col(0);  // ascending order
  Vec<S> v = basis.leftCols(k) * ritz.template cast<S>();
  const double nrm = v.norm();
  if (!(nrm > 0.0)) throw DegenerateError("lanczos_smallest: degenerate Ritz vector");
  return v / nrm;
}

}  // namespace taf
