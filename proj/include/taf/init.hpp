// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "taf/model.hpp"
#include "taf/types.hpp"

namespace taf {

enum class InitMethod {
  OrthogonalityPromoting,
  Spectral,
  TruncatedSpectral,
  OrthogonalityPromotingMinEig,
};

enum class NormEstimator { MeanIntensity, RowNormRatio };

std::string_view to_string(InitMethod method);
InitMethod parse_init_method(std::string_view text);
std::string_view to_string(NormEstimator which);
NormEstimator parse_norm_estimator(std::string_view text);

struct Fraction {
  std::int64_t num = 1;
  std::int64_t den = 6;
};

struct InitConfig {
  InitMethod method = InitMethod::OrthogonalityPromoting;
  /// Power iterations (or Lanczos steps for the min-eigenvalue variant).
  int power_iters = 50;
  /// |complement set| = ceil(num/den * m).
  Fraction complement_fraction{};
  /// The min-eigenvalue variant works on the ceil(num/den * m) indices with
  /// the smallest ratios psi_i/||a_i||.
  Fraction min_eig_fraction{1, 2};
  /// Truncated spectral screening keeps y_i <= alpha^2 * mean(y).
  double spectral_trunc_alpha = 3.0;
  NormEstimator norm_estimator = NormEstimator::MeanIntensity;
};

void validate(const InitConfig& cfg);

struct InitEstimate {
  SignalVector z0;
  SignalVector direction;  ///< unit norm
  double norm_estimate = 0.0;
  /// Rows entering the eigenproblem: the largest-ratio set for the
  /// orthogonality-promoting method, the smallest-ratio set for the
  /// min-eigenvalue variant, and the screened set for the spectral methods.
  std::vector<Index> selected_indices;
};

/// ceil(f * m) in exact integer arithmetic, clamped to [1, m].
Index complement_size(Index m, Fraction f);

/// Indices of the `size` largest ratios psi_i / ||a_i||, ties broken by the
/// lower index; returned in ascending index order.
std::vector<Index> select_complement_indices(const Vec<double>& psi, const Vec<double>& row_norms_sq,
                                             Index size);
std::vector<Index> select_complement_indices(const MeasurementSet& ms, Index size);

/// MeanIntensity: sqrt(mean(y) * n / E||a_i||^2), which is sqrt(mean(y)) for
/// Gaussian designs and sqrt(sum(y)/K) for unitary CDP.
/// RowNormRatio: sqrt(n sum(y) / sum ||a_i||^2).
double norm_estimate(const MeasurementSet& ms, NormEstimator which);

/// Matrix-free u -> A^H diag(w) A u = sum_i w_i a_i a_i^H u.
class WeightedGram {
 public:
  WeightedGram(SensingOperator op, Vec<double> weights);

  template <class S>
  Vec<S> apply(const Vec<S>& u) const;

  SignalVector apply(const SignalVector& u) const;

  const Vec<double>& weights() const { return weights_; }
  const SensingOperator& op() const { return op_; }

 private:
  SensingOperator op_;
  Vec<double> weights_;
};

/// (1/|S|) sum_{i in S} a_i a_i^H / ||a_i||^2.
WeightedGram normalized_gram(const MeasurementSet& ms, const std::vector<Index>& subset);
/// (1/m) sum_{i in S} y_i a_i a_i^H.
WeightedGram spectral_gram(const MeasurementSet& ms, const std::vector<Index>& subset);

InitEstimate orthogonality_promoting_init(const MeasurementSet& ms, const InitConfig& cfg,
                                          std::uint64_t seed);
InitEstimate spectral_init(const MeasurementSet& ms, const InitConfig& cfg, std::uint64_t seed);
InitEstimate truncated_spectral_init(const MeasurementSet& ms, const InitConfig& cfg,
                                     std::uint64_t seed);
InitEstimate orthogonality_promoting_min_eig(const MeasurementSet& ms, const InitConfig& cfg,
                                             std::uint64_t seed);

/// Dispatches on cfg.method.
InitEstimate initialize(const MeasurementSet& ms, const InitConfig& cfg, std::uint64_t seed);

}  // namespace taf
