// SPDX-License-Identifier: Apache-2.0
#include "taf/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "taf/eigen_iter.hpp"
#include "taf/rng.hpp"

namespace taf {

std::string_view to_string(InitMethod method) {
  switch (method) {
    case InitMethod::OrthogonalityPromoting: return "orth";
    case InitMethod::Spectral: return "spectral";
    case InitMethod::TruncatedSpectral: return "trunc-spectral";
    case InitMethod::OrthogonalityPromotingMinEig: return "orth-mineig";
  }
  return "?";
}

InitMethod parse_init_method(std::string_view text) {
  if (text == "orth") return InitMethod::OrthogonalityPromoting;
  if (text == "spectral") return InitMethod::Spectral;
  if (text == "trunc-spectral") return InitMethod::TruncatedSpectral;
  if (text == "orth-mineig") return InitMethod::OrthogonalityPromotingMinEig;
  throw InvalidArgument("unknown init method '" + std::string(text) +
                        "' (expected orth|spectral|trunc-spectral|orth-mineig)");
}

std::string_view to_string(NormEstimator which) {
  return which == NormEstimator::MeanIntensity ? "mean-intensity" : "row-norm-ratio";
}

NormEstimator parse_norm_estimator(std::string_view text) {
  if (text == "mean-intensity") return NormEstimator::MeanIntensity;
  if (text == "row-norm-ratio") return NormEstimator::RowNormRatio;
  throw InvalidArgument("unknown norm estimator '" + std::string(text) + "'");
}

void validate(const InitConfig& cfg) {
  if (cfg.power_iters < 1) throw InvalidArgument("InitConfig: power_iters must be >= 1");
  const auto& f = cfg.complement_fraction;
  if (f.den <= 0 || f.num <= 0 || f.num > f.den) {
    throw InvalidArgument("InitConfig: complement fraction must lie in (0, 1]");
  }
  const auto& g = cfg.min_eig_fraction;
  if (g.den <= 0 || g.num <= 0 || g.num > g.den) {
    throw InvalidArgument("InitConfig: min-eig fraction must lie in (0, 1]");
  }
  if (!(cfg.spectral_trunc_alpha > 0.0)) {
    throw InvalidArgument("InitConfig: spectral_trunc_alpha must be positive");
  }
}

Index complement_size(Index m, Fraction f) {
  if (m < 1) throw InvalidArgument("complement_size: m must be >= 1");
  if (f.den <= 0 || f.num <= 0 || f.num > f.den) {
    throw InvalidArgument("complement_size: fraction must lie in (0, 1]");
  }
  const Index size = (f.num * m + f.den - 1) / f.den;
  return std::clamp<Index>(size, 1, m);
}

std::vector<Index> select_complement_indices(const Vec<double>& psi, const Vec<double>& row_norms_sq,
                                             Index size) {
  const Index m = psi.size();
  if (row_norms_sq.size() != m) {
    throw InvalidArgument("select_complement_indices: row norm count does not match psi");
  }
  if (size < 1 || size > m) {
    throw InvalidArgument("select_complement_indices: size " + std::to_string(size) +
                          " outside [1, " + std::to_string(m) + "]");
  }
  Vec<double> ratio(m);
  for (Index i = 0; i < m; ++i) {
    ratio[i] = row_norms_sq[i] > 0.0 ? psi[i] / std::sqrt(row_norms_sq[i]) : 0.0;
  }
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + size, order.end(), [&](Index a, Index b) {
    if (ratio[a] != ratio[b]) return ratio[a] > ratio[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(size));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Index> select_complement_indices(const MeasurementSet& ms, Index size) {
  return select_complement_indices(ms.psi, ms.op.row_norms_sq(), size);
}

double norm_estimate(const MeasurementSet& ms, NormEstimator which) {
  const Index m = ms.measurements();
  if (m < 1) throw InvalidArgument("norm_estimate: empty measurement set");
  const double total = ms.y.sum();
  const double n = static_cast<double>(ms.dim());
  if (which == NormEstimator::MeanIntensity) {
    return std::sqrt(total / static_cast<double>(m) * n / ms.op.expected_row_energy());
  }
  return std::sqrt(n * total / ms.op.row_norms_sq().sum());
}

WeightedGram::WeightedGram(SensingOperator op, Vec<double> weights)
    : op_(std::move(op)), weights_(std::move(weights)) {
  if (weights_.size() != op_.measurements()) {
    throw InvalidArgument("WeightedGram: weight count must equal the measurement count");
  }
}

template <class S>
Vec<S> WeightedGram::apply(const Vec<S>& u) const {
  return op_.visit([&](const auto& concrete) -> Vec<S> {
    using OpScalar = typename std::decay_t<decltype(concrete)>::Scalar;
    if constexpr (!std::is_same_v<OpScalar, S>) {
      throw InvalidArgument("WeightedGram::apply: vector field does not match operator field");
    } else {
      Vec<S> a = concrete.apply(u);
      a.array() *= weights_.array().template cast<S>();
      return concrete.adjoint(a);
    }
  });
}

template Vec<double> WeightedGram::apply(const Vec<double>&) const;
template Vec<cplx> WeightedGram::apply(const Vec<cplx>&) const;

SignalVector WeightedGram::apply(const SignalVector& u) const {
  return std::visit([&](const auto& v) { return SignalVector(apply(v)); }, u.storage());
}

WeightedGram normalized_gram(const MeasurementSet& ms, const std::vector<Index>& subset) {
  if (subset.empty()) throw DegenerateError("normalized_gram: empty index set");
  const auto& norms = ms.op.row_norms_sq();
  Vec<double> w = Vec<double>::Zero(ms.measurements());
  const double inv_size = 1.0 / static_cast<double>(subset.size());
  for (Index i : subset) {
    if (norms[i] > 0.0) w[i] = inv_size / norms[i];
  }
  return WeightedGram(ms.op, std::move(w));
}

WeightedGram spectral_gram(const MeasurementSet& ms, const std::vector<Index>& subset) {
  if (subset.empty()) throw DegenerateError("spectral_gram: empty index set");
  Vec<double> w = Vec<double>::Zero(ms.measurements());
  const double inv_m = 1.0 / static_cast<double>(ms.measurements());
  for (Index i : subset) w[i] = ms.y[i] * inv_m;
  return WeightedGram(ms.op, std::move(w));
}

namespace {

SignalVector leading_direction(const WeightedGram& gram, int iters, std::uint64_t seed) {
  return gram.op().visit([&](const auto& concrete) {
    using S = typename std::decay_t<decltype(concrete)>::Scalar;
    auto matvec = [&](const Vec<S>& u) { return gram.apply(u); };
    return SignalVector(power_iteration<S>(matvec, concrete.dim(), iters, seed));
  });
}

SignalVector smallest_direction(const WeightedGram& gram, int steps, std::uint64_t seed) {
  return gram.op().visit([&](const auto& concrete) {
    using S = typename std::decay_t<decltype(concrete)>::Scalar;
    auto matvec = [&](const Vec<S>& u) { return gram.apply(u); };
    Rng rng = make_rng(seed);
    return SignalVector(lanczos_smallest<S>(matvec, random_unit_vector<S>(concrete.dim(), rng), steps));
  });
}

InitEstimate scaled(const MeasurementSet& ms, const InitConfig& cfg, SignalVector direction,
                    std::vector<Index> subset) {
  const double scale = norm_estimate(ms, cfg.norm_estimator);
  SignalVector z0 = std::visit([&](const auto& v) { return SignalVector(std::decay_t<decltype(v)>(v * scale)); },
                               direction.storage());
  return InitEstimate{.z0 = std::move(z0),
                      .direction = std::move(direction),
                      .norm_estimate = scale,
                      .selected_indices = std::move(subset)};
}

std::vector<Index> all_indices(Index m) {
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

}  // namespace

InitEstimate orthogonality_promoting_init(const MeasurementSet& ms, const InitConfig& cfg,
                                          std::uint64_t seed) {
  validate(cfg);
  const Index size = complement_size(ms.measurements(), cfg.complement_fraction);
  auto subset = select_complement_indices(ms, size);
  const WeightedGram gram = normalized_gram(ms, subset);
  return scaled(ms, cfg, leading_direction(gram, cfg.power_iters, seed), std::move(subset));
}

InitEstimate spectral_init(const MeasurementSet& ms, const InitConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  auto subset = all_indices(ms.measurements());
  const WeightedGram gram = spectral_gram(ms, subset);
  return scaled(ms, cfg, leading_direction(gram, cfg.power_iters, seed), std::move(subset));
}

InitEstimate truncated_spectral_init(const MeasurementSet& ms, const InitConfig& cfg,
                                     std::uint64_t seed) {
  validate(cfg);
  const double alpha = cfg.spectral_trunc_alpha;
  const double bound = std::isinf(alpha) ? std::numeric_limits<double>::infinity()
                                         : alpha * alpha * ms.y.mean();
  std::vector<Index> subset;
  for (Index i = 0; i < ms.measurements(); ++i) {
    if (ms.y[i] <= bound) subset.push_back(i);
  }
  if (subset.empty()) throw DegenerateError("truncated_spectral_init: screening removed every sample");
  const WeightedGram gram = spectral_gram(ms, subset);
  return scaled(ms, cfg, leading_direction(gram, cfg.power_iters, seed), std::move(subset));
}

InitEstimate orthogonality_promoting_min_eig(const MeasurementSet& ms, const InitConfig& cfg,
                                             std::uint64_t seed) {
  validate(cfg);
  const Index m = ms.measurements();
  const Index size = complement_size(m, cfg.min_eig_fraction);
  // Rows outside the (m - size) largest ratios; same tie rule as the
  // complement selection.
  std::vector<Index> subset;
  if (size == m) {
    subset = all_indices(m);
  } else {
    const auto largest = select_complement_indices(ms, m - size);
    subset.reserve(static_cast<std::size_t>(size));
    auto it = largest.begin();
    for (Index i = 0; i < m; ++i) {
      if (it != largest.end() && *it == i) {
        ++it;
      } else {
        subset.push_back(i);
      }
    }
  }
  const WeightedGram gram = normalized_gram(ms, subset);
  return scaled(ms, cfg, smallest_direction(gram, cfg.power_iters, seed), std::move(subset));
}

InitEstimate initialize(const MeasurementSet& ms, const InitConfig& cfg, std::uint64_t seed) {
  switch (cfg.method) {
    case InitMethod::OrthogonalityPromoting: return orthogonality_promoting_init(ms, cfg, seed);
    case InitMethod::Spectral: return spectral_init(ms, cfg, seed);
    case InitMethod::TruncatedSpectral: return truncated_spectral_init(ms, cfg, seed);
    case InitMethod::OrthogonalityPromotingMinEig:
      return orthogonality_promoting_min_eig(ms, cfg, seed);
  }
  throw InvalidArgument("initialize: unknown method");
}

}  // namespace taf
