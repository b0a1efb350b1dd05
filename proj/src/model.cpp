// SPDX-License-Identifier: Apache-2.0
#include "taf/model.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/FFT>

#include "taf/rng.hpp"

namespace taf {

namespace {

Eigen::FFT<double>& thread_fft() {
  // Eigen's FFT caches plans internally, so each thread keeps its own.
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

bool is_quarter_phase(cplx d) {
  return (d == cplx(1, 0)) || (d == cplx(-1, 0)) || (d == cplx(0, 1)) || (d == cplx(0, -1));
}

void require_dims(Index n, Index m) {
  if (n < 1) throw InvalidArgument("sensing operator: dimension n must be >= 1");
  if (m < 1) throw InvalidArgument("sensing operator: measurement count m must be >= 1");
}

}  // namespace

template <class S>
DenseOperator<S>::DenseOperator(Mat<S> rows) : rows_(std::move(rows)) {
  require_dims(rows_.cols(), rows_.rows());
  if (!rows_.allFinite()) throw InvalidArgument("DenseOperator: entries must be finite");
  row_norms_sq_ = rows_.rowwise().squaredNorm();
}

template <class S>
Vec<S> DenseOperator<S>::apply(const Vec<S>& x) const {
  if (x.size() != dim()) throw InvalidArgument("DenseOperator::apply: dimension mismatch");
  Vec<S> u(measurements());
  u.noalias() = rows_ * x;
  return u;
}

template <class S>
Vec<S> DenseOperator<S>::adjoint(const Vec<S>& v) const {
  if (v.size() != measurements()) throw InvalidArgument("DenseOperator::adjoint: size mismatch");
  Vec<S> g(dim());
  g.noalias() = rows_.adjoint() * v;
  return g;
}

template class DenseOperator<double>;
template class DenseOperator<cplx>;

CdpOperator::CdpOperator(std::vector<Vec<cplx>> masks) : masks_(std::move(masks)) {
  if (masks_.empty()) throw InvalidArgument("CdpOperator: mask count K must be >= 1");
  n_ = masks_.front().size();
  require_dims(n_, n_);
  for (const auto& mask : masks_) {
    if (mask.size() != n_) throw InvalidArgument("CdpOperator: masks must share one length");
    for (Index l = 0; l < n_; ++l) {
      if (!is_quarter_phase(mask[l])) {
        throw InvalidArgument("CdpOperator: mask entries must lie in {1, -1, j, -j}");
      }
    }
  }
  row_norms_sq_ = Vec<double>::Ones(measurements());
}

Vec<cplx> CdpOperator::apply(const Vec<cplx>& x) const {
  if (x.size() != n_) throw InvalidArgument("CdpOperator::apply: dimension mismatch");
  auto& fft = thread_fft();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
  Vec<cplx> out(measurements());
  Vec<cplx> masked(n_), spectrum(n_);
  for (Index k = 0; k < masks(); ++k) {
    masked = masks_[k].cwiseProduct(x);
    fft.fwd(spectrum, masked);
    out.segment(k * n_, n_) = spectrum * scale;
  }
  return out;
}

Vec<cplx> CdpOperator::adjoint(const Vec<cplx>& v) const {
  if (v.size() != measurements()) throw InvalidArgument("CdpOperator::adjoint: size mismatch");
  auto& fft = thread_fft();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
  Vec<cplx> out = Vec<cplx>::Zero(n_);
  Vec<cplx> block(n_), back(n_);
  for (Index k = 0; k < masks(); ++k) {
    block = v.segment(k * n_, n_);
    fft.inv(back, block);
    out += masks_[k].conjugate().cwiseProduct(back);
  }
  return out * scale;
}

SensingOperator::SensingOperator(Variant op) : impl_(std::make_shared<const Variant>(std::move(op))) {}

Field SensingOperator::field() const {
  return visit([](const auto& op) { return field_of<typename std::decay_t<decltype(op)>::Scalar>; });
}

Index SensingOperator::dim() const {
  return visit([](const auto& op) { return op.dim(); });
}

Index SensingOperator::measurements() const {
  return visit([](const auto& op) { return op.measurements(); });
}

SignalVector SensingOperator::apply(const SignalVector& x) const {
  return visit([&](const auto& op) {
    using S = typename std::decay_t<decltype(op)>::Scalar;
    return SignalVector(op.apply(x.as<S>()));
  });
}

SignalVector SensingOperator::adjoint(const SignalVector& v) const {
  return visit([&](const auto& op) {
    using S = typename std::decay_t<decltype(op)>::Scalar;
    return SignalVector(op.adjoint(v.as<S>()));
  });
}

const Vec<double>& SensingOperator::row_norms_sq() const {
  return visit([](const auto& op) -> const Vec<double>& { return op.row_norms_sq(); });
}

double SensingOperator::expected_row_energy() const {
  return visit([](const auto& op) { return op.expected_row_energy(); });
}

SensingOperator gaussian_operator(Index n, Index m, Field field, std::uint64_t seed) {
  require_dims(n, m);
  Rng rng = make_rng(seed);
  if (field == Field::Real) {
    Mat<double> rows(m, n);
    rows = Eigen::Map<const Mat<double>>(random_gaussian<double>(m * n, rng).data(), m, n);
    return SensingOperator(DenseOperator<double>(std::move(rows)));
  }
  Mat<cplx> rows(m, n);
  rows = Eigen::Map<const Mat<cplx>>(random_gaussian<cplx>(m * n, rng).data(), m, n);
  return SensingOperator(DenseOperator<cplx>(std::move(rows)));
}

SensingOperator cdp_operator(Index n, Index masks, std::uint64_t seed) {
  if (masks < 1) throw InvalidArgument("cdp_operator: mask count K must be >= 1");
  if (n < 1) throw InvalidArgument("cdp_operator: dimension n must be >= 1");
  static constexpr cplx kPhases[4] = {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)};
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<Vec<cplx>> entries(static_cast<std::size_t>(masks), Vec<cplx>(n));
  for (auto& mask : entries) {
    for (Index l = 0; l < n; ++l) mask[l] = kPhases[pick(rng)];
  }
  return SensingOperator(CdpOperator(std::move(entries)));
}

SensingOperator cdp_operator(std::vector<Vec<cplx>> masks) {
  return SensingOperator(CdpOperator(std::move(masks)));
}

SensingOperator dense_operator(Mat<double> rows) {
  return SensingOperator(DenseOperator<double>(std::move(rows)));
}

SensingOperator dense_operator(Mat<cplx> rows) {
  return SensingOperator(DenseOperator<cplx>(std::move(rows)));
}

SignalVector random_signal(Index n, Field field, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("random_signal: dimension n must be >= 1");
  Rng rng = make_rng(seed);
  if (field == Field::Real) return SignalVector(random_gaussian<double>(n, rng));
  return SignalVector(random_gaussian<cplx>(n, rng));
}

namespace {

void check_amplitudes(const SensingOperator& op, const Vec<double>& psi) {
  if (psi.size() != op.measurements()) {
    throw InvalidArgument("measurements: expected " + std::to_string(op.measurements()) +
                          " amplitudes, got " + std::to_string(psi.size()));
  }
  if (!psi.allFinite() || (psi.array() < 0.0).any()) {
    throw InvalidArgument("measurements: amplitudes must be finite and nonnegative");
  }
}

}  // namespace

MeasurementSet generate_measurements(const SensingOperator& op, const SignalVector& x,
                                     double noise_sigma, std::uint64_t seed) {
  if (x.size() != op.dim()) {
    throw InvalidArgument("generate_measurements: signal has dimension " + std::to_string(x.size()) +
                          ", operator expects " + std::to_string(op.dim()));
  }
  if (x.field() != op.field()) {
    throw InvalidArgument("generate_measurements: signal field does not match operator field");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidArgument("generate_measurements: noise sigma must be finite and >= 0");
  }

  const Index m = op.measurements();
  Vec<double> eta;
  if (noise_sigma > 0.0) {
    Rng rng = make_rng(seed);
    eta = random_gaussian<double>(m, rng) * noise_sigma;
  }

  Vec<double> psi = op.visit([&](const auto& concrete) -> Vec<double> {
    using S = typename std::decay_t<decltype(concrete)>::Scalar;
    Vec<S> u = concrete.apply(x.as<S>());
    if (eta.size() == m) u += eta.template cast<S>();
    return u.cwiseAbs();
  });

  MeasurementSet ms{.psi = std::move(psi),
                    .y = {},
                    .op = op,
                    .truth = x,
                    .noise_sigma = noise_sigma,
                    .noise = std::move(eta)};
  ms.y = ms.psi.cwiseAbs2();
  return ms;
}

MeasurementSet measurements_from_amplitudes(const SensingOperator& op, Vec<double> psi) {
  check_amplitudes(op, psi);
  MeasurementSet ms{.psi = std::move(psi), .y = {}, .op = op, .truth = std::nullopt};
  ms.y = ms.psi.cwiseAbs2();
  return ms;
}

}  // namespace taf
