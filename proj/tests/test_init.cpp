// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "taf/eigen_iter.hpp"
#include "taf/init.hpp"
#include "taf/metrics.hpp"

using namespace taf;
using test::rvec;

namespace {

MeasurementSet gaussian_problem(Index n, Index m, Field field, std::uint64_t seed, double sigma = 0.0) {
  const auto op = gaussian_operator(n, m, field, seed);
  return generate_measurements(op, random_signal(n, field, seed + 1), sigma, seed + 2);
}

double init_error(const MeasurementSet& ms, InitMethod method, std::uint64_t seed) {
  InitConfig cfg;
  cfg.method = method;
  return relative_error(initialize(ms, cfg, seed).z0, *ms.truth);
}

}  // namespace

TEST_SUITE("init") {

TEST_CASE("complement size") {
  CHECK(complement_size(12, {1, 6}) == 2);
  CHECK(complement_size(13, {1, 6}) == 3);
  CHECK(complement_size(1, {1, 6}) == 1);
  CHECK(complement_size(10, {1, 2}) == 5);
  CHECK_THROWS_AS(complement_size(10, {3, 1}), InvalidArgument);
  CHECK(complement_size(10, {1, 1}) == 10);
}

TEST_CASE("complement selection examples") {
  const Vec<double> ones = Vec<double>::Ones(4);
  CHECK(select_complement_indices(rvec({0.9, 0.1, 0.5, 0.8}), ones, 2) == std::vector<Index>{0, 3});
  CHECK(select_complement_indices(rvec({1, 1, 1, 1}), ones, 2) == std::vector<Index>{0, 1});
  // the ratio, not psi alone, decides
  CHECK(select_complement_indices(rvec({2, 1}), rvec({16, 1}), 1) == std::vector<Index>{1});
  CHECK_THROWS_AS(select_complement_indices(rvec({1, 2}), ones, 1), InvalidArgument);
  CHECK_THROWS_AS(select_complement_indices(rvec({1, 2}), rvec({1, 1}), 3), InvalidArgument);
  CHECK_THROWS_AS(select_complement_indices(rvec({1, 2}), rvec({1, 1}), 0), InvalidArgument);
}

TEST_CASE("norm estimate examples") {
  const auto op = dense_operator(test::identity(3));
  const auto ms = measurements_from_amplitudes(op, rvec({1, 2, 2}));  // y = (1, 4, 4)
  CHECK(norm_estimate(ms, NormEstimator::MeanIntensity) == doctest::Approx(std::sqrt(3.0)));

  const auto ms2 = generate_measurements(dense_operator(test::identity(2)), test::rsig({3, 4}), 0.0, 1);
  CHECK(norm_estimate(ms2, NormEstimator::MeanIntensity) == doctest::Approx(std::sqrt(12.5)));
  CHECK(norm_estimate(ms2, NormEstimator::RowNormRatio) == doctest::Approx(5.0));
}

TEST_CASE("norm estimate concentrates") {
  for (Field field : {Field::Real, Field::Complex}) {
    const auto ms = gaussian_problem(200, 2000, field, 31);
    const double truth = ms.truth->norm();
    CHECK(std::abs(norm_estimate(ms, NormEstimator::MeanIntensity) - truth) <= 0.05 * truth);
    CHECK(std::abs(norm_estimate(ms, NormEstimator::RowNormRatio) - truth) <= 0.05 * truth);
  }
}

TEST_CASE("power iteration examples") {
  Mat<double> d = Mat<double>::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 1;
  const auto diag = [&](const Vec<double>& v) { return Vec<double>(d * v); };
  const Vec<double> v = power_iteration<double>(diag, 2, 50, 7);
  CHECK(std::abs(std::abs(v[0]) - 1.0) <= 1e-12);

  const auto ident = [](const Vec<double>& u) { return u; };
  Rng rng = make_rng(3);
  const Vec<double> start = random_unit_vector<double>(5, rng);
  CHECK((power_iteration<double>(ident, start, 10) - start).norm() <= 1e-14);

  const auto zero = [](const Vec<double>& u) { return Vec<double>(Vec<double>::Zero(u.size())); };
  CHECK_THROWS_AS(power_iteration<double>(zero, 3, 5, 1), DegenerateError);
  CHECK_THROWS_AS(power_iteration<double>(ident, Vec<double>(Vec<double>::Zero(3)), 5), InvalidArgument);
  CHECK_THROWS_AS(power_iteration<double>(ident, 3, 0, 1), InvalidArgument);
}

TEST_CASE("lanczos finds the smallest eigenvector") {
  Mat<double> d = Mat<double>::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 0.1;
  const auto diag = [&](const Vec<double>& v) { return Vec<double>(d * v); };
  const Vec<double> v = lanczos_smallest<double>(diag, rvec({1, 1}), 2);
  CHECK(std::abs(std::abs(v[1]) - 1.0) <= 1e-12);

  Rng rng = make_rng(11);
  for (int k = 0; k < 5; ++k) {
    const Mat<cplx> b = Mat<cplx>::NullaryExpr(12, 12, [&] { return random_gaussian<cplx>(1, rng)[0]; });
    const Mat<cplx> h = b * b.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    const Vec<cplx> ref = eig.eigenvectors().col(0);
    const auto mv = [&](const Vec<cplx>& u) { return Vec<cplx>(h * u); };
    const Vec<cplx> got = lanczos_smallest<cplx>(mv, random_gaussian<cplx>(12, rng), 12);
    CHECK(std::abs(std::abs(ref.dot(got)) - 1.0) <= 1e-8);
  }
}

TEST_CASE("min-eig variant matches a dense eigensolver") {
  const Index n = 30;
  const auto ms = gaussian_problem(n, 240, Field::Real, 5);
  InitConfig cfg;
  cfg.method = InitMethod::OrthogonalityPromotingMinEig;
  cfg.power_iters = static_cast<int>(n);
  const auto est = initialize(ms, cfg, 9);

  const auto& a = std::get<DenseOperator<double>>(ms.op.variant()).matrix();
  const auto sel = est.selected_indices;
  CHECK(static_cast<Index>(sel.size()) == complement_size(240, cfg.min_eig_fraction));
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
  for (Index i : sel) {
    const Eigen::VectorXd r = a.row(i).transpose();
    y += r * r.transpose() / r.squaredNorm();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(y);
  const Eigen::VectorXd ref = eig.eigenvectors().col(0);
  CHECK(std::abs(std::abs(ref.dot(est.direction.as<double>())) - 1.0) <= 1e-8);
}

TEST_CASE("truncated spectral with alpha = inf equals spectral") {
  const auto ms = gaussian_problem(20, 160, Field::Real, 2);
  InitConfig cfg;
  cfg.spectral_trunc_alpha = std::numeric_limits<double>::infinity();
  const auto s = spectral_init(ms, cfg, 4);
  const auto t = truncated_spectral_init(ms, cfg, 4);
  CHECK((s.z0.as<double>() - t.z0.as<double>()).norm() <= 1e-12);
  CHECK(t.selected_indices.size() == 160);
}

TEST_CASE("truncated spectral drops outliers") {
  auto ms = gaussian_problem(10, 100, Field::Real, 6);
  ms.psi[17] = 100.0;
  ms.y[17] = 1e4;
  const auto t = truncated_spectral_init(ms, InitConfig{}, 1);
  CHECK(std::find(t.selected_indices.begin(), t.selected_indices.end(), 17) == t.selected_indices.end());
  const auto s = spectral_init(ms, InitConfig{}, 1);
  CHECK(std::find(s.selected_indices.begin(), s.selected_indices.end(), 17) != s.selected_indices.end());
}

TEST_CASE("initial estimate is scaled by the norm estimate") {
  const auto ms = gaussian_problem(16, 128, Field::Complex, 8);
  for (auto method : {InitMethod::OrthogonalityPromoting, InitMethod::Spectral, InitMethod::TruncatedSpectral,
                      InitMethod::OrthogonalityPromotingMinEig}) {
    InitConfig cfg;
    cfg.method = method;
    const auto est = initialize(ms, cfg, 3);
    CHECK(est.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.z0.norm() == doctest::Approx(est.norm_estimate).epsilon(1e-12));
    CHECK(est.norm_estimate == doctest::Approx(norm_estimate(ms, cfg.norm_estimator)));
  }
}

TEST_CASE("direction is invariant to amplitude scaling") {
  const auto ms = gaussian_problem(16, 128, Field::Real, 12);
  auto scaled = ms;
  scaled.psi *= 7.0;
  scaled.y *= 49.0;
  const auto a = initialize(ms, InitConfig{}, 3);
  const auto b = initialize(scaled, InitConfig{}, 3);
  CHECK(a.selected_indices == b.selected_indices);
  CHECK((a.direction.as<double>() - b.direction.as<double>()).norm() <= 1e-10);
  CHECK(b.norm_estimate == doctest::Approx(7.0 * a.norm_estimate));
}

TEST_CASE("orthogonality promoting beats spectral at n = 1000") {
  const Index n = 1000;
  double orth = 0, spec = 0, trunc = 0;
  const int reps = 3;
  for (int r = 0; r < reps; ++r) {
    const auto ms = gaussian_problem(n, 6 * n, Field::Real, 100 + r);
    orth += init_error(ms, InitMethod::OrthogonalityPromoting, r);
    spec += init_error(ms, InitMethod::Spectral, r);
    trunc += init_error(ms, InitMethod::TruncatedSpectral, r);
  }
  CHECK(orth < trunc);
  CHECK(trunc < spec);
}

TEST_CASE("init error falls as m/n grows") {
  const Index n = 100;
  std::vector<double> err;
  for (int ratio : {4, 8, 16}) {
    double total = 0;
    for (int r = 0; r < 5; ++r) {
      total += init_error(gaussian_problem(n, ratio * n, Field::Real, 40 + r), InitMethod::OrthogonalityPromoting, r);
    }
    err.push_back(total / 5);
  }
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
}

TEST_CASE("config validation") {
  InitConfig cfg;
  cfg.power_iters = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg = {};
  cfg.complement_fraction = {0, 6};
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg = {};
  cfg.spectral_trunc_alpha = -1;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  CHECK_THROWS_AS(parse_init_method("bogus"), InvalidArgument);
  CHECK(parse_init_method(to_string(InitMethod::TruncatedSpectral)) == InitMethod::TruncatedSpectral);
}

}
