// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "helpers.hpp"
#include "taf/metrics.hpp"
#include "taf/rng.hpp"

using namespace taf;
using taf::test::rsig;

TEST_SUITE("metrics") {

TEST_CASE("real distance examples") {
  CHECK(dist(rsig({-1, 0}), rsig({1, 0})) == 0.0);
  CHECK(dist(rsig({2, 0}), rsig({1, 1})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("complex distance is phase invariant") {
  const auto x = random_signal(6, Field::Complex, 3);
  const SignalVector jx(Vec<cplx>(cplx(0, 1) * x.as<cplx>()));
  CHECK(dist(jx, x) <= 1e-15 * x.norm());
  const SignalVector rot(Vec<cplx>(std::polar(1.0, 2.1) * x.as<cplx>()));
  CHECK(dist(rot, x) <= 1e-14 * x.norm());
}

TEST_CASE("complex distance matches the closed form") {
  Rng rng = make_rng(5);
  for (int k = 0; k < 50; ++k) {
    const Vec<cplx> z = random_gaussian<cplx>(7, rng), x = random_gaussian<cplx>(7, rng);
    const double closed = std::sqrt(z.squaredNorm() + x.squaredNorm() - 2 * std::abs(x.dot(z)));
    CHECK(dist(SignalVector(z), SignalVector(x)) == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("distance rejects mismatches") {
  CHECK_THROWS_AS(dist(rsig({1, 2}), rsig({1, 2, 3})), InvalidArgument);
  CHECK_THROWS_AS(dist(rsig({1, 2}), random_signal(2, Field::Complex, 1)), InvalidArgument);
  CHECK_THROWS_AS(relative_error(rsig({1, 2}), rsig({0, 0})), InvalidArgument);
}

TEST_CASE("phase constant") {
  const auto x = random_signal(5, Field::Real, 1);
  CHECK(phase_constant(x, x) == 0.0);
  CHECK(phase_constant(SignalVector(Vec<double>(-x.as<double>())), x) == doctest::Approx(std::numbers::pi));
  const auto c = random_signal(5, Field::Complex, 2);
  const SignalVector rot(Vec<cplx>(std::polar(1.0, std::numbers::pi / 3) * c.as<cplx>()));
  CHECK(std::abs(phase_constant(rot, c) - std::numbers::pi / 3) <= 1e-12);
  CHECK(phase_constant(c, c) == doctest::Approx(0.0));
  Vec<cplx> a = Vec<cplx>::Zero(2), b = Vec<cplx>::Zero(2);
  a[0] = 1;
  b[1] = 1;
  CHECK(phase_constant(SignalVector(a), SignalVector(b)) == 0.0);
}

TEST_CASE("success rate") {
  const std::vector<double> half{1e-6, 1e-4};
  CHECK(success_rate(half, 1e-5) == 0.5);
  const std::vector<double> zeros{0, 0, 0};
  CHECK(success_rate(zeros, 1e-5) == 1.0);
  const std::vector<double> at{1e-5};
  CHECK(success_rate(at, 1e-5) == 0.0);  // strictly below
  CHECK_THROWS_AS(success_rate(std::vector<double>{}, 1e-5), InvalidArgument);

  Rng rng = make_rng(8);
  std::uniform_real_distribution<double> u(0.0, 2e-5);
  std::vector<double> draws(100);
  for (auto& d : draws) d = u(rng);
  const double rate = success_rate(draws, 1e-5);
  CHECK(rate >= 0.35);
  CHECK(rate <= 0.65);
}

TEST_CASE("evaluate") {
  const auto x = rsig({1, 0});
  const auto r = evaluate(rsig({1, 1e-7}), x);
  CHECK(r.dist == doctest::Approx(1e-7));
  CHECK(r.relative_error == doctest::Approx(1e-7));
  CHECK(r.success);
  CHECK(r.threshold == kSuccessThreshold);
  CHECK_FALSE(evaluate(rsig({1, 1e-3}), x).success);
}

TEST_CASE("relative mse") {
  const auto x = random_signal(4, Field::Real, 3);
  CHECK(relative_mse(x, x) == 0.0);
  CHECK(relative_mse(SignalVector(Vec<double>(-x.as<double>())), x) == 0.0);
  CHECK(relative_mse(rsig({1, 0.1}), rsig({1, 0})) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(relative_mse(rsig({1}), rsig({0})), InvalidArgument);
}

TEST_CASE("snr in decibels") {
  const auto op = dense_operator(test::identity(2));
  const auto x = rsig({6, 8});  // sum |<a_i, x>|^2 = 100
  CHECK(snr_db(op, x, test::rvec({1, 0})) == doctest::Approx(20.0));
  CHECK(snr_db(op, x, test::rvec({6, 8})) == doctest::Approx(0.0));
  CHECK(snr_db(op, x, test::rvec({0.1, 0.2})) - snr_db(op, x, test::rvec({1, 2})) == doctest::Approx(20.0));
  CHECK_THROWS_AS(snr_db(op, x, test::rvec({0, 0})), InvalidArgument);
  CHECK_THROWS_AS(snr_db(op, x, test::rvec({1})), InvalidArgument);
}

}
