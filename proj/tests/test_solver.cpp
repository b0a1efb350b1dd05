// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "taf/solver.hpp"

using namespace taf;
using test::rsig;
using test::rvec;

namespace {

MeasurementSet identity_problem(std::initializer_list<double> psi) {
  return measurements_from_amplitudes(dense_operator(test::identity(static_cast<Index>(psi.size()))), rvec(psi));
}

MeasurementSet gaussian_problem(Index n, Index m, Field field, std::uint64_t seed, double sigma = 0.0) {
  const auto op = gaussian_operator(n, m, field, seed);
  return generate_measurements(op, random_signal(n, field, seed + 1), sigma, seed + 2);
}

// Central differences of f along each real coordinate (and imaginary one
// for complex z), packed as a complex vector in the complex case.
template <class S, class F>
Vec<S> numeric_gradient(const F& f, const Vec<S>& z) {
  const double h = 1e-6;
  Vec<S> g(z.size());
  for (Index k = 0; k < z.size(); ++k) {
    Vec<S> p = z, q = z;
    p[k] += h;
    q[k] -= h;
    const double re = (f(p) - f(q)) / (2 * h);
    if constexpr (is_complex_v<S>) {
      Vec<S> pi = z, qi = z;
      pi[k] += cplx(0, h);
      qi[k] -= cplx(0, h);
      g[k] = cplx(re, (f(pi) - f(qi)) / (2 * h));
    } else {
      g[k] = re;
    }
  }
  return g;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("loss examples") {
  const auto ms = identity_problem({1, 2});
  CHECK(amplitude_loss(rsig({1, -2}), ms) == 0.0);
  CHECK(amplitude_loss(rsig({0, 0}), ms) == doctest::Approx(1.25));
  CHECK(intensity_loss(rsig({0, 0}), ms) == doctest::Approx(17.0 / 4));
  CHECK(intensity_loss(rsig({1, 2}), ms) == 0.0);
}

TEST_CASE("truncation boundary") {
  const auto ms = identity_problem({2});
  // gamma = 0.7: keep when |u| >= 2/1.7 = 1.176...
  CHECK(truncation_set(rsig({1.2}), ms, 0.7).size() == 1);
  CHECK(truncation_set(rsig({1.1}), ms, 0.7).empty());
  CHECK(truncation_set(rsig({1e-3}), ms, kNoTruncation).size() == 1);
  CHECK_THROWS_AS(truncation_set(rsig({1}), ms, 0.0), InvalidArgument);
}

TEST_CASE("direction examples") {
  const auto ms = identity_problem({1, 1});
  // u = (2, 0.5): v = (1, 0) on the kept set (0.5 < 1/1.7 is dropped)
  const auto d = taf_direction(rsig({2, 0.5}), ms, 0.7).as<double>();
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == 0.0);
  const auto af = taf_direction(rsig({2, 0.5}), ms, kNoTruncation).as<double>();
  CHECK(af[1] == doctest::Approx(-0.25));
  // WF: (1/2) * 2 (4 - 1) * 2 = 6 per entry with u = 2
  const auto w = wf_direction(rsig({2, 2}), ms).as<double>();
  CHECK(w[0] == doctest::Approx(6.0));
  const auto one = identity_problem({1});
  CHECK(wf_direction(rsig({2}), one).as<double>()[0] == doctest::Approx(12.0));
  // u = 0 contributes nothing
  CHECK(taf_direction(rsig({0, 0}), ms, kNoTruncation).norm() == 0.0);
}

TEST_CASE("directions match finite differences away from kinks") {
  for (Field field : {Field::Real, Field::Complex}) {
    const auto ms = gaussian_problem(6, 40, field, 21);
    const auto z = random_signal(6, field, 77);
    ms.op.visit([&](const auto& op) {
      using S = typename std::decay_t<decltype(op)>::Scalar;
      const Vec<S>& zv = z.as<S>();
      const auto af_loss = [&](const Vec<S>& w) { return amplitude_loss(SignalVector(w), ms); };
      const auto wf_loss = [&](const Vec<S>& w) { return intensity_loss(SignalVector(w), ms); };
      const Vec<S> g_af = taf_direction(z, ms, kNoTruncation).as<S>();
      const Vec<S> g_wf = wf_direction(z, ms).as<S>();
      CHECK((numeric_gradient<S>(af_loss, zv) - g_af).norm() <= 1e-6 * g_af.norm());
      CHECK((numeric_gradient<S>(wf_loss, zv) - g_wf).norm() <= 1e-6 * g_wf.norm());
      (void)op;
    });
  }
}

TEST_CASE("the truth is a fixed point") {
  for (Field field : {Field::Real, Field::Complex}) {
    const auto ms = gaussian_problem(10, 80, field, 3);
    CHECK(taf_direction(*ms.truth, ms, 0.7).norm() <= 1e-12 * ms.truth->norm());
    CHECK(wf_direction(*ms.truth, ms).norm() <= 1e-10 * ms.truth->norm());
    CHECK(truncation_set(*ms.truth, ms, 0.7).size() == 80);
    SolverConfig cfg;
    cfg.max_iters = 5;
    const auto r = refine(ms, cfg, *ms.truth);
    CHECK(*r.relative_error <= 1e-14);
  }
}

TEST_CASE("direction is phase equivariant") {
  const auto ms = gaussian_problem(8, 64, Field::Complex, 4);
  const auto z = random_signal(8, Field::Complex, 50);
  const cplx phase = std::polar(1.0, 0.9);
  const auto rotated = SignalVector(Vec<cplx>(phase * z.as<cplx>()));
  const Vec<cplx> lhs = taf_direction(rotated, ms, 0.7).as<cplx>();
  const Vec<cplx> rhs = phase * taf_direction(z, ms, 0.7).as<cplx>();
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
}

TEST_CASE("solve recovers a real signal") {
  const auto ms = gaussian_problem(64, 512, Field::Real, 10);
  SolverConfig cfg;
  cfg.trace_every = 1;
  const auto r = solve(ms, cfg, 11);
  CHECK(r.refined.converged);
  CHECK(*r.refined.relative_error < 1e-10);
  CHECK(r.refined.trace.truncation_size.back() == 512);
  CHECK(r.refined.trace.size() == static_cast<std::size_t>(r.refined.iters_run) + 1);
  CHECK(r.init_relative_error.has_value());
}

TEST_CASE("solve recovers a complex signal") {
  const auto ms = gaussian_problem(32, 192, Field::Complex, 12);
  const auto r = solve(ms, SolverConfig{}, 13);
  CHECK(r.refined.converged);
}

TEST_CASE("stop tolerance ends the loop early") {
  const auto ms = gaussian_problem(32, 256, Field::Real, 14);
  SolverConfig cfg;
  cfg.stop_tol = 1e-8;
  const auto r = solve(ms, cfg, 1);
  CHECK(r.refined.iters_run < cfg.max_iters);
  CHECK(*r.refined.relative_error < 1e-8);
}

TEST_CASE("amplitude flow descends at a small step") {
  const auto ms = gaussian_problem(16, 128, Field::Real, 15);
  SolverConfig cfg;
  cfg.method = SolverMethod::AF;
  cfg.step = 0.1;
  cfg.max_iters = 60;
  cfg.trace_every = 1;
  const auto r = solve(ms, cfg, 2);
  const auto& loss = r.refined.trace.loss;
  for (std::size_t t = 1; t < loss.size(); ++t) CHECK(loss[t] <= loss[t - 1] * (1 + 1e-12));
}

TEST_CASE("noisy estimates stay near the truth") {
  const auto ms = gaussian_problem(64, 512, Field::Real, 16, 0.05);
  SolverConfig cfg;
  cfg.max_iters = 300;
  const auto r = solve(ms, cfg, 3);
  CHECK(*r.refined.relative_error < 0.1);
  CHECK_FALSE(r.refined.converged);
}

TEST_CASE("oversized steps trip the divergence guard") {
  const auto ms = gaussian_problem(16, 128, Field::Real, 17);
  SolverConfig cfg;
  cfg.method = SolverMethod::WF;
  cfg.step = 1e4;
  CHECK_THROWS_AS(solve(ms, cfg, 1), DivergenceError);
}

TEST_CASE("config validation") {
  SolverConfig cfg;
  cfg.gamma = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg = {};
  cfg.step = -1.0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  CHECK(resolved_step(SolverConfig{}, Field::Real) == 0.6);
  CHECK(resolved_step(SolverConfig{}, Field::Complex) == 1.0);
  cfg = {};
  cfg.method = SolverMethod::WF;
  CHECK(resolved_step(cfg, Field::Real) == 0.1);
  CHECK_THROWS_AS(parse_solver_method("gd"), InvalidArgument);

  const auto ms = gaussian_problem(4, 16, Field::Real, 1);
  CHECK_THROWS_AS(refine(ms, SolverConfig{}, rsig({1, 2, 3})), InvalidArgument);
  CHECK_THROWS_AS(refine(ms, SolverConfig{}, random_signal(4, Field::Complex, 1)), InvalidArgument);
}

}
