// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "taf/model.hpp"
#include "taf/rng.hpp"

using namespace taf;
using taf::test::rvec;

TEST_SUITE("model") {

TEST_CASE("gaussian operator is reproducible from its seed") {
  const auto a = gaussian_operator(3, 5, Field::Real, 7);
  const auto b = gaussian_operator(3, 5, Field::Real, 7);
  const auto& ma = std::get<DenseOperator<double>>(a.variant()).matrix();
  const auto& mb = std::get<DenseOperator<double>>(b.variant()).matrix();
  CHECK(ma.rows() == 5);
  CHECK(ma.cols() == 3);
  CHECK(ma == mb);
  const auto c = gaussian_operator(3, 5, Field::Real, 8);
  CHECK(std::get<DenseOperator<double>>(c.variant()).matrix() != ma);
}

TEST_CASE("gaussian second moments") {
  const auto real = gaussian_operator(1000, 6000, Field::Real, 11);
  const auto& r = std::get<DenseOperator<double>>(real.variant()).matrix();
  const double mr = r.col(0).squaredNorm() / 6000.0;
  CHECK(mr >= 0.95);
  CHECK(mr <= 1.05);

  const auto cx = gaussian_operator(100, 600, Field::Complex, 12);
  const auto& c = std::get<DenseOperator<cplx>>(cx.variant()).matrix();
  const double mc = c.col(0).squaredNorm() / 600.0;
  CHECK(mc >= 0.9);
  CHECK(mc <= 1.1);
  // Per-component variance 1/2.
  const double re = c.real().squaredNorm() / static_cast<double>(c.size());
  CHECK(re == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("operator constructors reject bad input") {
  CHECK_THROWS_AS(gaussian_operator(0, 5, Field::Real, 1), InvalidArgument);
  CHECK_THROWS_AS(gaussian_operator(3, 0, Field::Real, 1), InvalidArgument);
  CHECK_THROWS_AS(cdp_operator(8, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(cdp_operator(std::vector<Vec<cplx>>{}), InvalidArgument);
  Vec<cplx> bad = Vec<cplx>::Ones(4);
  bad[2] = cplx(0.6, 0.8);  // unimodular but not a quarter phase
  CHECK_THROWS_AS(cdp_operator({bad}), InvalidArgument);
  CHECK_THROWS_AS(cdp_operator({Vec<cplx>::Ones(4), Vec<cplx>::Ones(5)}), InvalidArgument);
  Mat<double> nan_rows = Mat<double>::Zero(2, 2);
  nan_rows(0, 0) = std::nan("");
  CHECK_THROWS_AS(dense_operator(nan_rows), InvalidArgument);
}

TEST_CASE("cdp of a canonical vector has constant modulus") {
  const auto op = cdp_operator({Vec<cplx>::Ones(4)});
  Vec<cplx> e1 = Vec<cplx>::Zero(4);
  e1[0] = 1.0;
  const auto ms = generate_measurements(op, SignalVector(e1), 0.0, 0);
  for (Index i = 0; i < 4; ++i) CHECK(ms.psi[i] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("cdp masks, size and energy") {
  const auto op = cdp_operator(64, 6, 3);
  CHECK(op.measurements() == 384);
  CHECK(op.field() == Field::Complex);
  for (const auto& mask : std::get<CdpOperator>(op.variant()).mask_entries()) {
    for (Index i = 0; i < mask.size(); ++i) {
      const cplx d = mask[i];
      CHECK(std::abs(d) == 1.0);
      CHECK(((d.real() == 0.0) != (d.imag() == 0.0)));
    }
  }
  const auto x = random_signal(64, Field::Complex, 4);
  const auto u = op.apply(x);
  CHECK(u.norm() == doctest::Approx(std::sqrt(6.0) * x.norm()).epsilon(1e-10));
  const auto ms = generate_measurements(op, x, 0.0, 0);
  CHECK(ms.y.sum() == doctest::Approx(6.0 * x.norm() * x.norm()).epsilon(1e-10));
  // All four phases appear.
  const auto& masks = std::get<CdpOperator>(op.variant()).mask_entries();
  int counts[4] = {0, 0, 0, 0};
  for (const auto& mask : masks) {
    for (Index i = 0; i < mask.size(); ++i) {
      const cplx d = mask[i];
      counts[d == cplx(1, 0) ? 0 : d == cplx(-1, 0) ? 1 : d == cplx(0, 1) ? 2 : 3]++;
    }
  }
  for (int c : counts) CHECK(c > 60);
}

TEST_CASE("adjoint consistency against an explicit matrix") {
  const auto op = cdp_operator(8, 2, 5);
  const Mat<cplx> dense = test::materialize<cplx>(op);
  Rng rng = make_rng(99);
  const Vec<cplx> v = random_gaussian<cplx>(16, rng);
  const Vec<cplx> via_op = op.adjoint(SignalVector(v)).as<cplx>();
  CHECK((via_op - dense.adjoint() * v).norm() <= 1e-12 * v.norm());
}

TEST_CASE("adjoint identity on random pairs") {
  const SensingOperator ops[] = {gaussian_operator(7, 30, Field::Real, 1), gaussian_operator(7, 30, Field::Complex, 2),
                                 cdp_operator(16, 3, 3), cdp_operator(15, 2, 4)};
  for (const auto& op : ops) {
    Rng rng = make_rng(17);
    for (int k = 0; k < 100; ++k) {
      op.visit([&](const auto& o) {
        using S = typename std::decay_t<decltype(o)>::Scalar;
        const Vec<S> u = random_gaussian<S>(o.dim(), rng);
        const Vec<S> v = random_gaussian<S>(o.measurements(), rng);
        const S lhs = v.dot(o.apply(u));   // <Au, v> as v^H (Au)
        const S rhs = o.adjoint(v).dot(u); // <u, A^H v>
        CHECK(std::abs(lhs - rhs) <= 1e-10 * u.norm() * v.norm());
      });
    }
  }
}

TEST_CASE("identity map measurements") {
  const auto op = dense_operator(test::identity(3));
  const auto ms = generate_measurements(op, test::rsig({3, -4, 0}), 0.0, 0);
  CHECK(ms.psi == rvec({3, 4, 0}));
  CHECK(ms.y == rvec({9, 16, 0}));
  CHECK(ms.noise_sigma == 0.0);
  REQUIRE(ms.truth);
  CHECK(ms.truth->as<double>() == rvec({3, -4, 0}));
}

TEST_CASE("noiseless amplitudes equal |Ax| exactly") {
  for (Field f : {Field::Real, Field::Complex}) {
    const auto op = gaussian_operator(20, 80, f, 5);
    const auto x = random_signal(20, f, 6);
    const auto ms = generate_measurements(op, x, 0.0, 7);
    const auto u = op.apply(x);
    std::visit([&](const auto& uv) { CHECK(ms.psi == uv.cwiseAbs()); }, u.storage());
    CHECK((ms.y - ms.psi.cwiseAbs2()).norm() == 0.0);
  }
}

TEST_CASE("noise perturbation is bounded by the half-normal mean") {
  const auto op = gaussian_operator(100, 600, Field::Real, 21);
  const auto x = random_signal(100, Field::Real, 22);
  const double sigma = 0.2 * x.norm();
  const auto ms = generate_measurements(op, x, sigma, 23);
  const Vec<double> clean = op.apply(x).as<double>().cwiseAbs();
  const double mean_dev = (ms.psi - clean).cwiseAbs().mean();
  CHECK(mean_dev <= sigma * std::sqrt(2.0 / M_PI) * 1.2);
  CHECK(ms.noise.size() == 600);
  CHECK(ms.noise_sigma == sigma);
  // psi = |Ax + eta| with the recorded eta.
  CHECK((ms.psi - (op.apply(x).as<double>() + ms.noise).cwiseAbs()).norm() <= 1e-12 * ms.psi.norm());
}

TEST_CASE("complex noise enters as a real scalar") {
  const auto op = gaussian_operator(10, 40, Field::Complex, 1);
  const auto x = random_signal(10, Field::Complex, 2);
  const auto ms = generate_measurements(op, x, 0.3, 3);
  Vec<cplx> u = op.apply(x).as<cplx>();
  for (Index i = 0; i < u.size(); ++i) u[i] += ms.noise[i];
  CHECK((ms.psi - u.cwiseAbs()).norm() <= 1e-12 * ms.psi.norm());
}

TEST_CASE("generate_measurements rejects mismatches") {
  const auto op = gaussian_operator(4, 8, Field::Real, 1);
  CHECK_THROWS_AS(generate_measurements(op, random_signal(5, Field::Real, 1), 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_measurements(op, random_signal(4, Field::Complex, 1), 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_measurements(op, random_signal(4, Field::Real, 1), -1.0, 0), InvalidArgument);
  CHECK_THROWS_AS(measurements_from_amplitudes(op, rvec({1, 2})), InvalidArgument);
  CHECK_THROWS_AS(measurements_from_amplitudes(op, Vec<double>::Constant(8, -1.0)), InvalidArgument);
}

TEST_CASE("mixed-field operations are rejected") {
  const auto op = gaussian_operator(4, 8, Field::Real, 1);
  CHECK_THROWS_AS(op.apply(random_signal(4, Field::Complex, 1)), InvalidArgument);
  CHECK_THROWS_AS(random_signal(4, Field::Real, 1).as<cplx>(), InvalidArgument);
  CHECK_THROWS_AS(SignalVector(Vec<double>()), InvalidArgument);
  CHECK_THROWS_AS(SignalVector(rvec({1, INFINITY})), InvalidArgument);
}

TEST_CASE("generation is deterministic") {
  const auto op1 = gaussian_operator(12, 50, Field::Complex, 9);
  const auto op2 = gaussian_operator(12, 50, Field::Complex, 9);
  const auto x1 = random_signal(12, Field::Complex, 10);
  const auto x2 = random_signal(12, Field::Complex, 10);
  const auto a = generate_measurements(op1, x1, 0.1, 11);
  const auto b = generate_measurements(op2, x2, 0.1, 11);
  CHECK(a.psi == b.psi);
  CHECK(a.noise == b.noise);
}

TEST_CASE("gaussian moment of the intensities") {
  const auto op = gaussian_operator(4, 2000, Field::Real, 31);
  const auto x = random_signal(4, Field::Real, 32);
  const auto ms = generate_measurements(op, x, 0.0, 0);
  const double ratio = ms.y.mean() / (x.norm() * x.norm());
  CHECK(ratio >= 0.9);
  CHECK(ratio <= 1.1);
}

TEST_CASE("derived seeds separate streams") {
  CHECK(derive_seed(1, 2, 3, Stream::Operator) != derive_seed(1, 2, 3, Stream::Signal));
  CHECK(derive_seed(1, 2, 3, Stream::Operator) != derive_seed(1, 2, 4, Stream::Operator));
  CHECK(derive_seed(1, 2, 3, Stream::Operator) != derive_seed(2, 2, 3, Stream::Operator));
  static_assert(derive_seed(1, 2, 3, Stream::Noise) == derive_seed(1, 2, 3, Stream::Noise));
}

}
