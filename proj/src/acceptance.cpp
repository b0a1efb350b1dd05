// SPDX-License-Identifier: Apache-2.0
#include "taf/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "taf/bench.hpp"
#include "taf/eigen_iter.hpp"
#include "taf/image_io.hpp"
#include "taf/rng.hpp"

namespace taf {

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

BenchSpec base_spec(const AcceptanceOptions& opt, Experiment experiment, Field field, Index n,
                    std::vector<double> ratios, int trials) {
  BenchSpec spec;
  spec.experiment = experiment;
  spec.field = field;
  spec.n = n;
  spec.ratios = std::move(ratios);
  spec.trials = trials;
  spec.master_seed = opt.seed;
  spec.threads = opt.threads;
  return spec;
}

double need(const BenchReport& report, std::string_view statistic, double ratio, std::string_view solver = "",
            std::string_view init = "", std::optional<double> sigma = std::nullopt) {
  const auto v = report.find(statistic, ratio, solver, init, sigma);
  if (!v) throw std::runtime_error(fmt::format("missing statistic {} at m/n={}", statistic, ratio));
  return *v;
}

Outcome exact_recovery_real(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const auto report = success_rate_grid(base_spec(opt, Experiment::SuccessRateGrid, Field::Real, 256, {8.0}, 100));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double rate = need(report, "success_rate", 8.0, "taf");
  return {rate >= 0.99 && secs <= 120.0,
          fmt::format("n=256 m/n=8 success {:.2f} (need >= 0.99), wall {:.1f} s (need <= 120)", rate, secs)};
}

Outcome information_limit(const AcceptanceOptions& opt) {
  const auto report =
      success_rate_grid(base_spec(opt, Experiment::SuccessRateGrid, Field::Real, 256, {2.0, 3.0}, 100));
  const double r2 = need(report, "success_rate", 2.0, "taf");
  const double r3 = need(report, "success_rate", 3.0, "taf");
  return {r2 >= 0.3 && r3 >= 0.9,
          fmt::format("m/n=2 success {:.2f} (need >= 0.3), m/n=3 success {:.2f} (need >= 0.9)", r2, r3)};
}

Outcome complex_field(const AcceptanceOptions& opt) {
  auto spec = base_spec(opt, Experiment::SuccessRateGrid, Field::Complex, 128, {4.5}, 100);
  spec.solver.step = 1.0;
  const auto report = success_rate_grid(spec);
  const double rate = need(report, "success_rate", 4.5, "taf");
  return {rate >= 0.9, fmt::format("n=128 m/n=4.5 mu=1 success {:.2f} (need >= 0.9)", rate)};
}

Outcome truncation_ablation(const AcceptanceOptions& opt) {
  auto spec = base_spec(opt, Experiment::SuccessRateGrid, Field::Real, 256, {2.5}, 100);
  spec.solvers = {SolverMethod::TAF, SolverMethod::AF};
  const auto report = success_rate_grid(spec);
  const double taf = need(report, "success_rate", 2.5, "taf");
  const double af = need(report, "success_rate", 2.5, "af");
  return {taf > af, fmt::format("m/n=2.5 TAF {:.2f} vs AF {:.2f} (need TAF > AF)", taf, af)};
}

Outcome initializer_ordering(const AcceptanceOptions& opt) {
  auto spec = base_spec(opt, Experiment::InitErrorGrid, Field::Real, 256, {6.0}, 50);
  spec.sigma_rels = {0.0, 0.2};
  const auto report = init_error_grid(spec);
  bool ok = true;
  std::string detail;
  for (double sigma : spec.sigma_rels) {
    const double orth = need(report, "init_rel_error_mean", 6.0, "", "orth", sigma);
    const double spec_err = need(report, "init_rel_error_mean", 6.0, "", "spectral", sigma);
    const double trunc = need(report, "init_rel_error_mean", 6.0, "", "trunc-spectral", sigma);
    ok = ok && orth < spec_err && orth < trunc;
    detail += fmt::format("{}sigma={}: orth {:.4f} spectral {:.4f} trunc {:.4f}", detail.empty() ? "" : "; ",
                          sigma, orth, spec_err, trunc);
  }
  return {ok, detail};
}

Outcome orthogonality_profile_check(const AcceptanceOptions& opt) {
  const auto report =
      orthogonality_profile(base_spec(opt, Experiment::OrthogonalityProfile, Field::Real, 1000, {6.0}, 1));
  const double median = need(report, "cos2_q0.5", 6.0);
  const double q95 = need(report, "cos2_q0.95", 6.0);
  return {median < 1e-3 && q95 < 1e-2,
          fmt::format("median cos^2 {:.3e} (need < 1e-3), 95th pct {:.3e} (need < 1e-2)", median, q95)};
}

Outcome snr_scaling(const AcceptanceOptions& opt) {
  auto spec = base_spec(opt, Experiment::SnrSweep, Field::Real, 128, {6.0, 8.0, 10.0}, 50);
  spec.snr_grid = {10, 20, 30, 40, 50};
  const auto report = snr_sweep(spec);
  bool ok = true;
  std::string detail;
  for (double ratio : spec.ratios) {
    const double slope = need(report, "log10_rel_mse_slope", ratio);
    ok = ok && slope >= -0.125 && slope <= -0.075;
    detail += fmt::format("{}m/n={} slope {:.4f}", detail.empty() ? "" : ", ", ratio, slope);
  }
  return {ok, detail + " (need within [-0.125, -0.075])"};
}

Outcome geometric_convergence(const AcceptanceOptions& opt) {
  const auto report =
      convergence_trace(base_spec(opt, Experiment::ConvergenceTrace, Field::Real, 256, {8.0}, 20));
  const double successes = need(report, "success_rate", 8.0) * 20;
  const double worst = need(report, "worst_contraction_100", 8.0);
  return {successes >= 1 && worst <= 0.5,
          fmt::format("{} successful traces; worst err(t+100)/err(t) for 1e-12 <= err(t) < 0.1 is {:.3e} "
                      "(need <= 0.5)",
                      successes, worst)};
}

Outcome cdp_check(const AcceptanceOptions& opt) {
  const auto image = load_image(opt.data_dir / "demo_64x64_gray.pgm");
  auto spec = base_spec(opt, Experiment::CdpRecovery, Field::Complex, image.pixels(), {}, 1);
  spec.masks = 6;
  spec.solver.init.power_iters = 100;
  spec.solver.max_iters = 100;
  const auto report = cdp_recovery(spec, image);
  const double init = need(report, "band0_init_rel_error", 6.0);
  const double final = need(report, "band0_final_rel_error", 6.0);
  return {final <= 1e-4 && init <= 1.0,
          fmt::format("64x64 K=6: init error {:.4f} (need <= 1), after 100 TAF iters {:.3e} (need <= 1e-4)",
                      init, final)};
}

// ---- oracle and property suites ----

// Central differences of f at z, packed as d/dRe + j d/dIm in the complex case.
template <class S, class F>
Vec<S> fd_gradient(const F& f, const Vec<S>& z, double h) {
  Vec<S> g(z.size());
  for (Index k = 0; k < z.size(); ++k) {
    Vec<S> zp = z, zm = z;
    zp[k] += h;
    zm[k] -= h;
    const double dre = (f(zp) - f(zm)) / (2 * h);
    if constexpr (is_complex_v<S>) {
      zp = z;
      zm = z;
      zp[k] += cplx(0, h);
      zm[k] -= cplx(0, h);
      g[k] = cplx(dre, (f(zp) - f(zm)) / (2 * h));
    } else {
      g[k] = dre;
    }
  }
  return g;
}

// A point whose truncation set is stable under perturbations of size ~h.
template <class S>
bool smooth_taf_point(const Mat<S>& a, const Vec<double>& psi, const Vec<S>& z, double gamma) {
  const Vec<S> u = a * z;
  for (Index i = 0; i < u.size(); ++i) {
    const double mag = std::abs(u[i]);
    if (mag < 1e-3 || std::abs(mag - psi[i] / (1 + gamma)) < 1e-3) return false;
  }
  return true;
}

template <class S>
double fd_instance(std::uint64_t seed, bool taf) {
  const Index n = taf ? 5 : 4, m = taf ? 20 : 12;
  const double gamma = 0.7, h = 1e-6;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const auto op = gaussian_operator(n, m, field_of<S>, derive_seed(seed, attempt, 0, Stream::Operator));
    const auto x = random_signal(n, field_of<S>, derive_seed(seed, attempt, 0, Stream::Signal));
    const auto ms = generate_measurements(op, x, 0.0, 0);
    Rng rng = make_rng(derive_seed(seed, attempt, 0, Stream::Noise));
    const Vec<S> z = x.template as<S>() + 0.4 * x.norm() * random_unit_vector<S>(n, rng);
    const Mat<S>& a = std::get<DenseOperator<S>>(op.variant()).matrix();
    if (taf && !smooth_taf_point(a, ms.psi, z, gamma)) continue;

    Vec<S> analytic;
    Vec<S> numeric;
    if (taf) {
      const Vec<S> u0 = a * z;
      std::vector<bool> keep(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) keep[static_cast<std::size_t>(i)] = std::abs(u0[i]) >= ms.psi[i] / (1 + gamma);
      auto loss = [&](const Vec<S>& w) {
        const Vec<S> u = a * w;
        double s = 0;
        for (Index i = 0; i < m; ++i) {
          if (keep[static_cast<std::size_t>(i)]) s += std::pow(ms.psi[i] - std::abs(u[i]), 2);
        }
        return s / (2.0 * static_cast<double>(m));
      };
      analytic = taf_direction(SignalVector(z), ms, gamma).template as<S>();
      numeric = fd_gradient<S>(loss, z, h);
    } else {
      auto loss = [&](const Vec<S>& w) {
        const Vec<S> u = a * w;
        double s = 0;
        for (Index i = 0; i < m; ++i) s += std::pow(ms.y[i] - std::norm(u[i]), 2);
        return s / (2.0 * static_cast<double>(m));
      };
      analytic = wf_direction(SignalVector(z), ms).template as<S>();
      numeric = fd_gradient<S>(loss, z, h);
    }
    return (analytic - numeric).norm() / analytic.norm();
  }
}

Outcome oracle_suites(const AcceptanceOptions& opt) {
  std::vector<std::string> failures;
  std::string detail;

  // Finite differences: 50 instances each for taf and wf (half real, half complex).
  double worst_taf = 0, worst_wf = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto seed = derive_seed(opt.seed, 0xfd, k, Stream::Operator);
    worst_taf = std::max(worst_taf, k % 2 ? fd_instance<cplx>(seed, true) : fd_instance<double>(seed, true));
    worst_wf = std::max(worst_wf, k % 2 ? fd_instance<cplx>(seed, false) : fd_instance<double>(seed, false));
  }
  if (worst_taf > 1e-6) failures.push_back("taf finite differences");
  if (worst_wf > 1e-6) failures.push_back("wf finite differences");
  detail += fmt::format("fd taf {:.1e}, wf {:.1e}", worst_taf, worst_wf);

  // Complex distance against a 10^6-point phase grid.
  double worst_dist = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng = make_rng(derive_seed(opt.seed, 0xd15, k, Stream::Signal));
    const Vec<cplx> z = random_gaussian<cplx>(5, rng), x = random_gaussian<cplx>(5, rng);
    double best = std::numeric_limits<double>::infinity();
    constexpr int kGrid = 1'000'000;
    for (int g = 0; g < kGrid; ++g) {
      const cplx phase = std::polar(1.0, 2 * std::numbers::pi * g / kGrid);
      best = std::min(best, (z - phase * x).norm());
    }
    worst_dist = std::max(worst_dist, std::abs(best - dist(SignalVector(z), SignalVector(x))));
  }
  if (worst_dist > 1e-8) failures.push_back("complex dist");
  detail += fmt::format(", dist {:.1e}", worst_dist);

  // Power iteration against a dense eigensolver.
  double worst_align = 1;
  for (std::uint64_t k = 0; k < 20; ++k) {
    Rng rng = make_rng(derive_seed(opt.seed, 0x9e1, k, Stream::Operator));
    Eigen::MatrixXd b(20, 30);
    for (Index j = 0; j < b.cols(); ++j) b.col(j) = random_gaussian<double>(20, rng);
    const Eigen::MatrixXd psd = b * b.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psd);
    const Vec<double> lead = eig.eigenvectors().col(19);
    const auto v = power_iteration<double>([&](const Vec<double>& u) { return Vec<double>(psd * u); }, 20, 2000,
                                           derive_seed(opt.seed, 0x9e1, k, Stream::PowerStart));
    worst_align = std::min(worst_align, std::abs(lead.dot(v)));
  }
  if (worst_align < 1 - 1e-8) failures.push_back("power iteration");
  detail += fmt::format(", power 1-{:.1e}", 1 - worst_align);

  // Matrix-free Gram matvecs against explicit sums of outer products.
  double worst_matvec = 0;
  auto check_gram = [&]<class S>(const MeasurementSet& ms, const Mat<S>& rows, std::uint64_t seed) {
    const Index n = rows.cols(), m = rows.rows();
    const auto subset = select_complement_indices(ms, complement_size(m, Fraction{1, 6}));
    Mat<S> ybar = Mat<S>::Zero(n, n), y = Mat<S>::Zero(n, n);
    for (Index i : subset) {
      const Vec<S> a = rows.row(i).adjoint();
      ybar += a * a.adjoint() / (a.squaredNorm() * static_cast<double>(subset.size()));
    }
    for (Index i = 0; i < m; ++i) {
      const Vec<S> a = rows.row(i).adjoint();
      y += ms.y[i] * a * a.adjoint() / static_cast<double>(m);
    }
    Rng rng = make_rng(seed);
    const Vec<S> u = random_gaussian<S>(n, rng);
    const Vec<S> e1 = ybar * u, e2 = y * u;
    const Vec<S> g1 = normalized_gram(ms, subset).apply(u);
    std::vector<Index> all(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    const Vec<S> g2 = spectral_gram(ms, all).apply(u);
    worst_matvec = std::max({worst_matvec, (g1 - e1).norm() / e1.norm(), (g2 - e2).norm() / e2.norm()});
  };
  for (Index n : {4, 11, 20}) {
    const auto s = derive_seed(opt.seed, 0x3a7, static_cast<std::uint64_t>(n), Stream::Operator);
    for (Field f : {Field::Real, Field::Complex}) {
      const auto op = gaussian_operator(n, 6 * n, f, s);
      const auto ms = generate_measurements(op, random_signal(n, f, s + 1), 0.0, 0);
      if (f == Field::Real) {
        check_gram(ms, std::get<DenseOperator<double>>(op.variant()).matrix(), s + 2);
      } else {
        check_gram(ms, std::get<DenseOperator<cplx>>(op.variant()).matrix(), s + 2);
      }
    }
    // CDP: materialize the rows column by column.
    const auto op = cdp_operator(n, 3, s);
    Mat<cplx> rows(op.measurements(), n);
    for (Index j = 0; j < n; ++j) {
      Vec<cplx> e = Vec<cplx>::Zero(n);
      e[j] = 1;
      rows.col(j) = op.apply(SignalVector(e)).as<cplx>();
    }
    const auto ms = generate_measurements(op, random_signal(n, Field::Complex, s + 1), 0.0, 0);
    check_gram(ms, rows, s + 2);
  }
  if (worst_matvec > 1e-12) failures.push_back("gram matvec");
  detail += fmt::format(", matvec {:.1e}", worst_matvec);

  // Fixed point: the direction vanishes at the truth.
  double worst_fixed = 0;
  for (std::uint64_t k = 0; k < 3; ++k) {
    const auto s = derive_seed(opt.seed, 0xf1, k, Stream::Operator);
    const auto op = k == 0   ? gaussian_operator(64, 512, Field::Real, s)
                    : k == 1 ? gaussian_operator(32, 256, Field::Complex, s)
                             : cdp_operator(64, 4, s);
    const auto x = random_signal(op.dim(), op.field(), s + 1);
    const auto ms = generate_measurements(op, x, 0.0, 0);
    worst_fixed = std::max({worst_fixed, taf_direction(x, ms, 0.7).norm(),
                            taf_direction(x, ms, kNoTruncation).norm()});
  }
  if (worst_fixed > 1e-12) failures.push_back("fixed point");
  detail += fmt::format(", fixed point {:.1e}", worst_fixed);

  // Determinism: repeated runs and different thread counts give identical CSV.
  auto spec = base_spec(opt, Experiment::SuccessRateGrid, Field::Real, 32, {3.0, 6.0}, 6);
  spec.solvers = {SolverMethod::TAF, SolverMethod::AF};
  spec.solver.max_iters = 200;
  spec.threads = 1;
  const auto first = to_csv(success_rate_grid(spec));
  const auto again = to_csv(success_rate_grid(spec));
  spec.threads = 3;
  const auto threaded = to_csv(success_rate_grid(spec));
  auto snr = base_spec(opt, Experiment::SnrSweep, Field::Complex, 16, {6.0}, 3);
  snr.snr_grid = {20, 40};
  snr.solver.max_iters = 100;
  const auto snr_a = to_csv(snr_sweep(snr));
  snr.threads = 2;
  const auto snr_b = to_csv(snr_sweep(snr));
  const bool same = first == again && first == threaded && snr_a == snr_b;
  if (!same) failures.push_back("determinism");
  detail += same ? ", csv identical" : ", csv differs";

  if (!failures.empty()) {
    std::string names;
    for (const auto& f : failures) names += (names.empty() ? "" : ", ") + f;
    detail = "failed: " + names + " | " + detail;
  }
  return {failures.empty(), detail};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)(const AcceptanceOptions&);
};

constexpr Criterion kCriteria[] = {
    {1, "exact recovery, real field", exact_recovery_real},
    {2, "near the information limit", information_limit},
    {3, "complex field", complex_field},
    {4, "truncation ablation", truncation_ablation},
    {5, "initializer ordering", initializer_ordering},
    {6, "orthogonality profile", orthogonality_profile_check},
    {7, "SNR scaling", snr_scaling},
    {8, "geometric convergence", geometric_convergence},
    {9, "CDP recovery", cdp_check},
    {10, "oracle and property suites", oracle_suites},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> results;
  for (const auto& c : kCriteria) {
    if (!options.only.empty() && !options.only.contains(c.id)) continue;
    CriterionResult r{.id = c.id, .name = c.name, .passed = false, .detail = {}, .seconds = 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      auto outcome = c.run(options);
      r.passed = outcome.passed;
      r.detail = std::move(outcome.detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  return fmt::format("criterion {:>2} {} {}: {} ({:.1f} s)", r.id, r.passed ? "PASS" : "FAIL", r.name, r.detail,
                     r.seconds);
}

}  // namespace taf
