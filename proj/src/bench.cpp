// SPDX-License-Identifier: Apache-2.0
#include "taf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "taf/rng.hpp"

namespace taf {

std::string_view to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::SuccessRateGrid: return "success-rate";
    case Experiment::InitErrorGrid: return "init-error";
    case Experiment::SnrSweep: return "snr";
    case Experiment::ConvergenceTrace: return "convergence";
    case Experiment::OrthogonalityProfile: return "profile";
    case Experiment::CdpRecovery: return "cdp";
  }
  return "?";
}

Experiment parse_experiment(std::string_view text) {
  for (auto e : {Experiment::SuccessRateGrid, Experiment::InitErrorGrid, Experiment::SnrSweep,
                 Experiment::ConvergenceTrace, Experiment::OrthogonalityProfile, Experiment::CdpRecovery}) {
    if (text == to_string(e)) return e;
  }
  throw InvalidArgument("unknown experiment '" + std::string(text) + "'");
}

void validate(const BenchSpec& spec) {
  if (spec.n < 1) throw InvalidArgument("BenchSpec: n must be >= 1");
  if (spec.trials < 1) throw InvalidArgument("BenchSpec: trials must be >= 1");
  if (spec.threads < 1) throw InvalidArgument("BenchSpec: threads must be >= 1");
  const bool grid = spec.experiment != Experiment::CdpRecovery &&
                    !(spec.experiment == Experiment::ConvergenceTrace && spec.m);
  if (grid && spec.ratios.empty()) throw InvalidArgument("BenchSpec: ratios must be nonempty");
  for (double r : spec.ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("BenchSpec: ratios must be positive");
  }
  if (spec.solvers.empty()) throw InvalidArgument("BenchSpec: at least one solver is required");
  if (spec.experiment == Experiment::InitErrorGrid && spec.inits.empty()) {
    throw InvalidArgument("BenchSpec: at least one initializer is required");
  }
  if (spec.sigma_rels.empty()) throw InvalidArgument("BenchSpec: sigma_rels must be nonempty");
  for (double s : spec.sigma_rels) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("BenchSpec: sigma_rel must be >= 0");
  }
  if (spec.experiment == Experiment::SnrSweep && spec.snr_grid.empty()) {
    throw InvalidArgument("BenchSpec: snr grid must be nonempty");
  }
  if (spec.m && *spec.m < 1) throw InvalidArgument("BenchSpec: m must be >= 1");
  if (spec.masks < 1) throw InvalidArgument("BenchSpec: masks must be >= 1");
  validate(spec.solver);
}

namespace {

std::string join(const auto& items, auto&& format) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    out += format(item);
  }
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

std::vector<std::pair<std::string, std::string>> config_echo(const BenchSpec& spec) {
  const auto& s = spec.solver;
  std::vector<std::pair<std::string, std::string>> kv{
      {"experiment", std::string(to_string(spec.experiment))},
      {"field", std::string(to_string(spec.field))},
      {"n", std::to_string(spec.n)},
      {"ratios", join(spec.ratios, num)},
      {"trials", std::to_string(spec.trials)},
      {"solvers", join(spec.solvers, [](SolverMethod m) { return std::string(to_string(m)); })},
      {"inits", join(spec.inits, [](InitMethod m) { return std::string(to_string(m)); })},
      {"init", std::string(to_string(s.init.method))},
      {"gamma", num(s.gamma)},
      {"iters", std::to_string(s.max_iters)},
      {"power-iters", std::to_string(s.init.power_iters)},
      {"complement-fraction",
       fmt::format("{}/{}", s.init.complement_fraction.num, s.init.complement_fraction.den)},
      {"mineig-fraction", fmt::format("{}/{}", s.init.min_eig_fraction.num, s.init.min_eig_fraction.den)},
      {"trunc-alpha", num(s.init.spectral_trunc_alpha)},
      {"norm-estimator", std::string(to_string(s.init.norm_estimator))},
      {"stop-tol", num(s.stop_tol)},
      {"threshold", num(s.success_threshold)},
      {"sigma-rel", join(spec.sigma_rels, num)},
      {"snr", join(spec.snr_grid, num)},
      {"seed", std::to_string(spec.master_seed)},
      {"masks", std::to_string(spec.masks)},
  };
  if (s.step) kv.emplace_back("step", num(*s.step));
  if (spec.m) kv.emplace_back("m", std::to_string(*spec.m));
  return kv;
}

std::optional<double> BenchReport::find(std::string_view statistic, double m_over_n,
                                        std::string_view solver, std::string_view init,
                                        std::optional<double> sigma_rel,
                                        std::optional<double> snr_db) const {
  for (const auto& r : rows) {
    if (r.statistic != statistic || r.m_over_n != m_over_n) continue;
    if (!solver.empty() && r.solver != solver) continue;
    if (!init.empty() && r.init != init) continue;
    if (sigma_rel && r.sigma_rel != *sigma_rel) continue;
    if (snr_db && r.snr_db != snr_db) continue;
    return r.value;
  }
  return std::nullopt;
}

void write_csv(std::ostream& out, const BenchReport& report) {
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{:.17g},{},{}\n", to_string(r.experiment),
               to_string(r.field), r.n, r.m_over_n, r.solver, r.init, r.sigma_rel,
               r.snr_db ? fmt::format("{}", *r.snr_db) : std::string(), r.statistic, r.value,
               r.trials, r.seed);
  }
}

std::string to_csv(const BenchReport& report) {
  std::ostringstream out;
  write_csv(out, report);
  return out.str();
}

void write_text_report(std::ostream& out, const BenchReport& report) {
  fmt::print(out, "experiment {}\n\nconfig\n", to_string(report.spec.experiment));
  for (const auto& [key, value] : config_echo(report.spec)) fmt::print(out, "  {} = {}\n", key, value);
  fmt::print(out, "\n{:>9} {:>6} {:>14} {:>8} {:>8} {:>24} {:>14}\n", "m/n", "solver", "init",
             "sigma", "snr", "statistic", "value");
  for (const auto& r : report.rows) {
    fmt::print(out, "{:>9} {:>6} {:>14} {:>8} {:>8} {:>24} {:>14.6g}\n", r.m_over_n, r.solver, r.init,
               r.sigma_rel, r.snr_db ? fmt::format("{}", *r.snr_db) : "-", r.statistic, r.value);
  }
  if (!report.timings.empty()) {
    fmt::print(out, "\nwall time per cell (summed over trials)\n");
    for (const auto& t : report.timings) fmt::print(out, "  {:<40} {:9.3f} s\n", t.label, t.seconds);
  }
}

Index measurement_count(Index n, double ratio) {
  return std::max<Index>(1, static_cast<Index>(std::llround(ratio * static_cast<double>(n))));
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::optional<double> worst_contraction(const std::vector<double>& errors, int window, double start,
                                        double floor) {
  if (window < 1) throw InvalidArgument("worst_contraction: window must be >= 1");
  std::optional<double> worst;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t t = 0; t + w < errors.size(); ++t) {
    if (errors[t] >= start || errors[t] < floor) continue;
    const double ratio = errors[t + w] / errors[t];
    worst = worst ? std::max(*worst, ratio) : ratio;
  }
  return worst;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("ls_slope: need at least two paired samples");
  }
  const double k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("ls_slope: x values are all equal");
  return sxy / sxx;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t cell_id(Field field, Index n, Index m) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(field) + 1);
  h = mix64(h ^ static_cast<std::uint64_t>(n));
  return mix64(h ^ static_cast<std::uint64_t>(m));
}

// Distinct noise streams per noise level within the same (cell, trial).
std::uint64_t noise_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t trial, std::size_t level) {
  return derive_seed(master, cell ^ mix64(0x6e6f697365ULL + level), trial, Stream::Noise);
}

struct Problem {
  SensingOperator op;
  SignalVector x;
};

Problem draw_problem(Field field, Index n, Index m, std::uint64_t master, std::uint64_t cell,
                     std::uint64_t trial) {
  return Problem{gaussian_operator(n, m, field, derive_seed(master, cell, trial, Stream::Operator)),
                 random_signal(n, field, derive_seed(master, cell, trial, Stream::Signal))};
}

std::uint64_t power_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t trial) {
  return derive_seed(master, cell, trial, Stream::PowerStart);
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear interpolation between order statistics of a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BenchRow row(const BenchSpec& spec, double ratio, std::string solver, std::string init, double sigma_rel,
             std::optional<double> snr, std::string statistic, double value, int trials) {
  return BenchRow{spec.experiment, spec.field, spec.n, ratio, std::move(solver), std::move(init),
                  sigma_rel, snr, std::move(statistic), value, trials, spec.master_seed};
}

constexpr double kFailed = std::numeric_limits<double>::infinity();

// Final relative error, or +inf when the run diverged.
double refined_error(const MeasurementSet& ms, const SolverConfig& cfg, const SignalVector& z0) {
  try {
    return *refine(ms, cfg, z0).relative_error;
  } catch (const DivergenceError&) {
    return kFailed;
  }
}

}  // namespace

BenchReport success_rate_grid(const BenchSpec& spec) {
  validate(spec);
  BenchReport report;
  report.spec = spec;
  const auto cells = spec.ratios.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  const auto solvers = spec.solvers.size();
  const double sigma_rel = spec.sigma_rels.front();

  // errors[cell][trial][solver]; init error in slot `solvers`.
  std::vector<double> errors(cells * trials * (solvers + 1));
  std::vector<double> elapsed(cells * trials);
  parallel_for(cells * trials, spec.threads, [&](std::size_t task) {
    const auto start = Clock::now();
    const std::size_t c = task / trials, t = task % trials;
    const Index m = measurement_count(spec.n, spec.ratios[c]);
    const auto cell = cell_id(spec.field, spec.n, m);
    const auto p = draw_problem(spec.field, spec.n, m, spec.master_seed, cell, t);
    const auto ms = generate_measurements(p.op, p.x, sigma_rel * p.x.norm(),
                                          noise_seed(spec.master_seed, cell, t, 0));
    double* out = &errors[task * (solvers + 1)];
    try {
      const auto init = initialize(ms, spec.solver.init, power_seed(spec.master_seed, cell, t));
      out[solvers] = relative_error(init.z0, p.x);
      for (std::size_t s = 0; s < solvers; ++s) {
        SolverConfig cfg = spec.solver;
        cfg.method = spec.solvers[s];
        out[s] = refined_error(ms, cfg, init.z0);
      }
    } catch (const DegenerateError&) {
      std::fill(out, out + solvers + 1, kFailed);
    }
    elapsed[task] = seconds_since(start);
  });

  const double thr = spec.solver.success_threshold;
  for (std::size_t c = 0; c < cells; ++c) {
    const double ratio = spec.ratios[c];
    const std::string init_name(to_string(spec.solver.init.method));
    for (std::size_t s = 0; s <= solvers; ++s) {
      std::vector<double> errs(trials);
      for (std::size_t t = 0; t < trials; ++t) errs[t] = errors[(c * trials + t) * (solvers + 1) + s];
      if (s == solvers) {
        report.rows.push_back(row(spec, ratio, "-", init_name, sigma_rel, std::nullopt,
                                  "init_rel_error_mean", mean(errs), spec.trials));
        continue;
      }
      const std::string solver_name(to_string(spec.solvers[s]));
      const auto failed = std::count(errs.begin(), errs.end(), kFailed);
      report.rows.push_back(row(spec, ratio, solver_name, init_name, sigma_rel, std::nullopt,
                                "success_rate", success_rate(errs, thr), spec.trials));
      report.rows.push_back(row(spec, ratio, solver_name, init_name, sigma_rel, std::nullopt,
                                "diverged", static_cast<double>(failed), spec.trials));
    }
    double total = 0.0;
    for (std::size_t t = 0; t < trials; ++t) total += elapsed[c * trials + t];
    report.timings.push_back({fmt::format("m/n={}", ratio), total});
  }
  return report;
}

BenchReport init_error_grid(const BenchSpec& spec) {
  validate(spec);
  BenchReport report;
  report.spec = spec;
  const auto cells = spec.ratios.size();
  const auto levels = spec.sigma_rels.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  const auto inits = spec.inits.size();

  std::vector<double> errors(cells * levels * trials * inits);
  std::vector<double> elapsed(cells * levels * trials);
  parallel_for(cells * levels * trials, spec.threads, [&](std::size_t task) {
    const auto start = Clock::now();
    const std::size_t c = task / (levels * trials), l = (task / trials) % levels, t = task % trials;
    const Index m = measurement_count(spec.n, spec.ratios[c]);
    const auto cell = cell_id(spec.field, spec.n, m);
    const auto p = draw_problem(spec.field, spec.n, m, spec.master_seed, cell, t);
    const auto ms = generate_measurements(p.op, p.x, spec.sigma_rels[l] * p.x.norm(),
                                          noise_seed(spec.master_seed, cell, t, l));
    for (std::size_t k = 0; k < inits; ++k) {
      InitConfig cfg = spec.solver.init;
      cfg.method = spec.inits[k];
      double err = kFailed;
      try {
        err = relative_error(initialize(ms, cfg, power_seed(spec.master_seed, cell, t)).z0, p.x);
      } catch (const DegenerateError&) {
      }
      errors[task * inits + k] = err;
    }
    elapsed[task] = seconds_since(start);
  });

  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t l = 0; l < levels; ++l) {
      const std::size_t base = (c * levels + l) * trials;
      for (std::size_t k = 0; k < inits; ++k) {
        std::vector<double> errs(trials);
        for (std::size_t t = 0; t < trials; ++t) errs[t] = errors[(base + t) * inits + k];
        report.rows.push_back(row(spec, spec.ratios[c], "-", std::string(to_string(spec.inits[k])),
                                  spec.sigma_rels[l], std::nullopt, "init_rel_error_mean", mean(errs),
                                  spec.trials));
      }
      double total = 0.0;
      for (std::size_t t = 0; t < trials; ++t) total += elapsed[base + t];
      report.timings.push_back({fmt::format("m/n={} sigma_rel={}", spec.ratios[c], spec.sigma_rels[l]), total});
    }
  }
  return report;
}

BenchReport snr_sweep(const BenchSpec& spec) {
  validate(spec);
  BenchReport report;
  report.spec = spec;
  const auto cells = spec.ratios.size();
  const auto snrs = spec.snr_grid.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  SolverConfig cfg = spec.solver;
  cfg.method = spec.solvers.front();
  const std::string solver_name(to_string(cfg.method));
  const std::string init_name(to_string(cfg.init.method));

  std::vector<double> mse(cells * snrs * trials), realized(cells * snrs * trials);
  std::vector<double> elapsed(cells * snrs * trials);
  parallel_for(cells * snrs * trials, spec.threads, [&](std::size_t task) {
    const auto start = Clock::now();
    const std::size_t c = task / (snrs * trials), s = (task / trials) % snrs, t = task % trials;
    const Index m = measurement_count(spec.n, spec.ratios[c]);
    const auto cell = cell_id(spec.field, spec.n, m);
    const auto p = draw_problem(spec.field, spec.n, m, spec.master_seed, cell, t);
    // E sum |<a_i, x>|^2 = m ||x||^2 and E sum eta_i^2 = m sigma^2.
    const double sigma = p.x.norm() * std::pow(10.0, -spec.snr_grid[s] / 20.0);
    const auto ms = generate_measurements(p.op, p.x, sigma, noise_seed(spec.master_seed, cell, t, s));
    realized[task] = sigma > 0.0 ? snr_db(p.op, p.x, ms.noise) : std::numeric_limits<double>::infinity();
    try {
      const auto result = solve(ms, cfg, power_seed(spec.master_seed, cell, t));
      mse[task] = relative_mse(result.refined.estimate, p.x);
    } catch (const DivergenceError&) {
      mse[task] = kFailed;
    } catch (const DegenerateError&) {
      mse[task] = kFailed;
    }
    elapsed[task] = seconds_since(start);
  });

  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<double> xs, ys;
    for (std::size_t s = 0; s < snrs; ++s) {
      const std::size_t base = (c * snrs + s) * trials;
      std::vector<double> cell_mse(mse.begin() + base, mse.begin() + base + trials);
      std::vector<double> cell_snr(realized.begin() + base, realized.begin() + base + trials);
      const double snr = spec.snr_grid[s];
      const double mean_mse = mean(cell_mse);
      report.rows.push_back(row(spec, spec.ratios[c], solver_name, init_name, 0.0, snr,
                                "rel_mse_mean", mean_mse, spec.trials));
      report.rows.push_back(row(spec, spec.ratios[c], solver_name, init_name, 0.0, snr,
                                "realized_snr_db_mean", mean(cell_snr), spec.trials));
      if (std::isfinite(snr) && mean_mse > 0.0 && std::isfinite(mean_mse)) {
        xs.push_back(snr);
        ys.push_back(std::log10(mean_mse));
      }
      double total = 0.0;
      for (std::size_t t = 0; t < trials; ++t) total += elapsed[base + t];
      report.timings.push_back({fmt::format("m/n={} snr={}", spec.ratios[c], snr), total});
    }
    if (xs.size() >= 2) {
      report.rows.push_back(row(spec, spec.ratios[c], solver_name, init_name, 0.0, std::nullopt,
                                "log10_rel_mse_slope", ls_slope(xs, ys), spec.trials));
    }
  }
  return report;
}

BenchReport convergence_trace(const BenchSpec& spec) {
  validate(spec);
  BenchReport report;
  report.spec = spec;
  std::vector<Index> ms_counts;
  if (spec.m) {
    ms_counts.push_back(*spec.m);
  } else {
    for (double r : spec.ratios) ms_counts.push_back(measurement_count(spec.n, r));
  }
  const auto cells = ms_counts.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  SolverConfig cfg = spec.solver;
  cfg.method = spec.solvers.front();
  cfg.trace_every = 1;
  const std::string solver_name(to_string(cfg.method));
  const std::string init_name(to_string(cfg.init.method));
  const double sigma_rel = spec.sigma_rels.front();

  std::vector<std::optional<SolveResult>> results(cells * trials);
  std::vector<double> elapsed(cells * trials);
  parallel_for(cells * trials, spec.threads, [&](std::size_t task) {
    const auto start = Clock::now();
    const std::size_t c = task / trials, t = task % trials;
    const Index m = ms_counts[c];
    const auto cell = cell_id(spec.field, spec.n, m);
    const auto p = draw_problem(spec.field, spec.n, m, spec.master_seed, cell, t);
    const auto ms = generate_measurements(p.op, p.x, sigma_rel * p.x.norm(),
                                          noise_seed(spec.master_seed, cell, t, 0));
    try {
      results[task] = solve(ms, cfg, power_seed(spec.master_seed, cell, t)).refined;
    } catch (const DivergenceError&) {
    } catch (const DegenerateError&) {
    }
    elapsed[task] = seconds_since(start);
  });

  for (std::size_t c = 0; c < cells; ++c) {
    const double ratio = static_cast<double>(ms_counts[c]) / static_cast<double>(spec.n);
    auto add = [&](std::string statistic, double value) {
      report.rows.push_back(row(spec, ratio, solver_name, init_name, sigma_rel, std::nullopt,
                                std::move(statistic), value, spec.trials));
    };
    int successes = 0;
    std::vector<double> hits;
    std::optional<double> worst;
    double total = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& r = results[c * trials + t];
      total += elapsed[c * trials + t];
      if (!r) {
        report.traces.emplace_back();
        continue;
      }
      report.traces.push_back(r->trace);
      if (!r->converged) continue;
      ++successes;
      const auto& err = r->trace.relative_error;
      const auto hit = std::find_if(err.begin(), err.end(),
                                    [&](double e) { return e < cfg.success_threshold; });
      hits.push_back(static_cast<double>(hit - err.begin()));
      if (auto w = worst_contraction(err, 100, 0.1, 1e-12)) worst = worst ? std::max(*worst, *w) : *w;
    }
    add("success_rate", static_cast<double>(successes) / static_cast<double>(trials));
    add("iters_to_threshold_mean", hits.empty() ? std::numeric_limits<double>::quiet_NaN() : mean(hits));
    add("worst_contraction_100", worst.value_or(std::numeric_limits<double>::quiet_NaN()));
    if (const auto& first = results[c * trials]) {
      add("iters_run", first->iters_run);
      add("trace_length", static_cast<double>(first->trace.size()));
      const auto& err = first->trace.relative_error;
      for (std::size_t i = 0; i < err.size(); i += 10) add(fmt::format("rel_error@{}", i), err[i]);
      for (std::size_t i = 0; i + 100 < err.size(); i += 100) {
        add(fmt::format("contraction_100@{}", i), err[i + 100] / err[i]);
      }
    }
    report.timings.push_back({fmt::format("m={}", ms_counts[c]), total});
  }
  return report;
}

BenchReport orthogonality_profile(const BenchSpec& spec) {
  validate(spec);
  BenchReport report;
  report.spec = spec;
  const auto cells = spec.ratios.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  static constexpr double kQuantiles[] = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};
  constexpr std::size_t kStats = std::size(kQuantiles) + 4;

  std::vector<double> stats(cells * trials * kStats);
  std::vector<double> elapsed(cells * trials);
  parallel_for(cells * trials, spec.threads, [&](std::size_t task) {
    const auto start = Clock::now();
    const std::size_t c = task / trials, t = task % trials;
    const Index m = measurement_count(spec.n, spec.ratios[c]);
    const auto cell = cell_id(spec.field, spec.n, m);
    const auto p = draw_problem(spec.field, spec.n, m, spec.master_seed, cell, t);
    const auto ms = generate_measurements(p.op, p.x, 0.0, 0);
    const auto& norms = p.op.row_norms_sq();
    const double xx = p.x.norm() * p.x.norm();
    std::vector<double> cos2(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) cos2[static_cast<std::size_t>(i)] = ms.y[i] / (norms[i] * xx);
    std::sort(cos2.begin(), cos2.end());
    double* out = &stats[task * kStats];
    for (std::size_t q = 0; q < std::size(kQuantiles); ++q) out[q] = quantile(cos2, kQuantiles[q]);
    const auto below = [&](double bound) {
      return static_cast<double>(std::lower_bound(cos2.begin(), cos2.end(), bound) - cos2.begin()) /
             static_cast<double>(m);
    };
    out[std::size(kQuantiles)] = below(1e-3);
    out[std::size(kQuantiles) + 1] = below(1e-2);
    out[std::size(kQuantiles) + 2] = cos2.front();
    out[std::size(kQuantiles) + 3] = cos2.back();
    elapsed[task] = seconds_since(start);
  });

  std::vector<std::string> names;
  for (double q : kQuantiles) names.push_back(fmt::format("cos2_q{}", q));
  names.insert(names.end(), {"frac_below_1e-3", "frac_below_1e-2", "cos2_min", "cos2_max"});
  for (std::size_t c = 0; c < cells; ++c) {
    double total = 0.0;
    for (std::size_t k = 0; k < kStats; ++k) {
      std::vector<double> v(trials);
      for (std::size_t t = 0; t < trials; ++t) v[t] = stats[(c * trials + t) * kStats + k];
      const double value = k == kStats - 2 ? *std::min_element(v.begin(), v.end())
                           : k == kStats - 1 ? *std::max_element(v.begin(), v.end())
                                             : mean(v);
      report.rows.push_back(row(spec, spec.ratios[c], "-", "-", 0.0, std::nullopt, names[k], value,
                                spec.trials));
    }
    for (std::size_t t = 0; t < trials; ++t) total += elapsed[c * trials + t];
    report.timings.push_back({fmt::format("m/n={}", spec.ratios[c]), total});
  }
  return report;
}

BenchReport cdp_recovery(const BenchSpec& spec, const Image& image) {
  validate(spec);
  if (image.channels() < 1 || image.pixels() < 1) throw InvalidArgument("cdp_recovery: empty image");
  BenchSpec echo = spec;
  echo.experiment = Experiment::CdpRecovery;
  echo.field = Field::Complex;
  echo.n = image.pixels();
  echo.trials = 1;
  BenchReport report;
  report.spec = echo;
  SolverConfig cfg = spec.solver;
  cfg.method = spec.solvers.front();
  const std::string solver_name(to_string(cfg.method));
  const std::string init_name(to_string(cfg.init.method));
  const Index n = image.pixels();
  const auto bands = static_cast<std::size_t>(image.channels());

  struct BandResult {
    double init_error = kFailed;
    double final_error = kFailed;
    Vec<double> pixels;
  };
  std::vector<BandResult> results(bands);
  std::vector<double> elapsed(bands);
  parallel_for(bands, spec.threads, [&](std::size_t b) {
    const auto start = Clock::now();
    const std::uint64_t cell = mix64(cell_id(Field::Complex, n, spec.masks * n) ^ b);
    const auto op = cdp_operator(n, spec.masks, derive_seed(spec.master_seed, cell, 0, Stream::Operator));
    const SignalVector x(Vec<cplx>(image.bands[b].cast<cplx>()));
    const auto ms = generate_measurements(op, x, spec.sigma_rels.front() * x.norm(),
                                          noise_seed(spec.master_seed, cell, 0, 0));
    auto& out = results[b];
    out.pixels = Vec<double>::Zero(n);
    try {
      const auto r = solve(ms, cfg, power_seed(spec.master_seed, cell, 0));
      out.init_error = *r.init_relative_error;
      out.final_error = *r.refined.relative_error;
      // Undo the global phase before reading off the real image.
      const double phi = phase_constant(r.refined.estimate, x);
      const auto& z = r.refined.estimate.as<cplx>();
      out.pixels = (z * std::polar(1.0, -phi)).real();
    } catch (const DivergenceError&) {
    } catch (const DegenerateError&) {
    }
    elapsed[b] = seconds_since(start);
  });

  Image recovered{.width = image.width, .height = image.height, .maxval = image.maxval, .bands = {}};
  const double ratio = static_cast<double>(spec.masks);
  for (std::size_t b = 0; b < bands; ++b) {
    const std::string init_label = init_name;
    report.rows.push_back(BenchRow{Experiment::CdpRecovery, Field::Complex, n, ratio, solver_name,
                                   init_label, spec.sigma_rels.front(), std::nullopt,
                                   fmt::format("band{}_init_rel_error", b), results[b].init_error, 1,
                                   spec.master_seed});
    report.rows.push_back(BenchRow{Experiment::CdpRecovery, Field::Complex, n, ratio, solver_name,
                                   init_label, spec.sigma_rels.front(), std::nullopt,
                                   fmt::format("band{}_final_rel_error", b), results[b].final_error, 1,
                                   spec.master_seed});
    recovered.bands.push_back(std::move(results[b].pixels));
    report.timings.push_back({fmt::format("band {}", b), elapsed[b]});
  }
  report.image = std::move(recovered);
  return report;
}

BenchReport run_experiment(const BenchSpec& spec) {
  switch (spec.experiment) {
    case Experiment::SuccessRateGrid: return success_rate_grid(spec);
    case Experiment::InitErrorGrid: return init_error_grid(spec);
    case Experiment::SnrSweep: return snr_sweep(spec);
    case Experiment::ConvergenceTrace: return convergence_trace(spec);
    case Experiment::OrthogonalityProfile: return orthogonality_profile(spec);
    case Experiment::CdpRecovery: throw InvalidArgument("run_experiment: cdp recovery needs an image");
  }
  throw InvalidArgument("run_experiment: unknown experiment");
}

}  // namespace taf
