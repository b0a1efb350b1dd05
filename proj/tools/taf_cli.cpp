// SPDX-License-Identifier: Apache-2.0
// taf: command-line driver for the amplitude-flow solvers and benchmarks.
//
//   taf solve --field real --n 64 --m 512 --seed 1 --method taf
//   taf bench success-rate --ratios 1:7:0.5 --trials 100 --out ./r
//   taf bench acceptance --check
//   taf cdp --image data/demo_64x64.ppm --out ./cdp
//   taf profile --n 1000 --ratios 2:10:1
//
// Options may come from a key=value file (--spec); command-line flags win.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "taf/acceptance.hpp"
#include "taf/bench.hpp"
#include "taf/image_io.hpp"
#include "taf/problem_io.hpp"
#include "taf/rng.hpp"

#ifndef TAF_VERSION
#define TAF_VERSION "0.0.0"
#endif
#ifndef TAF_DATA_DIR
#define TAF_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace {

/// Raw option values, before defaults that depend on the command.
struct Options {
  std::string field = "real";
  std::optional<long long> n;
  std::optional<long long> m;
  std::vector<std::string> ratios;
  std::optional<int> trials;
  std::uint64_t seed = 0;
  std::string method = "taf";
  std::vector<std::string> solvers;
  std::string init = "orth";
  std::vector<std::string> inits{"orth", "spectral", "trunc-spectral"};
  double gamma = 0.7;
  std::optional<double> step;
  std::optional<int> iters;
  std::optional<int> power_iters;
  std::string complement_fraction = "1/6";
  std::string mineig_fraction = "1/2";
  double trunc_alpha = 3.0;
  std::string norm_estimator = "mean-intensity";
  double stop_tol = 0.0;
  double threshold = taf::kSuccessThreshold;
  std::vector<std::string> sigma_rel;
  std::vector<std::string> snr{"10:50:10"};
  long long masks = 6;
  int trace_every = 0;
  std::string problem;
  std::string export_problem;
  std::string image;
  std::vector<std::string> only;
  std::string data_dir = TAF_DATA_DIR;

  // Written into manifests; accepted from --spec files and otherwise unused.
  std::string manifest_version, manifest_experiment;
  std::vector<std::string> manifest_command;

  std::string out;
  int threads = 1;
  bool verbose = false;
  bool check = false;
};

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) out += (out.empty() ? "" : ",") + item;
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(sep, pos);
    const auto part = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (!part.empty()) parts.push_back(part);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return parts;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw taf::InvalidArgument("not a number: '" + text + "'");
  return v;
}

/// Comma-separated values; each item is a number or start:stop:step, with
/// stop included when it lies on the grid.
std::vector<double> parse_range(const std::string& text) {
  std::vector<double> values;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      values.push_back(parse_double(parts[0]));
      continue;
    }
    if (parts.size() != 3) throw taf::InvalidArgument("bad range '" + item + "' (expected start:stop:step)");
    const double start = parse_double(parts[0]), stop = parse_double(parts[1]), step = parse_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw taf::InvalidArgument("bad range '" + item + "'");
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long k = 0; k <= count; ++k) {
      // Snap to 12 decimals so that 1 + 3*0.1 prints as 1.3.
      values.push_back(std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12);
    }
  }
  if (values.empty()) throw taf::InvalidArgument("empty value list '" + text + "'");
  return values;
}

taf::Fraction parse_fraction(const std::string& text) {
  const auto parts = split(text, '/');
  if (parts.size() != 2) throw taf::InvalidArgument("bad fraction '" + text + "' (expected p/q)");
  return taf::Fraction{std::stoll(parts[0]), std::stoll(parts[1])};
}

taf::SolverConfig solver_config(const Options& o) {
  taf::SolverConfig cfg;
  cfg.method = taf::parse_solver_method(o.method);
  cfg.gamma = o.gamma;
  cfg.step = o.step;
  if (o.iters) cfg.max_iters = *o.iters;
  cfg.trace_every = o.trace_every;
  cfg.stop_tol = o.stop_tol;
  cfg.success_threshold = o.threshold;
  cfg.init.method = taf::parse_init_method(o.init);
  if (o.power_iters) cfg.init.power_iters = *o.power_iters;
  cfg.init.complement_fraction = parse_fraction(o.complement_fraction);
  cfg.init.min_eig_fraction = parse_fraction(o.mineig_fraction);
  cfg.init.spectral_trunc_alpha = o.trunc_alpha;
  cfg.init.norm_estimator = taf::parse_norm_estimator(o.norm_estimator);
  taf::validate(cfg);
  return cfg;
}

taf::Field field_of(const Options& o) { return taf::parse_field(o.field); }

taf::Index dimension(const Options& o, taf::Index fallback) {
  if (o.n && *o.n < 1) throw taf::InvalidArgument("--n must be >= 1");
  return o.n ? static_cast<taf::Index>(*o.n) : fallback;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& echo) {
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw taf::InvalidArgument("cannot write " + (dir / "manifest.txt").string());
  fmt::print(out, "library-version={}\ncommand={}\n", TAF_VERSION, command);
  for (const auto& [key, value] : echo) fmt::print(out, "{}={}\n", key, value);
}

fs::path prepare_out(const Options& o) {
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw taf::InvalidArgument("cannot create output directory " + o.out);
  return dir;
}

void emit_report(const Options& o, const std::string& command, const taf::BenchReport& report) {
  if (o.out.empty()) {
    taf::write_text_report(std::cout, report);
    return;
  }
  const fs::path dir = prepare_out(o);
  const std::string stem(taf::to_string(report.spec.experiment));
  {
    std::ofstream csv(dir / (stem + ".csv"));
    taf::write_csv(csv, report);
    if (!csv) throw taf::InvalidArgument("failed writing " + (dir / (stem + ".csv")).string());
  }
  std::ofstream text(dir / (stem + "_report.txt"));
  taf::write_text_report(text, report);
  write_manifest(dir, command, taf::config_echo(report.spec));
  if (o.verbose) fmt::print(std::cerr, "wrote {}\n", (dir / (stem + ".csv")).string());
}

// ---- commands ----

int run_solve(const Options& o) {
  taf::SolverConfig cfg = solver_config(o);
  cfg.trace_every = o.trace_every > 0 ? o.trace_every : (o.out.empty() ? 0 : 1);
  std::optional<taf::MeasurementSet> ms;
  std::uint64_t seed = o.seed;
  if (!o.problem.empty()) {
    auto loaded = taf::read_problem(fs::path(o.problem));
    seed = loaded.seed;
    ms.emplace(std::move(loaded.ms));
  } else {
    const taf::Field field = field_of(o);
    const taf::Index n = dimension(o, field == taf::Field::Real ? 256 : 128);
    const taf::Index m = o.m ? static_cast<taf::Index>(*o.m) : 8 * n;
    if (m < 1) throw taf::InvalidArgument("--m must be >= 1");
    const auto op = taf::gaussian_operator(n, m, field, taf::derive_seed(seed, 0, 0, taf::Stream::Operator));
    const auto x = taf::random_signal(n, field, taf::derive_seed(seed, 0, 0, taf::Stream::Signal));
    const double sigma_rel = o.sigma_rel.empty() ? 0.0 : parse_double(joined(o.sigma_rel));
    ms.emplace(taf::generate_measurements(op, x, sigma_rel * x.norm(),
                                          taf::derive_seed(seed, 0, 0, taf::Stream::Noise)));
  }
  if (!o.export_problem.empty()) taf::write_problem(fs::path(o.export_problem), *ms, seed);

  const auto start = std::chrono::steady_clock::now();
  const auto result = taf::solve(*ms, cfg, taf::derive_seed(seed, 0, 0, taf::Stream::PowerStart));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fmt::print("field {} n {} m {} method {} init {}\n", taf::to_string(ms->field()), ms->dim(),
             ms->measurements(), taf::to_string(cfg.method), taf::to_string(cfg.init.method));
  fmt::print("iterations {}\n", result.refined.iters_run);
  if (result.init_relative_error) fmt::print("init relative error {:.6e}\n", *result.init_relative_error);
  if (result.refined.relative_error) {
    fmt::print("final relative error {:.6e}\n", *result.refined.relative_error);
    fmt::print("success {}\n", result.refined.converged ? "yes" : "no");
  } else {
    fmt::print("final amplitude loss {:.6e}\n", taf::amplitude_loss(result.refined.estimate, *ms));
  }
  if (o.verbose) fmt::print(std::cerr, "solve took {:.3f} s\n", secs);

  if (!o.out.empty()) {
    const fs::path dir = prepare_out(o);
    std::ofstream trace(dir / "trace.csv");
    trace << "iteration,loss,relative_error,truncation_size\n";
    const auto& t = result.refined.trace;
    for (std::size_t i = 0; i < t.size(); ++i) {
      fmt::print(trace, "{},{:.17g},{},{}\n", t.iteration[i], t.loss[i],
                 t.relative_error.empty() ? std::string() : fmt::format("{:.17g}", t.relative_error[i]),
                 t.truncation_size[i]);
    }
    write_manifest(dir, "solve",
                   {{"field", std::string(taf::to_string(ms->field()))},
                    {"n", std::to_string(ms->dim())},
                    {"m", std::to_string(ms->measurements())},
                    {"seed", std::to_string(seed)},
                    {"method", std::string(taf::to_string(cfg.method))},
                    {"init", std::string(taf::to_string(cfg.init.method))},
                    {"gamma", fmt::format("{}", cfg.gamma)},
                    {"step", cfg.step ? fmt::format("{}", *cfg.step) : "default"},
                    {"iters", std::to_string(cfg.max_iters)},
                    {"power-iters", std::to_string(cfg.init.power_iters)},
                    {"problem", o.problem}});
  }
  return 0;
}

taf::BenchSpec bench_spec(const Options& o, taf::Experiment experiment) {
  using taf::Experiment;
  taf::BenchSpec spec;
  spec.experiment = experiment;
  spec.field = field_of(o);
  const bool real = spec.field == taf::Field::Real;
  spec.n = dimension(o, experiment == Experiment::OrthogonalityProfile ? 1000 : real ? 256 : 128);
  spec.solver = solver_config(o);
  spec.master_seed = o.seed;
  spec.threads = std::max(1, o.threads);
  spec.masks = static_cast<taf::Index>(o.masks);

  std::string ratios = joined(o.ratios);
  int trials = 100;
  switch (experiment) {
    case Experiment::SuccessRateGrid:
      if (ratios.empty()) ratios = real ? "1:7:0.5" : "2:7:0.5";
      break;
    case Experiment::InitErrorGrid:
      if (ratios.empty()) ratios = "2:20:2";
      trials = 50;
      break;
    case Experiment::SnrSweep:
      if (ratios.empty()) ratios = "6,8,10";
      trials = 50;
      break;
    case Experiment::ConvergenceTrace:
      trials = 1;
      if (o.m) spec.m = static_cast<taf::Index>(*o.m);
      if (ratios.empty() && !o.m) spec.m = 2 * spec.n - 1;
      break;
    case Experiment::OrthogonalityProfile:
      if (ratios.empty()) ratios = "2:10:1";
      trials = 1;
      break;
    case Experiment::CdpRecovery:
      trials = 1;
      break;
  }
  spec.ratios = ratios.empty() ? std::vector<double>{} : parse_range(ratios);
  spec.trials = o.trials.value_or(trials);

  spec.solvers.clear();
  for (const auto& s : split(o.solvers.empty() ? o.method : joined(o.solvers), ',')) {
    spec.solvers.push_back(taf::parse_solver_method(s));
  }
  spec.inits.clear();
  for (const auto& s : o.inits) spec.inits.push_back(taf::parse_init_method(s));
  if (!o.sigma_rel.empty()) {
    spec.sigma_rels = parse_range(joined(o.sigma_rel));
  } else if (experiment == Experiment::InitErrorGrid) {
    spec.sigma_rels = {0.0, 0.2};
  }
  spec.snr_grid.clear();
  for (const auto& s : split(joined(o.snr), ',')) {
    if (s == "inf") {
      spec.snr_grid.push_back(std::numeric_limits<double>::infinity());
    } else {
      for (double v : parse_range(s)) spec.snr_grid.push_back(v);
    }
  }
  taf::validate(spec);
  return spec;
}

int run_bench(const Options& o, taf::Experiment experiment) {
  const auto spec = bench_spec(o, experiment);
  const auto start = std::chrono::steady_clock::now();
  const auto report = taf::run_experiment(spec);
  if (o.verbose) {
    fmt::print(std::cerr, "{} finished in {:.2f} s\n", taf::to_string(experiment),
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  emit_report(o, fmt::format("bench {}", taf::to_string(experiment)), report);
  return 0;
}

int run_acceptance(const Options& o) {
  taf::AcceptanceOptions options;
  options.seed = o.seed == 0 ? 1 : o.seed;
  options.threads = std::max(1, o.threads);
  options.data_dir = o.data_dir;
  for (const auto& s : split(joined(o.only), ',')) options.only.insert(std::stoi(s));
  std::vector<std::string> lines;
  const auto results = taf::run_acceptance(options, [&](const taf::CriterionResult& r) {
    lines.push_back(taf::format_result(r));
    fmt::print("{}\n", lines.back());
    std::fflush(stdout);
  });
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  fmt::print("{} of {} criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
  if (!o.out.empty()) {
    const fs::path dir = prepare_out(o);
    std::ofstream out(dir / "acceptance.txt");
    for (const auto& l : lines) out << l << '\n';
    write_manifest(dir, "bench acceptance",
                   {{"seed", std::to_string(options.seed)}, {"threads", std::to_string(options.threads)},
                    {"only", joined(o.only)}, {"data-dir", o.data_dir}});
  }
  return (o.check && failed > 0) ? 1 : 0;
}

int run_cdp(const Options& o) {
  if (o.image.empty()) throw taf::InvalidArgument("cdp: --image is required");
  const auto image = taf::load_image(fs::path(o.image));
  taf::BenchSpec spec;
  spec.experiment = taf::Experiment::CdpRecovery;
  spec.field = taf::Field::Complex;
  spec.n = image.pixels();
  spec.trials = 1;
  spec.masks = static_cast<taf::Index>(o.masks);
  spec.master_seed = o.seed;
  spec.threads = std::max(1, o.threads);
  spec.solver = solver_config(o);
  spec.solver.init.power_iters = o.power_iters.value_or(100);
  spec.solver.max_iters = o.iters.value_or(100);
  spec.solvers = {spec.solver.method};
  if (!o.sigma_rel.empty()) spec.sigma_rels = {parse_double(joined(o.sigma_rel))};
  const auto report = taf::cdp_recovery(spec, image);

  for (const auto& r : report.rows) fmt::print("{} {:.6e}\n", r.statistic, r.value);
  if (!o.out.empty()) {
    emit_report(o, "cdp", report);
    const fs::path dir(o.out);
    const fs::path name = image.channels() == 1 ? "recovered.pgm" : "recovered.ppm";
    taf::save_image(dir / name, *report.image);
    if (o.verbose) fmt::print(std::cerr, "wrote {}\n", (dir / name).string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated amplitude flow: phase retrieval solvers and Monte-Carlo benchmarks", "taf"};
  app.set_version_flag("--version", TAF_VERSION);
  app.set_config("--spec", "", "key=value file with option defaults (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  Options o;

  // Options shared by all commands live on the top-level app; subcommands
  // let unknown flags fall through to it.
  app.add_option("--field", o.field, "real or complex")->check(CLI::IsMember({"real", "complex"}));
  app.add_option("--n", o.n, "signal dimension");
  app.add_option("--m", o.m, "measurement count (solve; convergence)");
  app.add_option("--ratios", o.ratios, "m/n values: list and/or start:stop:step")->delimiter(',');
  app.add_option("--trials", o.trials, "Monte-Carlo trials per cell");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--method", o.method, "taf, af or wf")->check(CLI::IsMember({"taf", "af", "wf"}));
  app.add_option("--solvers", o.solvers, "comma-separated solvers for success-rate grids")->delimiter(',');
  app.add_option("--init", o.init, "orth, spectral, trunc-spectral or orth-mineig");
  app.add_option("--inits", o.inits, "initializers compared by init-error")->delimiter(',');
  app.add_option("--gamma", o.gamma, "truncation parameter");
  app.add_option("--step", o.step, "step size (default 0.6 real, 1.0 complex, 0.1 for wf)");
  app.add_option("--iters", o.iters, "refinement iterations T");
  app.add_option("--power-iters", o.power_iters, "power iterations (Lanczos steps for orth-mineig)");
  app.add_option("--complement-fraction", o.complement_fraction, "|I0|/m as p/q");
  app.add_option("--mineig-fraction", o.mineig_fraction, "min-eigenvalue index set size as p/q");
  app.add_option("--trunc-alpha", o.trunc_alpha, "truncated spectral screening constant");
  app.add_option("--norm-estimator", o.norm_estimator, "mean-intensity or row-norm-ratio");
  app.add_option("--stop-tol", o.stop_tol, "early stop on relative error (0 disables)");
  app.add_option("--threshold", o.threshold, "success threshold on relative error");
  app.add_option("--sigma-rel", o.sigma_rel, "noise sigma relative to ||x|| (list for init-error)")->delimiter(',');
  app.add_option("--snr", o.snr, "SNR grid in dB (list, ranges, inf)")->delimiter(',');
  app.add_option("--masks", o.masks, "CDP mask count K");
  app.add_option("--trace-every", o.trace_every, "record every k-th iterate (solve)");
  app.add_option("--out", o.out, "output directory for CSV, report and manifest");
  app.add_option("--threads", o.threads, "worker threads")->envname("AF_THREADS");
  app.add_flag("--verbose,-v", o.verbose, "progress and timings on stderr");
  app.add_flag("--check", o.check, "exit nonzero when an acceptance criterion fails");
  app.add_option("--problem", o.problem, "solve: read the instance from an exported problem file");
  app.add_option("--export", o.export_problem, "solve: write the instance to a problem file");
  app.add_option("--image", o.image, "cdp: netpbm image (P2/P3/P5/P6)");
  app.add_option("--only", o.only, "acceptance: comma-separated criterion ids")->delimiter(',');
  app.add_option("--data-dir", o.data_dir, "acceptance: fixture directory");
  app.add_option("--library-version", o.manifest_version)->group("");
  app.add_option("--command", o.manifest_command)->group("");
  app.add_option("--experiment", o.manifest_experiment)->group("");

  auto* solve = app.add_subcommand("solve", "solve one problem instance");
  solve->fallthrough();

  auto* bench = app.add_subcommand("bench", "Monte-Carlo experiments");
  bench->fallthrough();
  bench->require_subcommand(1);
  std::optional<taf::Experiment> experiment;
  for (auto e : {taf::Experiment::SuccessRateGrid, taf::Experiment::InitErrorGrid, taf::Experiment::SnrSweep,
                 taf::Experiment::ConvergenceTrace, taf::Experiment::OrthogonalityProfile}) {
    auto* sub = bench->add_subcommand(std::string(taf::to_string(e)));
    sub->fallthrough();
    sub->callback([&experiment, e] { experiment = e; });
  }
  auto* acceptance = bench->add_subcommand("acceptance", "run the acceptance criteria");
  acceptance->fallthrough();

  auto* cdp = app.add_subcommand("cdp", "recover an image from coded diffraction patterns");
  cdp->fallthrough();

  auto* profile = app.add_subcommand("profile", "orthogonality profile (same as bench profile)");
  profile->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (solve->parsed()) return run_solve(o);
    if (cdp->parsed()) return run_cdp(o);
    if (profile->parsed()) return run_bench(o, taf::Experiment::OrthogonalityProfile);
    if (acceptance->parsed()) return run_acceptance(o);
    if (experiment) return run_bench(o, *experiment);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 2;
  }
  return 2;
}
