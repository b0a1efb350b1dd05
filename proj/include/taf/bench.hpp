// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taf/image_io.hpp"
#include "taf/solver.hpp"

namespace taf {

enum class Experiment {
  SuccessRateGrid,
  InitErrorGrid,
  SnrSweep,
  ConvergenceTrace,
  OrthogonalityProfile,
  CdpRecovery,
};

std::string_view to_string(Experiment experiment);
Experiment parse_experiment(std::string_view text);

struct BenchSpec {
  Experiment experiment = Experiment::SuccessRateGrid;
  Field field = Field::Real;
  Index n = 256;
  std::vector<double> ratios{8.0};
  int trials = 100;
  /// Base configuration; `method` is overridden by each entry of `solvers`.
  SolverConfig solver{};
  std::vector<SolverMethod> solvers{SolverMethod::TAF};
  /// Initializers compared by the init-error grid.
  std::vector<InitMethod> inits{InitMethod::OrthogonalityPromoting, InitMethod::Spectral,
                                InitMethod::TruncatedSpectral};
  /// Noise levels sigma / ||x||. The init-error grid sweeps all of them;
  /// the other grids use the first.
  std::vector<double> sigma_rels{0.0};
  /// Target SNRs in dB for the SNR sweep; inf gives a noiseless control.
  std::vector<double> snr_grid{10, 20, 30, 40, 50};
  std::uint64_t master_seed = 0;
  /// Convergence trace: explicit m overrides the ratios (default 2n - 1).
  std::optional<Index> m;
  /// CDP mask count.
  Index masks = 6;
  int threads = 1;
};

void validate(const BenchSpec& spec);

/// key=value lines that, fed back through the CLI, reproduce the run.
std::vector<std::pair<std::string, std::string>> config_echo(const BenchSpec& spec);

struct BenchRow {
  Experiment experiment;
  Field field;
  Index n;
  double m_over_n;
  std::string solver;  ///< "-" when not applicable
  std::string init;
  double sigma_rel;
  std::optional<double> snr_db;
  std::string statistic;
  double value;
  int trials;
  std::uint64_t seed;
};

struct CellTiming {
  std::string label;
  double seconds;
};

struct BenchReport {
  BenchSpec spec;
  std::vector<BenchRow> rows;
  std::vector<CellTiming> timings;
  /// Convergence trace: one trace per trial (trace_every = 1).
  std::vector<IterateTrace> traces;
  /// CDP recovery: the reassembled estimate.
  std::optional<Image> image;

  /// Value of the first row matching all given coordinates.
  std::optional<double> find(std::string_view statistic, double m_over_n,
                             std::string_view solver = "", std::string_view init = "",
                             std::optional<double> sigma_rel = std::nullopt,
                             std::optional<double> snr_db = std::nullopt) const;
};

inline constexpr std::string_view kCsvHeader =
    "experiment,field,n,m_over_n,solver,init,sigma_rel,snr_db,statistic,value,trials,seed";

/// Deterministic CSV (no timings): identical specs give identical bytes.
void write_csv(std::ostream& out, const BenchReport& report);
std::string to_csv(const BenchReport& report);
/// Human-readable summary including the config echo and per-cell timings.
void write_text_report(std::ostream& out, const BenchReport& report);

/// m = round(ratio * n), at least 1.
Index measurement_count(Index n, double ratio);

/// Runs `count` tasks on up to `threads` workers. Each index is processed
/// exactly once; the first exception (by index) is rethrown after all
/// workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

BenchReport success_rate_grid(const BenchSpec& spec);
BenchReport init_error_grid(const BenchSpec& spec);
BenchReport snr_sweep(const BenchSpec& spec);
BenchReport convergence_trace(const BenchSpec& spec);
BenchReport orthogonality_profile(const BenchSpec& spec);
/// One CDP problem per image band (n = width*height, complex field).
BenchReport cdp_recovery(const BenchSpec& spec, const Image& image);

/// Dispatches on spec.experiment (CdpRecovery needs the image overload).
BenchReport run_experiment(const BenchSpec& spec);

/// Largest ratio err(t+window)/err(t) over all t with
/// floor <= err(t) < start. Returns nullopt when no window qualifies.
std::optional<double> worst_contraction(const std::vector<double>& errors, int window, double start,
                                        double floor);

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace taf
