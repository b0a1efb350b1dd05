// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "taf/init.hpp"
#include "taf/metrics.hpp"
#include "taf/model.hpp"

namespace taf {

enum class SolverMethod {
  TAF,  ///< truncated amplitude flow
  AF,   ///< amplitude flow, no truncation
  WF,   ///< gradient descent on the intensity loss
};

std::string_view to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view text);

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

struct SolverConfig {
  SolverMethod method = SolverMethod::TAF;
  double gamma = 0.7;
  /// TAF/AF: constant step (default 0.6 real, 1.0 complex). WF: the step is
  /// step / ||z0||^2 with default step 0.1. Both are multiplied by
  /// n / E||a_i||^2, which is 1 for Gaussian designs and n for unitary CDP.
  std::optional<double> step;
  int max_iters = 1000;
  InitConfig init{};
  /// Record every k-th iterate (and the first and last); 0 disables.
  int trace_every = 0;
  /// Stop once the relative error drops below this (needs truth); 0 disables.
  double stop_tol = 0.0;
  double success_threshold = kSuccessThreshold;
  /// Abort when ||z_t|| exceeds this multiple of the norm estimate.
  double divergence_radius = 1e6;
};

void validate(const SolverConfig& cfg);

/// Step actually used by `method` on a problem over `field`; for WF this is
/// the unscaled constant that gets divided by ||z0||^2.
double resolved_step(const SolverConfig& cfg, Field field);

struct IterateTrace {
  std::vector<int> iteration;
  std::vector<double> loss;
  std::vector<double> relative_error;  ///< empty when the truth is unknown
  std::vector<Index> truncation_size;

  std::size_t size() const { return iteration.size(); }
};

struct SolveResult {
  SignalVector estimate;
  IterateTrace trace;
  bool converged = false;
  int iters_run = 0;
  std::optional<double> relative_error;  ///< final, when the truth is known
};

struct FullSolveResult {
  InitEstimate init;
  std::optional<double> init_relative_error;
  SolveResult refined;
};

/// (1/2m) sum (psi_i - |(Az)_i|)^2.
double amplitude_loss(const SignalVector& z, const MeasurementSet& ms);
/// (1/2m) sum (y_i - |(Az)_i|^2)^2.
double intensity_loss(const SignalVector& z, const MeasurementSet& ms);

/// {i : |(Az)_i| >= psi_i / (1 + gamma)}, ascending.
std::vector<Index> truncation_set(const SignalVector& z, const MeasurementSet& ms, double gamma);

/// (1/m) A^H v with v_i = (1 - psi_i/|u_i|) u_i on the truncation set and 0
/// elsewhere (and where u_i = 0), u = Az. gamma = kNoTruncation keeps every
/// index. In the complex field this is the gradient with respect to
/// (Re z, Im z) packed as a complex vector, i.e. twice the Wirtinger
/// derivative d/d(conj z).
SignalVector taf_direction(const SignalVector& z, const MeasurementSet& ms, double gamma);

/// (1/m) A^H [2 (|u_i|^2 - y_i) u_i], the gradient of intensity_loss in the
/// same convention.
SignalVector wf_direction(const SignalVector& z, const MeasurementSet& ms);

/// Runs the configured initializer, then the refinement loop.
FullSolveResult solve(const MeasurementSet& ms, const SolverConfig& cfg, std::uint64_t seed);

/// Refinement loop from an explicit starting point. Throws DivergenceError
/// on a non-finite iterate or when ||z_t|| leaves the guard radius.
SolveResult refine(const MeasurementSet& ms, const SolverConfig& cfg, const SignalVector& z0);

}  // namespace taf
