// SPDX-License-Identifier: Apache-2.0
#include "taf/solver.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace taf {

std::string_view to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::TAF: return "taf";
    case SolverMethod::AF: return "af";
    case SolverMethod::WF: return "wf";
  }
  return "?";
}

SolverMethod parse_solver_method(std::string_view text) {
  if (text == "taf") return SolverMethod::TAF;
  if (text == "af") return SolverMethod::AF;
  if (text == "wf") return SolverMethod::WF;
  throw InvalidArgument("unknown solver '" + std::string(text) + "' (expected taf|af|wf)");
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw InvalidArgument("SolverConfig: gamma must be positive");
  if (cfg.step && !(*cfg.step > 0.0)) throw InvalidArgument("SolverConfig: step must be positive");
  if (cfg.max_iters < 1) throw InvalidArgument("SolverConfig: max_iters must be >= 1");
  if (cfg.trace_every < 0) throw InvalidArgument("SolverConfig: trace_every must be >= 0");
  if (!(cfg.stop_tol >= 0.0)) throw InvalidArgument("SolverConfig: stop_tol must be >= 0");
  if (!(cfg.success_threshold > 0.0)) {
    throw InvalidArgument("SolverConfig: success threshold must be positive");
  }
  validate(cfg.init);
}

double resolved_step(const SolverConfig& cfg, Field field) {
  if (cfg.step) return *cfg.step;
  if (cfg.method == SolverMethod::WF) return 0.1;
  return field == Field::Real ? 0.6 : 1.0;
}

namespace {

// v_i = (1 - psi_i/|u_i|) u_i on {|u_i| >= psi_i/(1+gamma)}, zero elsewhere
// and where u_i = 0. Returns the number of retained indices.
template <class S>
Index amplitude_residual(const Vec<S>& u, const Vec<double>& psi, double gamma, Vec<S>& v) {
  const double keep = std::isinf(gamma) ? 0.0 : 1.0 / (1.0 + gamma);
  const Index m = u.size();
  v.resize(m);
  Index kept = 0;
  for (Index i = 0; i < m; ++i) {
    const double mag = std::abs(u[i]);
    if (mag >= keep * psi[i]) {
      ++kept;
      v[i] = mag > 0.0 ? u[i] * (1.0 - psi[i] / mag) : S(0.0);
    } else {
      v[i] = S(0.0);
    }
  }
  return kept;
}

template <class S>
void intensity_residual(const Vec<S>& u, const Vec<double>& y, Vec<S>& v) {
  v = (2.0 * (u.cwiseAbs2() - y)).template cast<S>().cwiseProduct(u);
}

template <class S>
double amplitude_loss_of(const Vec<S>& u, const Vec<double>& psi) {
  return (psi - u.cwiseAbs()).squaredNorm() / (2.0 * static_cast<double>(psi.size()));
}

template <class S>
double intensity_loss_of(const Vec<S>& u, const Vec<double>& y) {
  return (y - u.cwiseAbs2()).squaredNorm() / (2.0 * static_cast<double>(y.size()));
}

void check_problem(const SignalVector& z, const MeasurementSet& ms, std::string_view where) {
  if (z.field() != ms.field()) {
    throw InvalidArgument(std::string(where) + ": iterate field does not match operator field");
  }
  if (z.size() != ms.dim()) {
    throw InvalidArgument(std::string(where) + ": iterate dimension does not match operator");
  }
}

template <class F>
decltype(auto) with_operator(const SignalVector& z, const MeasurementSet& ms, std::string_view where,
                             F&& f) {
  check_problem(z, ms, where);
  return ms.op.visit([&](const auto& op) {
    using S = typename std::decay_t<decltype(op)>::Scalar;
    return f(op, z.as<S>());
  });
}

template <class Op>
SolveResult run_iterations(const Op& op, const MeasurementSet& ms, const SolverConfig& cfg,
                           Vec<typename Op::Scalar> z) {
  using S = typename Op::Scalar;
  const Index m = ms.measurements();
  const double inv_m = 1.0 / static_cast<double>(m);
  const bool wf = cfg.method == SolverMethod::WF;
  const double gamma = cfg.method == SolverMethod::TAF ? cfg.gamma : kNoTruncation;

  const Vec<S>* truth = ms.truth ? &ms.truth->as<S>() : nullptr;
  const double guard = cfg.divergence_radius * norm_estimate(ms, cfg.init.norm_estimator);

  // The constant steps assume (1/m) A^H A ~ I, as for Gaussian rows with
  // E||a_i||^2 = n. Unit-norm rows (unitary CDP) need the factor n back.
  double step = resolved_step(cfg, field_of<S>) * static_cast<double>(op.dim()) /
                op.expected_row_energy();
  if (wf) {
    const double z0_sq = z.squaredNorm();
    if (!(z0_sq > 0.0)) throw InvalidArgument("refine: WF step needs a nonzero starting point");
    step /= z0_sq;
  }

  SolveResult result{SignalVector(Vec<S>(z)), {}, false, 0, std::nullopt};
  auto& trace = result.trace;
  Vec<S> u(m), v(m), g(z.size());

  int t = 0;
  for (;; ++t) {
    u = op.apply(z);
    Index kept = m;
    if (wf) {
      intensity_residual(u, ms.y, v);
    } else {
      kept = amplitude_residual(u, ms.psi, gamma, v);
    }

    const bool last = t == cfg.max_iters;
    std::optional<double> rel;
    if (truth && (cfg.stop_tol > 0.0 || cfg.trace_every > 0)) rel = relative_error(z, *truth);
    const bool stop = rel && cfg.stop_tol > 0.0 && *rel < cfg.stop_tol;

    if (cfg.trace_every > 0 && (t % cfg.trace_every == 0 || last || stop)) {
      trace.iteration.push_back(t);
      trace.loss.push_back(wf ? intensity_loss_of(u, ms.y) : amplitude_loss_of(u, ms.psi));
      if (rel) trace.relative_error.push_back(*rel);
      trace.truncation_size.push_back(kept);
    }
    if (last || stop) break;

    g = op.adjoint(v);
    z.noalias() -= (step * inv_m) * g;

    if (!z.allFinite()) {
      throw DivergenceError(fmt::format("{}: non-finite iterate after {} iterations",
                                        to_string(cfg.method), t + 1));
    }
    const double nz = z.norm();
    if (nz > guard) {
      throw DivergenceError(fmt::format("{}: ||z|| = {:.3e} exceeds guard {:.3e} after {} iterations",
                                        to_string(cfg.method), nz, guard, t + 1));
    }
  }

  result.iters_run = t;
  if (truth) {
    result.relative_error = relative_error(z, *truth);
    result.converged = *result.relative_error < cfg.success_threshold;
  }
  result.estimate = SignalVector(std::move(z));
  return result;
}

}  // namespace

double amplitude_loss(const SignalVector& z, const MeasurementSet& ms) {
  return with_operator(z, ms, "amplitude_loss",
                       [&](const auto& op, const auto& zv) { return amplitude_loss_of(op.apply(zv), ms.psi); });
}

double intensity_loss(const SignalVector& z, const MeasurementSet& ms) {
  return with_operator(z, ms, "intensity_loss",
                       [&](const auto& op, const auto& zv) { return intensity_loss_of(op.apply(zv), ms.y); });
}

std::vector<Index> truncation_set(const SignalVector& z, const MeasurementSet& ms, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("truncation_set: gamma must be positive");
  return with_operator(z, ms, "truncation_set", [&](const auto& op, const auto& zv) {
    const auto u = op.apply(zv);
    const double keep = std::isinf(gamma) ? 0.0 : 1.0 / (1.0 + gamma);
    std::vector<Index> kept;
    for (Index i = 0; i < u.size(); ++i) {
      if (std::abs(u[i]) >= keep * ms.psi[i]) kept.push_back(i);
    }
    return kept;
  });
}

SignalVector taf_direction(const SignalVector& z, const MeasurementSet& ms, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("taf_direction: gamma must be positive");
  return with_operator(z, ms, "taf_direction", [&](const auto& op, const auto& zv) {
    using S = typename std::decay_t<decltype(zv)>::Scalar;
    Vec<S> v;
    amplitude_residual(op.apply(zv), ms.psi, gamma, v);
    return SignalVector(Vec<S>(op.adjoint(v) / static_cast<double>(ms.measurements())));
  });
}

SignalVector wf_direction(const SignalVector& z, const MeasurementSet& ms) {
  return with_operator(z, ms, "wf_direction", [&](const auto& op, const auto& zv) {
    using S = typename std::decay_t<decltype(zv)>::Scalar;
    Vec<S> v;
    intensity_residual(op.apply(zv), ms.y, v);
    return SignalVector(Vec<S>(op.adjoint(v) / static_cast<double>(ms.measurements())));
  });
}

SolveResult refine(const MeasurementSet& ms, const SolverConfig& cfg, const SignalVector& z0) {
  validate(cfg);
  return with_operator(z0, ms, "refine", [&](const auto& op, const auto& zv) {
    return run_iterations(op, ms, cfg, zv);
  });
}

FullSolveResult solve(const MeasurementSet& ms, const SolverConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  InitEstimate init = initialize(ms, cfg.init, seed);
  std::optional<double> init_error;
  if (ms.truth) init_error = relative_error(init.z0, *ms.truth);
  SolveResult refined = refine(ms, cfg, init.z0);
  return FullSolveResult{std::move(init), init_error, std::move(refined)};
}

}  // namespace taf
