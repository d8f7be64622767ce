/*
 Copyright 2026 The stcpdg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "stcpdg/scvx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "stcpdg/dynamics.hpp"
#include "stcpdg/stc.hpp"

namespace stcpdg {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Roundoff can push t_c a hair outside its box; the coast polynomials reject that.
void clamp_times(SolutionVariable& z, const ScenarioConfig& config) {
  z.t_c = std::clamp(z.t_c, 0.0, config.t_c_max);
  z.t_b = std::max(z.t_b, config.sigma_min);
}

}  // namespace

std::string to_string(ScvxStatus status) {
  switch (status) {
    case ScvxStatus::converged: return "converged";
    case ScvxStatus::not_converged: return "not_converged";
    case ScvxStatus::subproblem_failed: return "subproblem_failed";
  }
  return "unknown";
}

ScvxResult run(const ScenarioConfig& config, const ScvxOptions& options) {
  config.validate();
  return run_from(initial_guess(config), config, options);
}

ScvxResult run_from(const SolutionVariable& guess, const ScenarioConfig& config, const ScvxOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  if (guess.K() != config.K) throw ConfigError("initial guess node count differs from K");
  const auto stcs = with_margins(enabled_stcs(config), config.stc_trigger_margin, config.stc_constraint_margin);
  const std::unique_ptr<ConicBackend> owned = options.solver ? nullptr : make_backend(options.backend);
  const ConicBackend* backend = options.solver ? options.solver : owned.get();
  const int max_iterations = options.max_iterations >= 0 ? options.max_iterations : config.max_iterations;

  ScvxResult result;
  SolutionVariable reference = guess;
  clamp_times(reference, config);
  result.solution = reference;

  for (int it = 1; it <= max_iterations; ++it) {
    ScvxIterate iterate;
    iterate.iteration = it;
    iterate.reference = reference;

    const auto t_disc = std::chrono::steady_clock::now();
    DiscretizationData disc;
    try {
      disc = discretize_foh(reference, config, stcs, options.discretize);
    } catch (const std::exception& e) {
      result.status = ScvxStatus::subproblem_failed;
      result.message = std::string("discretization failed at iteration ") + std::to_string(it) + ": " + e.what();
      result.total_time = seconds_since(start);
      return result;
    }
    iterate.metrics.discretize_time = seconds_since(t_disc);
    iterate.metrics.reference_defect = disc.reference_defect(reference);

    const ConicSubproblem sub = assemble(reference, disc, config);
    iterate.metrics.stc_rows = sub.stc_rows;
    if (options.on_subproblem) options.on_subproblem(it, sub);
    const SolveResult solved = solve(sub, *backend);
    iterate.solve_status = solved.status;
    iterate.solver_diagnostics = solved.diagnostics;
    iterate.metrics.solve_time = solved.solve_time;
    iterate.metrics.solver_iterations = solved.iterations;
    iterate.metrics.objective = solved.objective;

    if (solved.status != SolveStatus::optimal) {
      iterate.solution = reference;
      iterate.metrics.sigma = reference.t_b;
      result.history.push_back(iterate);
      if (options.observer) options.observer(result.history.back());
      result.status = ScvxStatus::subproblem_failed;
      result.message = "subproblem " + std::to_string(it) + " returned " + to_string(solved.status) +
                       (solved.diagnostics.empty() ? "" : " (" + solved.diagnostics + ")");
      result.total_time = seconds_since(start);
      return result;
    }

    const SubproblemSolution sol = extract(sub, solved.x);
    iterate.solution = sol.trajectory;
    clamp_times(iterate.solution, config);
    iterate.metrics.nu_l1 = sol.nu_l1;
    iterate.metrics.trust_deviation = sol.trust_deviation;
    iterate.metrics.sigma = sol.trajectory.t_b;
    iterate.converged = sol.nu_l1 <= config.eps_vc && sol.trust_deviation <= config.eps_tr;
    result.history.push_back(iterate);
    if (options.observer) options.observer(result.history.back());

    reference = iterate.solution;
    result.solution = reference;
    if (iterate.converged) {
      result.status = ScvxStatus::converged;
      result.message = "converged after " + std::to_string(it) + " iterations";
      result.total_time = seconds_since(start);
      return result;
    }
  }
  result.status = ScvxStatus::not_converged;
  result.message = "no convergence within " + std::to_string(max_iterations) + " iterations";
  result.total_time = seconds_since(start);
  return result;
}

double angle_of_attack(const StateVector& x) {
  const Vec3 v_I = x.segment<3>(idx::v);
  const double speed = v_I.norm();
  if (speed <= 1e-6) return 0.0;
  Vec4 q = x.segment<4>(idx::q);
  q.normalize();
  const Vec3 v_B = dcm_from_quaternion(q) * v_I;
  return std::acos(std::clamp(-v_B.x() / v_B.norm(), -1.0, 1.0));
}

bool StcCheck::all_satisfied() const {
  return std::all_of(satisfied.begin(), satisfied.end(), [](bool b) { return b; });
}

VerificationReport verify(const SolutionVariable& solution, const ScenarioConfig& config,
                          const IntegratorTolerances& tol, const StcTolerances& stc_tol) {
  VerificationReport rep;
  const int K = solution.K();
  const double dt = solution.t_b / (K - 1);

  for (int k = 0; k + 1 < K; ++k) {
    StateVector defect = StateVector::Constant(std::numeric_limits<double>::infinity());
    try {
      const StateVector end =
          propagate(StateVector(solution.X.col(k)), FohControl{solution.U.col(k), solution.U.col(k + 1)}, dt, config, tol);
      defect = (end - solution.X.col(k + 1)).cwiseAbs();
    } catch (const std::exception& e) {
      if (rep.propagation_error.empty()) rep.propagation_error = e.what();
    }
    rep.interval_defect.push_back(defect);
    rep.max_defect_per_component = rep.max_defect_per_component.cwiseMax(defect);
    const double worst = defect.maxCoeff();
    if (rep.worst_interval < 0 || worst > rep.max_defect) {
      rep.max_defect = worst;
      rep.worst_interval = k;
    }
  }

  const VehicleState x0 = solution.state(0);
  const double t_c = std::clamp(solution.t_c, 0.0, config.t_c_max);
  const auto [p_r, p_v] = coast_polynomials(t_c, config);
  rep.ignition_residual = std::max({std::abs(x0.m - config.m_ig), (x0.r_I - p_r).cwiseAbs().maxCoeff(),
                                    (x0.v_I - p_v).cwiseAbs().maxCoeff(), x0.w_B.cwiseAbs().maxCoeff()});
  const VehicleState xf = solution.state(K - 1);
  rep.terminal_position = xf.r_I.norm();
  rep.terminal_velocity = xf.v_I.norm();
  rep.terminal_rate = xf.w_B.norm();
  rep.terminal_attitude = (xf.q_BI - Vec4(1.0, 0.0, 0.0, 0.0)).norm();

  const double tan_gs = std::tan(config.gamma_gs);
  const double tilt = std::sqrt(0.5 * (1.0 - std::cos(config.theta_max)));
  const double cos_gimbal = std::cos(config.delta_max);
  std::vector<ResidualEntry> entries = {{"mass"},           {"glide_slope"},  {"tilt"},
                                        {"angular_rate"},   {"thrust_upper"}, {"thrust_lower"},
                                        {"gimbal"}};
  for (auto& e : entries) e.worst = -std::numeric_limits<double>::infinity();
  auto record = [](ResidualEntry& e, double value, int node) {
    if (value > e.worst) {
      e.worst = value;
      e.node = node;
    }
  };
  for (int k = 0; k < K; ++k) {
    const VehicleState x = solution.state(k);
    const Vec3 T = solution.U.col(k);
    record(entries[0], config.m_dry - x.m, k);
    record(entries[1], tan_gs * x.r_I.tail<2>().norm() - x.r_I.x(), k);
    record(entries[2], x.q_BI.tail<2>().norm() - tilt, k);
    record(entries[3], x.w_B.norm() - config.omega_max, k);
    record(entries[4], T.norm() - config.T_max, k);
    record(entries[5], config.T_min - T.norm(), k);
    record(entries[6], cos_gimbal * T.norm() - T.x(), k);
  }
  entries.push_back({"coast_time", std::max(-solution.t_c, solution.t_c - config.t_c_max), -1});
  entries.push_back({"dilation", config.sigma_min - solution.t_b, -1});
  rep.constraints = entries;
  rep.worst_constraint = -std::numeric_limits<double>::infinity();
  for (const auto& e : rep.constraints) rep.worst_constraint = std::max(rep.worst_constraint, e.worst);

  rep.time.resize(K);
  rep.speed.resize(K);
  rep.aoa_deg.resize(K);
  for (int k = 0; k < K; ++k) {
    const StateVector x = solution.X.col(k);
    rep.time[k] = solution.t_c + solution.tau(k) * solution.t_b;
    rep.speed[k] = x.segment<3>(idx::v).norm();
    rep.aoa_deg[k] = rad2deg(angle_of_attack(x));
  }
  for (const auto& stc : enabled_stcs(config)) {
    StcCheck check;
    check.name = stc.name;
    for (int k = 0; k < K; ++k) {
      const StateVector x = solution.X.col(k);
      bool triggered = stc.trigger_mode == Logic::all;
      for (const auto& g : stc.triggers) {
        const bool active = g.value(x) < -stc_tol.trigger;
        triggered = stc.trigger_mode == Logic::all ? (triggered && active) : (triggered || active);
      }
      check.triggered.push_back(triggered);
      bool ok = true;
      if (triggered && stc.name == "aoa") {
        ok = rep.aoa_deg[k] <= rad2deg(config.alpha_max) + stc_tol.aoa_deg;
      } else if (triggered) {
        ok = implication_holds(stc, x, stc_tol.trigger, stc.name == "keepout" ? stc_tol.keepout : stc_tol.trigger);
      }
      check.satisfied.push_back(ok);
    }
    rep.stcs.push_back(std::move(check));
  }
  return rep;
}

std::vector<std::string> verification_failures(const VerificationReport& rep, const VerifyLimits& limits) {
  std::vector<std::string> out;
  auto check = [&](bool ok, const std::string& what, double value) {
    if (!ok) out.push_back(what + " = " + std::to_string(value));
  };
  if (!rep.propagation_error.empty()) out.push_back("propagation failed: " + rep.propagation_error);
  check(rep.max_defect <= limits.defect, "max defect (interval " + std::to_string(rep.worst_interval) + ")",
        rep.max_defect);
  check(rep.ignition_residual <= limits.ignition, "ignition residual", rep.ignition_residual);
  check(rep.terminal_position <= limits.terminal, "terminal position", rep.terminal_position);
  check(rep.terminal_velocity <= limits.terminal, "terminal velocity", rep.terminal_velocity);
  check(rep.terminal_rate <= limits.terminal, "terminal rate", rep.terminal_rate);
  check(rep.terminal_attitude <= limits.terminal, "terminal attitude", rep.terminal_attitude);
  for (const auto& c : rep.constraints)
    check(c.worst <= limits.constraint, c.name + " (node " + std::to_string(c.node) + ")", c.worst);
  for (const auto& s : rep.stcs) {
    for (std::size_t k = 0; k < s.satisfied.size(); ++k)
      if (!s.satisfied[k]) out.push_back(s.name + " implication violated at node " + std::to_string(k));
  }
  return out;
}

FineTrajectory propagate_fine(const SolutionVariable& solution, const ScenarioConfig& config, int substeps,
                              const IntegratorTolerances& tol) {
  if (substeps < 1) throw ConfigError("substeps must be positive");
  const int K = solution.K();
  const int rows = substeps * (K - 1) + 1;
  FineTrajectory fine;
  fine.tau.resize(rows);
  fine.time.resize(rows);
  fine.X.resize(kStateDim, rows);
  fine.U.resize(kControlDim, rows);
  const double dt = solution.t_b / (K - 1) / substeps;
  int row = 0;
  StateVector x;
  for (int k = 0; k + 1 < K; ++k) {
    x = solution.X.col(k);
    const FohControl foh{solution.U.col(k), solution.U.col(k + 1)};
    for (int j = 0; j < substeps; ++j, ++row) {
      const double a = static_cast<double>(j) / substeps;
      const double b = static_cast<double>(j + 1) / substeps;
      fine.tau[row] = (k + a) / (K - 1);
      fine.X.col(row) = x;
      fine.U.col(row) = foh.at(a);
      x = propagate(x, FohControl{foh.at(a), foh.at(b)}, dt, config, tol);
    }
  }
  fine.tau[row] = 1.0;
  fine.X.col(row) = x;
  fine.U.col(row) = solution.U.col(K - 1);
  fine.time = solution.t_c + solution.t_b * fine.tau.array();
  return fine;
}

}  // namespace stcpdg
