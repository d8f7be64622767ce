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

#ifndef STCPDG_SCVX_HPP
#define STCPDG_SCVX_HPP

#include <functional>
#include <string>
#include <vector>

#include "stcpdg/conic.hpp"
#include "stcpdg/core.hpp"
#include "stcpdg/discretize.hpp"
#include "stcpdg/subproblem.hpp"

namespace stcpdg {

struct IterationMetrics {
  double nu_l1 = 0.0;
  double trust_deviation = 0.0;
  double sigma = 0.0;
  double objective = 0.0;
  double reference_defect = 0.0;  // nonlinear defect of this iteration's reference
  double discretize_time = 0.0;
  double solve_time = 0.0;
  int solver_iterations = 0;
  int stc_rows = 0;
};

struct ScvxIterate {
  int iteration = 0;
  SolutionVariable reference;
  SolutionVariable solution;
  SolveStatus solve_status = SolveStatus::optimal;
  std::string solver_diagnostics;
  IterationMetrics metrics;
  bool converged = false;
};

enum class ScvxStatus { converged, not_converged, subproblem_failed };

std::string to_string(ScvxStatus status);

struct ScvxOptions {
  std::string backend = "ipm";
  const ConicBackend* solver = nullptr;  // used instead of `backend` when set
  int max_iterations = -1;  // < 0 uses the configuration value
  DiscretizeOptions discretize{};
  std::function<void(const ScvxIterate&)> observer;
  std::function<void(int, const ConicSubproblem&)> on_subproblem;
};

struct ScvxResult {
  ScvxStatus status = ScvxStatus::not_converged;
  SolutionVariable solution;  // last accepted iterate
  std::vector<ScvxIterate> history;
  std::string message;
  double total_time = 0.0;
};

ScvxResult run(const ScenarioConfig& config, const ScvxOptions& options = {});
ScvxResult run_from(const SolutionVariable& guess, const ScenarioConfig& config, const ScvxOptions& options = {});

/// Angle between the body -x axis and the body-frame velocity, radians.
/// Returns 0 when |v| <= 1e-6.
double angle_of_attack(const StateVector& x);

struct ResidualEntry {
  std::string name;
  double worst = 0.0;  // positive values are violations
  int node = -1;
};

struct StcCheck {
  std::string name;
  std::vector<bool> triggered;  // per node
  std::vector<bool> satisfied;  // implication holds, per node
  bool all_satisfied() const;
};

struct VerificationReport {
  std::vector<StateVector> interval_defect;  // |propagated - next node| per component
  StateVector max_defect_per_component = StateVector::Zero();
  double max_defect = 0.0;
  int worst_interval = -1;
  std::string propagation_error;  // set when re-propagation failed

  double ignition_residual = 0.0;  // max over m, r, v, w at the exact coast state
  double terminal_position = 0.0;
  double terminal_velocity = 0.0;
  double terminal_rate = 0.0;
  double terminal_attitude = 0.0;  // |q - q_id|

  std::vector<ResidualEntry> constraints;
  double worst_constraint = 0.0;
  std::vector<StcCheck> stcs;

  Eigen::VectorXd time;   // t_c + tau t_b, per node
  Eigen::VectorXd speed;
  Eigen::VectorXd aoa_deg;
};

/// Slack used when checking STC implications node by node.
struct StcTolerances {
  double trigger = 1e-6;  // a trigger counts as active when g < -trigger
  double aoa_deg = 0.5;   // triggered nodes need alpha <= alpha_max + aoa_deg
  double keepout = 1e-6;  // triggered nodes need altitude >= height - keepout
};

VerificationReport verify(const SolutionVariable& solution, const ScenarioConfig& config,
                          const IntegratorTolerances& tol = {}, const StcTolerances& stc_tol = {});

struct VerifyLimits {
  double defect = 1e-3;      // per component, per interval
  double terminal = 1e-5;
  double ignition = 1e-3;   // t_c enters the ignition condition linearized
  double constraint = 1e-6;  // node-wise path constraints
};

/// Empty when the report meets every limit and every STC implication holds;
/// otherwise one line per failed check.
std::vector<std::string> verification_failures(const VerificationReport& report, const VerifyLimits& limits = {});

/// Nonlinear re-propagation at `substeps` points per interval, restarting at
/// every node. Row j corresponds to tau = j / (substeps (K - 1)).
struct FineTrajectory {
  Eigen::VectorXd tau;
  Eigen::VectorXd time;
  Eigen::Matrix<double, kStateDim, Eigen::Dynamic> X;
  Eigen::Matrix<double, kControlDim, Eigen::Dynamic> U;
};

FineTrajectory propagate_fine(const SolutionVariable& solution, const ScenarioConfig& config, int substeps = 10,
                              const IntegratorTolerances& tol = {});

}  // namespace stcpdg

#endif  // STCPDG_SCVX_HPP
