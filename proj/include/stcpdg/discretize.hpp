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

#ifndef STCPDG_DISCRETIZE_HPP
#define STCPDG_DISCRETIZE_HPP

#include "stcpdg/core.hpp"
#include "stcpdg/integrator.hpp"
#include "stcpdg/stc.hpp"

#include <vector>

namespace stcpdg {

/// Continuous-time dynamics x_dot = f(x, u) with analytic Jacobians.
class ContinuousDynamics {
 public:
  virtual ~ContinuousDynamics() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual Eigen::VectorXd derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
  virtual void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                         Eigen::MatrixXd& B) const = 0;
};

/// The 6-DoF landing dynamics.
class LandingDynamics final : public ContinuousDynamics {
 public:
  explicit LandingDynamics(const ScenarioConfig& config) : config_(config) {}
  int state_dim() const override { return kStateDim; }
  int control_dim() const override { return kControlDim; }
  Eigen::VectorXd derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                 Eigen::MatrixXd& B) const override;

 private:
  const ScenarioConfig& config_;
};

/// x_dot = M x + N u.
class LinearDynamics final : public ContinuousDynamics {
 public:
  LinearDynamics(Eigen::MatrixXd M, Eigen::MatrixXd N) : M_(std::move(M)), N_(std::move(N)) {}
  int state_dim() const override { return static_cast<int>(M_.rows()); }
  int control_dim() const override { return static_cast<int>(N_.cols()); }
  Eigen::VectorXd derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
    return M_ * x + N_ * u;
  }
  void jacobians(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::MatrixXd& A,
                 Eigen::MatrixXd& B) const override {
    A = M_;
    B = N_;
  }

 private:
  Eigen::MatrixXd M_, N_;
};

/// Burn phase mapped onto tau in [0, 1]: dx/dtau = sigma * f(x, u) with sigma = t_b.
Eigen::VectorXd normalize_time(const ContinuousDynamics& dynamics, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, double sigma);

/// Exact FOH discretization of one interval linearized along the reference flow:
///   x_{k+1} = A x_k + B_minus u_k + B_plus u_{k+1} + S sigma + xi.
struct IntervalDiscretization {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B_minus;
  Eigen::MatrixXd B_plus;
  Eigen::VectorXd S;
  Eigen::VectorXd xi;
  Eigen::VectorXd x_end;  // reference state propagated to the interval end
};

IntervalDiscretization discretize_interval(const ContinuousDynamics& dynamics, const Eigen::VectorXd& x_k,
                                           const Eigen::VectorXd& u_k, const Eigen::VectorXd& u_next,
                                           double sigma, double dtau, const IntegratorTolerances& tol = {});

/// First-order-hold interpolation weights on [tau_k, tau_next].
std::pair<double, double> foh_weights(double tau, double tau_k, double tau_next);

/// Supporting half-space normal . u >= T_min of the set |u| >= T_min.
struct ThrustRow {
  Vec3 normal = Vec3::UnitX();
  double T_min = 0.0;
};

class DegenerateReferenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Throws DegenerateReferenceError when the reference thrust is zero.
ThrustRow linearize_thrust_lb(const Vec3& reference_u, double T_min);

enum class RowKind { surrogate, side_condition };

/// Affine row value + gradient . (x_k - reference_x) {<= 0 | == 0 | >= 0}.
struct StcRow {
  int node = 0;
  int stc = 0;    // index into the STC list
  int entry = 0;  // row of the surrogate or side-condition index
  RowKind kind = RowKind::surrogate;
  ConstraintSense sense = ConstraintSense::inequality;
  double value = 0.0;
  StateVector gradient = StateVector::Zero();
  StateVector reference = StateVector::Zero();

  // Rows whose gradient is zero and value is zero carry no information.
  bool vacuous() const { return value == 0.0 && gradient.isZero(0.0); }
};

std::vector<StcRow> linearize_stcs(const SolutionVariable& reference, const std::vector<CompoundStc>& stcs);

struct DiscretizationData {
  std::vector<StateMatrix> A;
  std::vector<ControlMatrix> B_minus;
  std::vector<ControlMatrix> B_plus;
  std::vector<StateVector> S;
  std::vector<StateVector> xi;
  std::vector<StateVector> x_end;
  std::vector<ThrustRow> thrust_rows;  // one per node
  std::vector<StcRow> stc_rows;

  int intervals() const { return static_cast<int>(A.size()); }
  /// Largest nonlinear defect |x_end_k - x_{k+1}| of the reference itself.
  double reference_defect(const SolutionVariable& reference) const;
};

struct DiscretizeOptions {
  IntegratorTolerances tolerances{};
  bool parallel = false;
};

DiscretizationData discretize_foh(const SolutionVariable& reference, const ScenarioConfig& config,
                                  const std::vector<CompoundStc>& stcs, const DiscretizeOptions& options = {});

}  // namespace stcpdg

#endif  // STCPDG_DISCRETIZE_HPP
