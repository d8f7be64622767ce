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

#include "stcpdg/discretize.hpp"

#include "stcpdg/dynamics.hpp"

#include <cmath>
#include <future>
#include <sstream>

namespace stcpdg {

Eigen::VectorXd LandingDynamics::derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  return state_derivative(StateVector(x), Vec3(u), config_);
}

void LandingDynamics::jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                                Eigen::MatrixXd& B) const {
  const auto jac = dynamics_jacobians(StateVector(x), Vec3(u), config_);
  A = jac.A;
  B = jac.B;
}

Eigen::VectorXd normalize_time(const ContinuousDynamics& dynamics, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("time dilation sigma must be positive");
  return sigma * dynamics.derivative(x, u);
}

std::pair<double, double> foh_weights(double tau, double tau_k, double tau_next) {
  const double span = tau_next - tau_k;
  const double minus = (tau_next - tau) / span;
  return {minus, 1.0 - minus};
}

IntervalDiscretization discretize_interval(const ContinuousDynamics& dynamics, const Eigen::VectorXd& x_k,
                                           const Eigen::VectorXd& u_k, const Eigen::VectorXd& u_next,
                                           double sigma, double dtau, const IntegratorTolerances& tol) {
  if (!(sigma > 0.0)) throw DomainError("time dilation sigma must be positive");
  const int n = dynamics.state_dim();
  const int m = dynamics.control_dim();

  // Layout: [x | Phi | P_minus | P_plus | S | xi], matrices column-major.
  const int o_phi = n;
  const int o_bm = o_phi + n * n;
  const int o_bp = o_bm + n * m;
  const int o_s = o_bp + n * m;
  const int o_xi = o_s + n;
  const int total = o_xi + n;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(total);
  y.head(n) = x_k;
  Eigen::Map<Eigen::MatrixXd>(y.data() + o_phi, n, n).setIdentity();

  Eigen::MatrixXd Ac, Bc;
  auto rhs = [&](const Eigen::VectorXd& s, Eigen::VectorXd& ds, double t) {
    const auto [lm, lp] = foh_weights(t, 0.0, dtau);
    const Eigen::VectorXd u = lm * u_k + lp * u_next;
    const Eigen::VectorXd x = s.head(n);
    const Eigen::VectorXd f = dynamics.derivative(x, u);
    dynamics.jacobians(x, u, Ac, Bc);
    const Eigen::MatrixXd A = sigma * Ac;
    const Eigen::MatrixXd B = sigma * Bc;

    Eigen::Map<const Eigen::MatrixXd> phi(s.data() + o_phi, n, n);
    Eigen::Map<const Eigen::MatrixXd> pm(s.data() + o_bm, n, m);
    Eigen::Map<const Eigen::MatrixXd> pp(s.data() + o_bp, n, m);

    ds.head(n) = sigma * f;
    Eigen::Map<Eigen::MatrixXd>(ds.data() + o_phi, n, n) = A * phi;
    Eigen::Map<Eigen::MatrixXd>(ds.data() + o_bm, n, m) = A * pm + lm * B;
    Eigen::Map<Eigen::MatrixXd>(ds.data() + o_bp, n, m) = A * pp + lp * B;
    ds.segment(o_s, n) = A * s.segment(o_s, n) + f;
    ds.segment(o_xi, n) = A * s.segment(o_xi, n) - A * x - B * u;
  };
  integrate_adaptive(rhs, y, 0.0, dtau, tol);

  IntervalDiscretization out;
  out.x_end = y.head(n);
  out.A = Eigen::Map<const Eigen::MatrixXd>(y.data() + o_phi, n, n);
  out.B_minus = Eigen::Map<const Eigen::MatrixXd>(y.data() + o_bm, n, m);
  out.B_plus = Eigen::Map<const Eigen::MatrixXd>(y.data() + o_bp, n, m);
  out.S = y.segment(o_s, n);
  out.xi = y.segment(o_xi, n);
  return out;
}

ThrustRow linearize_thrust_lb(const Vec3& reference_u, double T_min) {
  const double n = reference_u.norm();
  if (!(n > 0.0)) throw DegenerateReferenceError("zero reference thrust has no supporting hyperplane");
  return {reference_u / n, T_min};
}

std::vector<StcRow> linearize_stcs(const SolutionVariable& reference, const std::vector<CompoundStc>& stcs) {
  std::vector<StcRow> rows;
  for (int k = 0; k < reference.K(); ++k) {
    const StateVector x = reference.X.col(k);
    for (std::size_t i = 0; i < stcs.size(); ++i) {
      const auto& stc = stcs[i];
      const auto value = eval_compound(stc, x);
      const auto grads = jacobian(stc, x);
      for (std::size_t j = 0; j < value.h.size(); ++j) {
        StcRow row;
        row.node = k;
        row.stc = static_cast<int>(i);
        row.entry = static_cast<int>(j);
        row.kind = RowKind::surrogate;
        row.sense = stc.sense;
        row.value = value.h[j];
        row.gradient = grads[j];
        row.reference = x;
        rows.push_back(row);
      }
      for (std::size_t j = 0; j < value.side_conditions.size(); ++j) {
        StcRow row;
        row.node = k;
        row.stc = static_cast<int>(i);
        row.entry = static_cast<int>(j);
        row.kind = RowKind::side_condition;
        row.sense = ConstraintSense::inequality;
        row.value = value.side_conditions[j];
        row.gradient = stc.constraints[j].gradient(x);
        row.reference = x;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

double DiscretizationData::reference_defect(const SolutionVariable& reference) const {
  double worst = 0.0;
  for (int k = 0; k < intervals(); ++k)
    worst = std::max(worst, (x_end[k] - reference.X.col(k + 1)).cwiseAbs().maxCoeff());
  return worst;
}

DiscretizationData discretize_foh(const SolutionVariable& reference, const ScenarioConfig& config,
                                  const std::vector<CompoundStc>& stcs, const DiscretizeOptions& options) {
  const int K = reference.K();
  if (K < 2) throw ConfigError("a trajectory needs at least two nodes");
  for (int k = 0; k < K; ++k) {
    if (!(reference.X(idx::m, k) > 0.0)) throw DomainError("reference mass must be positive");
  }
  const double sigma = reference.t_b;
  if (!(sigma > 0.0)) throw DomainError("time dilation sigma must be positive");

  const LandingDynamics dynamics(config);
  const double dtau = 1.0 / (K - 1);
  auto interval = [&](int k) {
    try {
      return discretize_interval(dynamics, reference.X.col(k), reference.U.col(k), reference.U.col(k + 1), sigma,
                                 dtau, options.tolerances);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "discretization failed on interval " << k << ": " << e.what();
      throw PropagationError(os.str(), k);
    }
  };

  std::vector<IntervalDiscretization> parts(K - 1);
  if (options.parallel) {
    std::vector<std::future<IntervalDiscretization>> tasks;
    tasks.reserve(K - 1);
    for (int k = 0; k < K - 1; ++k) tasks.push_back(std::async(std::launch::async, interval, k));
    for (int k = 0; k < K - 1; ++k) parts[k] = tasks[k].get();
  } else {
    for (int k = 0; k < K - 1; ++k) parts[k] = interval(k);
  }

  DiscretizationData data;
  for (auto& p : parts) {
    data.A.emplace_back(p.A);
    data.B_minus.emplace_back(p.B_minus);
    data.B_plus.emplace_back(p.B_plus);
    data.S.emplace_back(p.S);
    data.xi.emplace_back(p.xi);
    data.x_end.emplace_back(p.x_end);
  }

  const Vec3 fallback = -config.g_I.normalized();
  for (int k = 0; k < K; ++k) {
    try {
      data.thrust_rows.push_back(linearize_thrust_lb(reference.U.col(k), config.T_min));
    } catch (const DegenerateReferenceError&) {
      data.thrust_rows.push_back({fallback, config.T_min});
    }
  }
  data.stc_rows = linearize_stcs(reference, stcs);
  return data;
}

}  // namespace stcpdg
