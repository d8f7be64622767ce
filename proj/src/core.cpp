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

#include "stcpdg/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stcpdg {

namespace {

[[noreturn]] void config_fail(const std::string& what) { throw ConfigError("invalid scenario: " + what); }

bool finite3(const Vec3& v) { return v.allFinite(); }

}  // namespace

void Units::validate() const {
  if (!(mass > 0.0) || !(length > 0.0) || !(time > 0.0))
    config_fail("units must be strictly positive");
}

StateVector VehicleState::pack() const {
  StateVector x;
  x(idx::m) = m;
  x.segment<3>(idx::r) = r_I;
  x.segment<3>(idx::v) = v_I;
  x.segment<4>(idx::q) = q_BI;
  x.segment<3>(idx::w) = w_B;
  return x;
}

VehicleState VehicleState::unpack(const StateVector& x) {
  VehicleState s;
  s.m = x(idx::m);
  s.r_I = x.segment<3>(idx::r);
  s.v_I = x.segment<3>(idx::v);
  s.q_BI = x.segment<4>(idx::q);
  s.w_B = x.segment<3>(idx::w);
  return s;
}

SolutionVariable::SolutionVariable(int K) {
  if (K < 2) throw ConfigError("a trajectory needs at least two nodes");
  X.setZero(kStateDim, K);
  U.setZero(kControlDim, K);
}

NodeWeights SolutionVariable::node(int k) const {
  NodeWeights z;
  z(0) = t_c;
  z(1) = t_b;
  z.segment<kStateDim>(2) = X.col(k);
  z.segment<kControlDim>(2 + kStateDim) = U.col(k);
  return z;
}

void SolutionVariable::validate(double t_c_max) const {
  if (K() < 2) throw ConfigError("a trajectory needs at least two nodes");
  if (U.cols() != X.cols()) throw ConfigError("state and control node counts differ");
  if (!(t_c >= 0.0) || t_c > t_c_max) throw DomainError("coast time outside [0, t_c_max]");
  if (!(t_b > 0.0)) throw DomainError("burn time must be positive");
}

NodeWeights ScenarioConfig::default_trust_weights() {
  NodeWeights w;
  w.head<2>().setConstant(3e-6);
  w.tail<kNodeDim - 2>().setConstant(1e-3);
  return w;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  return name == o.name && units == o.units && g_I == o.g_I && m_ig == o.m_ig && m_dry == o.m_dry &&
         r_T_B == o.r_T_B && r_cp_B == o.r_cp_B && J_B == o.J_B && alpha_mdot == o.alpha_mdot &&
         beta_mdot == o.beta_mdot && rho_Sa_Ca == o.rho_Sa_Ca && gamma_gs == o.gamma_gs && theta_max == o.theta_max &&
         omega_max == o.omega_max && delta_max == o.delta_max && T_min == o.T_min && T_max == o.T_max &&
         t_c_max == o.t_c_max && r_I_init == o.r_I_init && v_I_init == o.v_I_init && aoa_enabled == o.aoa_enabled &&
         alpha_max == o.alpha_max && V_alpha == o.V_alpha && keepout_enabled == o.keepout_enabled &&
         keepout_height == o.keepout_height && keepout_walls == o.keepout_walls && K == o.K && w_nu == o.w_nu &&
         W_tr == o.W_tr && trust_region_scale == o.trust_region_scale && eps_vc == o.eps_vc && eps_tr == o.eps_tr &&
         sigma_0 == o.sigma_0 && sigma_min == o.sigma_min && stc_trigger_margin == o.stc_trigger_margin &&
         stc_constraint_margin == o.stc_constraint_margin &&
         max_iterations == o.max_iterations;
}

std::vector<KeepOutWall> ScenarioConfig::default_keepout_walls() {
  // Cube beside the pad: 1 < y < 5, -2 < z < 2, below keepout_height.
  return {
      {1, WallSide::above, 1.0},
      {1, WallSide::below, 5.0},
      {2, WallSide::above, -2.0},
      {2, WallSide::below, 2.0},
  };
}

void ScenarioConfig::validate() const {
  units.validate();
  if (!finite3(g_I) || !finite3(r_T_B) || !finite3(r_cp_B) || !finite3(r_I_init) || !finite3(v_I_init))
    config_fail("vector parameters must be finite");
  if (!(m_dry > 0.0)) config_fail("m_dry must be positive");
  if (!(m_dry < m_ig)) config_fail("m_dry must be smaller than m_ig");
  if (!J_B.allFinite() || (J_B - J_B.transpose()).norm() > 1e-12 * std::max(1.0, J_B.norm()))
    config_fail("J_B must be symmetric");
  Eigen::LLT<Mat3> llt(J_B);
  if (llt.info() != Eigen::Success) config_fail("J_B must be positive definite");
  if (!(alpha_mdot > 0.0)) config_fail("alpha_mdot must be positive");
  if (!(beta_mdot >= 0.0)) config_fail("beta_mdot must be non-negative");
  if (!(rho_Sa_Ca >= 0.0)) config_fail("rho_Sa_Ca must be non-negative");
  if (!(T_min > 0.0) || !(T_min <= T_max)) config_fail("thrust bounds must satisfy 0 < T_min <= T_max");
  if (!(gamma_gs >= 0.0) || !(gamma_gs < deg2rad(90.0))) config_fail("gamma_gs must lie in [0, 90) deg");
  if (!(theta_max > 0.0) || !(theta_max <= deg2rad(90.0))) config_fail("theta_max must lie in (0, 90] deg");
  if (!(delta_max >= 0.0) || !(delta_max <= deg2rad(90.0))) config_fail("delta_max must lie in [0, 90] deg");
  if (!(omega_max > 0.0)) config_fail("omega_max must be positive");
  if (!(t_c_max >= 0.0)) config_fail("t_c_max must be non-negative");
  if (aoa_enabled) {
    if (!(V_alpha > 0.0)) config_fail("V_alpha must be positive");
    if (!(alpha_max > 0.0) || !(alpha_max < deg2rad(90.0))) config_fail("alpha_max must lie in (0, 90) deg");
  }
  if (keepout_enabled && keepout_walls.empty()) config_fail("keep-out constraint needs at least one wall");
  for (const auto& wall : keepout_walls) {
    if (wall.axis < 0 || wall.axis > 2) config_fail("keep-out wall axis must be 0, 1 or 2");
    if (!std::isfinite(wall.bound)) config_fail("keep-out wall bound must be finite");
  }
  if (!std::isfinite(keepout_height)) config_fail("keep-out height must be finite");
  if (K < 2) config_fail("K must be at least 2");
  if (!(w_nu > 0.0)) config_fail("w_nu must be positive");
  if (!W_tr.allFinite() || (W_tr.array() < 0.0).any()) config_fail("W_tr entries must be non-negative");
  if (!(eps_vc > 0.0) || !(eps_tr > 0.0)) config_fail("convergence tolerances must be positive");
  if (!(trust_region_scale > 0.0) || !std::isfinite(trust_region_scale))
    config_fail("trust_region_scale must be positive");
  if (!(stc_trigger_margin >= 0.0) || !std::isfinite(stc_trigger_margin))
    config_fail("stc_trigger_margin must be non-negative");
  if (!(stc_constraint_margin >= 0.0) || !std::isfinite(stc_constraint_margin))
    config_fail("stc_constraint_margin must be non-negative");
  if (!(sigma_min > 0.0)) config_fail("sigma_min must be positive");
  if (!(sigma_0 >= sigma_min)) config_fail("sigma_0 must be at least sigma_min");
  if (max_iterations < 1) config_fail("max_iterations must be at least 1");
}

std::pair<Vec3, Vec3> coast_polynomials(double t_c, const ScenarioConfig& config) {
  if (!(t_c >= 0.0) || t_c > config.t_c_max) {
    std::ostringstream os;
    os << "coast time " << t_c << " outside [0, " << config.t_c_max << "]";
    throw DomainError(os.str());
  }
  Vec3 r = config.r_I_init + config.v_I_init * t_c + 0.5 * config.g_I * t_c * t_c;
  Vec3 v = config.v_I_init + config.g_I * t_c;
  return {r, v};
}

SolutionVariable initial_guess(const ScenarioConfig& config) {
  config.validate();
  const int K = config.K;
  SolutionVariable guess(K);
  guess.t_c = 0.5 * config.t_c_max;
  guess.t_b = config.sigma_0;

  const auto [r0, v0] = coast_polynomials(guess.t_c, config);
  const double m_end = 0.5 * (config.m_ig + config.m_dry);

  for (int k = 0; k < K; ++k) {
    const double a = guess.tau(k);
    VehicleState s;
    s.m = (1.0 - a) * config.m_ig + a * m_end;
    s.r_I = (1.0 - a) * r0;
    s.v_I = (1.0 - a) * v0;
    guess.X.col(k) = s.pack();

    // Identity attitude so body and inertial frames coincide.
    Vec3 thrust = -s.m * config.g_I;
    const double n = thrust.norm();
    if (n < config.T_min) {
      thrust = n > 0.0 ? Vec3(thrust * (config.T_min / n)) : Vec3(config.T_min, 0.0, 0.0);
    } else if (n > config.T_max) {
      thrust *= config.T_max / n;
    }
    guess.U.col(k) = thrust;
  }
  return guess;
}

}  // namespace stcpdg
