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

#include "stcpdg/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace stcpdg {

namespace {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return s;
}

// Xi(q) such that q (x) [0; w] = Xi(q) w.
Eigen::Matrix<double, 4, 3> xi_matrix(const Vec4& q) {
  Eigen::Matrix<double, 4, 3> xi;
  xi.row(0) = -q.tail<3>().transpose();
  xi.bottomRows<3>() = q(0) * Mat3::Identity() + skew(q.tail<3>());
  return xi;
}

double drag_gain(const ScenarioConfig& config) { return 0.5 * config.rho_Sa_Ca; }

}  // namespace

void AeroModel::validate() const {
  if (!(rho_Sa_Ca >= 0.0)) throw ConfigError("rho_Sa_Ca must be non-negative");
}

namespace detail {

Mat3 dcm_bi(const Vec4& q) {
  const double q0 = q(0), q1 = q(1), q2 = q(2), q3 = q(3);
  Mat3 c;
  c << q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2.0 * (q1 * q2 + q0 * q3), 2.0 * (q1 * q3 - q0 * q2),
      2.0 * (q1 * q2 - q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2.0 * (q2 * q3 + q0 * q1),
      2.0 * (q1 * q3 + q0 * q2), 2.0 * (q2 * q3 - q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3;
  return c;
}

std::array<Mat3, 4> dcm_bi_derivatives(const Vec4& q) {
  const double q0 = 2.0 * q(0), q1 = 2.0 * q(1), q2 = 2.0 * q(2), q3 = 2.0 * q(3);
  std::array<Mat3, 4> d;
  d[0] << q0, q3, -q2, -q3, q0, q1, q2, -q1, q0;
  d[1] << q1, q2, q3, q2, -q1, q0, q3, -q0, -q1;
  d[2] << -q2, q1, -q0, q1, q2, q3, q0, q3, -q2;
  d[3] << -q3, q0, q1, -q0, -q3, q2, q1, q2, q3;
  return d;
}

}  // namespace detail

Mat3 dcm_from_quaternion(const Vec4& q) {
  if (!q.allFinite() || std::abs(q.norm() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "quaternion norm " << q.norm() << " is not unit";
    throw DomainError(os.str());
  }
  return detail::dcm_bi(q);
}

Eigen::Matrix4d omega_matrix(const Vec3& w) {
  Eigen::Matrix4d o;
  o << 0.0, -w.x(), -w.y(), -w.z(),
       w.x(), 0.0, w.z(), -w.y(),
       w.y(), -w.z(), 0.0, w.x(),
       w.z(), w.y(), -w.x(), 0.0;
  return o;
}

Vec3 aero_force_body(const Vec3& v_I, const Vec4& q_BI, const AeroModel& model) {
  model.validate();
  return -0.5 * model.rho_Sa_Ca * v_I.norm() * (dcm_from_quaternion(q_BI) * v_I);
}

StateVector state_derivative(const StateVector& x, const Vec3& T_B, const ScenarioConfig& config) {
  const double m = x(idx::m);
  if (!(m > 0.0)) throw DomainError("mass must be positive");
  const Vec3 v = x.segment<3>(idx::v);
  const Vec4 q = x.segment<4>(idx::q);
  const Vec3 w = x.segment<3>(idx::w);

  const Mat3 C_BI = detail::dcm_bi(q);
  // Drag evaluated in the inertial frame, rotated into the body for torque.
  const Vec3 drag_I = -drag_gain(config) * v.norm() * v;
  const Vec3 A_B = C_BI * drag_I;

  StateVector dx;
  dx(idx::m) = -config.alpha_mdot * T_B.norm() - config.beta_mdot;
  dx.segment<3>(idx::r) = v;
  dx.segment<3>(idx::v) = (C_BI.transpose() * T_B + drag_I) / m + config.g_I;
  dx.segment<4>(idx::q) = 0.5 * omega_matrix(w) * q;
  const Vec3 torque = config.r_T_B.cross(T_B) + config.r_cp_B.cross(A_B) - w.cross(config.J_B * w);
  dx.segment<3>(idx::w) = config.J_B.ldlt().solve(torque);
  return dx;
}

StateVector state_derivative(const VehicleState& x, const ControlInput& u, const ScenarioConfig& config) {
  return state_derivative(x.pack(), u.T_B, config);
}

DynamicsJacobians dynamics_jacobians(const StateVector& x, const Vec3& T_B, const ScenarioConfig& config) {
  const double m = x(idx::m);
  if (!(m > 0.0)) throw DomainError("mass must be positive");
  const Vec3 v = x.segment<3>(idx::v);
  const Vec4 q = x.segment<4>(idx::q);
  const Vec3 w = x.segment<3>(idx::w);

  const Mat3 C_BI = detail::dcm_bi(q);
  const auto dC = detail::dcm_bi_derivatives(q);
  const Mat3 J_inv = config.J_B.inverse();
  const double k = drag_gain(config);
  const double speed = v.norm();
  const Vec3 drag_I = -k * speed * v;
  Mat3 ddrag_dv = Mat3::Zero();
  if (speed > 0.0) ddrag_dv = -k * (speed * Mat3::Identity() + v * v.transpose() / speed);
  const Mat3 rcp_skew = skew(config.r_cp_B);

  DynamicsJacobians jac;
  jac.A.setZero();
  jac.B.setZero();

  // mass
  const double thrust = T_B.norm();
  if (thrust > 0.0) jac.B.block<1, 3>(idx::m, 0) = -config.alpha_mdot * T_B.transpose() / thrust;

  // position
  jac.A.block<3, 3>(idx::r, idx::v) = Mat3::Identity();

  // velocity
  jac.A.block<3, 1>(idx::v, idx::m) = -(C_BI.transpose() * T_B + drag_I) / (m * m);
  jac.A.block<3, 3>(idx::v, idx::v) = ddrag_dv / m;
  for (int i = 0; i < 4; ++i) jac.A.block<3, 1>(idx::v, idx::q + i) = dC[i].transpose() * T_B / m;
  jac.B.block<3, 3>(idx::v, 0) = C_BI.transpose() / m;

  // attitude
  jac.A.block<4, 4>(idx::q, idx::q) = 0.5 * omega_matrix(w);
  jac.A.block<4, 3>(idx::q, idx::w) = 0.5 * xi_matrix(q);

  // angular rate
  jac.A.block<3, 3>(idx::w, idx::v) = J_inv * rcp_skew * C_BI * ddrag_dv;
  for (int i = 0; i < 4; ++i) jac.A.block<3, 1>(idx::w, idx::q + i) = J_inv * rcp_skew * dC[i] * drag_I;
  jac.A.block<3, 3>(idx::w, idx::w) = -J_inv * (skew(w) * config.J_B - skew(config.J_B * w));
  jac.B.block<3, 3>(idx::w, 0) = J_inv * skew(config.r_T_B);
  return jac;
}

StateVector propagate(const StateVector& x0, const FohControl& u, double dt, const ScenarioConfig& config,
                      const IntegratorTolerances& tol) {
  if (!(dt > 0.0)) throw DomainError("propagation interval must be positive");
  const double mass_floor = 0.5 * config.m_dry;
  Eigen::VectorXd y = x0;
  auto rhs = [&](const Eigen::VectorXd& s, Eigen::VectorXd& ds, double t) {
    if (!(s(idx::m) > mass_floor))
      throw PropagationError("mass fell below half the dry mass during propagation");
    ds = state_derivative(StateVector(s), u.at(t / dt), config);
  };
  auto renormalize = [&](Eigen::VectorXd& s, double) {
    if (!(s(idx::m) > mass_floor))
      throw PropagationError("mass fell below half the dry mass during propagation");
    s.segment<4>(idx::q).normalize();
  };
  integrate_adaptive(rhs, y, 0.0, dt, tol, renormalize);
  return StateVector(y);
}

VehicleState propagate(const VehicleState& x0, const FohControl& u, double dt, const ScenarioConfig& config,
                       const IntegratorTolerances& tol) {
  return VehicleState::unpack(propagate(x0.pack(), u, dt, config, tol));
}

}  // namespace stcpdg
