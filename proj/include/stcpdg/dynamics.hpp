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

#ifndef STCPDG_DYNAMICS_HPP
#define STCPDG_DYNAMICS_HPP

#include "stcpdg/core.hpp"
#include "stcpdg/integrator.hpp"

#include <array>

namespace stcpdg {

struct AeroModel {
  double rho_Sa_Ca = 0.2;

  void validate() const;
};

/// Direction cosine matrix C_BI of a unit quaternion (scalar first).
/// Throws DomainError when |q| differs from one by more than 1e-9.
Mat3 dcm_from_quaternion(const Vec4& q);

namespace detail {
// Homogeneous quadratic DCM, defined for any q. Equal to dcm_from_quaternion
// on the unit sphere; used wherever derivatives off the sphere matter.
Mat3 dcm_bi(const Vec4& q);
std::array<Mat3, 4> dcm_bi_derivatives(const Vec4& q);
}  // namespace detail

/// Quaternion kinematics matrix: q_dot = 0.5 * omega_matrix(w_B) * q_BI.
Eigen::Matrix4d omega_matrix(const Vec3& w_B);

/// Spherical aerodynamics: A_B = -0.5 rho_Sa_Ca |v_I| C_BI v_I.
Vec3 aero_force_body(const Vec3& v_I, const Vec4& q_BI, const AeroModel& model);

StateVector state_derivative(const StateVector& x, const Vec3& T_B, const ScenarioConfig& config);
StateVector state_derivative(const VehicleState& x, const ControlInput& u, const ScenarioConfig& config);

struct DynamicsJacobians {
  StateMatrix A;    // d x_dot / d x
  ControlMatrix B;  // d x_dot / d u
};

DynamicsJacobians dynamics_jacobians(const StateVector& x, const Vec3& T_B, const ScenarioConfig& config);

/// Control linearly interpolated between `start` (s = 0) and `end` (s = 1).
struct FohControl {
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();

  Vec3 at(double s) const { return (1.0 - s) * start + s * end; }
};

/// Integrates the nonlinear dynamics for dt time units under a first-order-hold
/// control, renormalizing the quaternion after every accepted step. Throws
/// PropagationError if the mass falls below half the dry mass.
StateVector propagate(const StateVector& x0, const FohControl& u, double dt, const ScenarioConfig& config,
                      const IntegratorTolerances& tol = {});
VehicleState propagate(const VehicleState& x0, const FohControl& u, double dt, const ScenarioConfig& config,
                       const IntegratorTolerances& tol = {});

}  // namespace stcpdg

#endif  // STCPDG_DYNAMICS_HPP
