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

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "stcpdg/dynamics.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>

using namespace stcpdg;

namespace {

// The same equations of motion written with Eigen's quaternion algebra.
StateVector reference_derivative(const StateVector& x, const Vec3& T_B, const ScenarioConfig& c) {
  const double m = x(idx::m);
  const Vec3 v = x.segment<3>(idx::v);
  const Eigen::Quaterniond q(x(idx::q), x(idx::q + 1), x(idx::q + 2), x(idx::q + 3));
  const Vec3 w = x.segment<3>(idx::w);
  const Mat3 R = q.toRotationMatrix();
  const Vec3 drag = -0.5 * c.rho_Sa_Ca * v.norm() * v;
  const Vec3 drag_B = R.transpose() * drag;

  StateVector dx;
  dx(idx::m) = -c.alpha_mdot * T_B.norm() - c.beta_mdot;
  dx.segment<3>(idx::r) = v;
  dx.segment<3>(idx::v) = (R * T_B + drag) / m + c.g_I;
  const Eigen::Quaterniond qd = q * Eigen::Quaterniond(0.0, w.x(), w.y(), w.z());
  dx.segment<4>(idx::q) = 0.5 * Vec4(qd.w(), qd.x(), qd.y(), qd.z());
  dx.segment<3>(idx::w) =
      c.J_B.inverse() * (c.r_T_B.cross(T_B) + c.r_cp_B.cross(drag_B) - w.cross(c.J_B * w));
  return dx;
}

struct Sample {
  StateVector x;
  Vec3 T;
};

Sample random_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sample s;
  VehicleState st;
  st.m = 2.0 + 2.0 * (u(rng) + 1.0) / 2.0;
  st.r_I = Vec3(u(rng), u(rng), u(rng)) * 10.0;
  st.v_I = Vec3(u(rng), u(rng), u(rng)) * 4.0;
  st.q_BI = Vec4(u(rng), u(rng), u(rng), u(rng)).normalized();
  st.w_B = Vec3(u(rng), u(rng), u(rng));
  s.x = st.pack();
  s.T = Vec3(u(rng), u(rng), u(rng)).normalized() * (1.0 + 7.0 * (u(rng) + 1.0) / 2.0);
  return s;
}

ScenarioConfig lever_config() {
  ScenarioConfig c;
  c.r_cp_B = Vec3(0.05, 0.02, -0.01);
  c.r_T_B = Vec3(-0.01, 0.003, 0.002);
  return c;
}

}  // namespace

TEST_CASE("direction cosine matrix") {
  CHECK(dcm_from_quaternion(Vec4(1, 0, 0, 0)).isApprox(Mat3::Identity(), 1e-15));

  const double h = std::sqrt(0.5);
  const Mat3 C = dcm_from_quaternion(Vec4(h, h, 0, 0));
  CHECK((C * C.transpose() - Mat3::Identity()).norm() < 1e-15);
  CHECK((C * Vec3::UnitX() - Vec3::UnitX()).norm() < 1e-15);
  // Axis 2 of the inertial frame maps onto body -3 for a +90 deg frame rotation about axis 1.
  CHECK((C * Vec3::UnitY() + Vec3::UnitZ()).norm() < 1e-15);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 20; ++i) {
    const Vec4 q = Vec4(nd(rng), nd(rng), nd(rng), nd(rng)).normalized();
    const Vec3 v(nd(rng), nd(rng), nd(rng));
    // Body components: q^* (x) v (x) q.
    const Eigen::Quaterniond qq(q(0), q(1), q(2), q(3));
    const Eigen::Quaterniond vb = qq.conjugate() * Eigen::Quaterniond(0.0, v.x(), v.y(), v.z()) * qq;
    CHECK((dcm_from_quaternion(q) * v - Vec3(vb.x(), vb.y(), vb.z())).norm() < 1e-13);
  }

  CHECK_THROWS_AS(dcm_from_quaternion(Vec4(1, 1, 0, 0)), DomainError);
}

TEST_CASE("aerodynamic force") {
  AeroModel model;
  CHECK(aero_force_body(Vec3::Zero(), Vec4(1, 0, 0, 0), model).isZero());
  model.rho_Sa_Ca = 2.0;
  CHECK((aero_force_body(Vec3(0, 1, 0), Vec4(1, 0, 0, 0), model) - Vec3(0, -1, 0)).norm() < 1e-15);
  model.rho_Sa_Ca = -1.0;
  CHECK_THROWS_AS(aero_force_body(Vec3(0, 1, 0), Vec4(1, 0, 0, 0), model), ConfigError);
}

TEST_CASE("state derivative") {
  const ScenarioConfig c;
  VehicleState s;
  s.m = 3.0;

  SUBCASE("hover balance") {
    const Vec3 T = -s.m * c.g_I;
    const StateVector dx = state_derivative(s, ControlInput{T}, c);
    CHECK(dx.segment<3>(idx::v).norm() < 1e-15);
    const Vec3 expected = c.J_B.inverse() * c.r_T_B.cross(T);
    CHECK((dx.segment<3>(idx::w) - expected).norm() < 1e-15);
  }
  SUBCASE("coasting mass flow") {
    const StateVector dx = state_derivative(s, ControlInput{}, c);
    CHECK(dx(idx::m) == doctest::Approx(-0.02).epsilon(1e-15));
  }
  SUBCASE("non-positive mass") {
    s.m = 0.0;
    CHECK_THROWS_AS(state_derivative(s, ControlInput{}, c), DomainError);
  }
  SUBCASE("independent quaternion evaluation") {
    const ScenarioConfig lc = lever_config();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
      const Sample p = random_sample(rng);
      const StateVector a = state_derivative(p.x, p.T, lc);
      const StateVector b = reference_derivative(p.x, p.T, lc);
      CHECK((a - b).norm() <= 1e-12 * std::max(1.0, b.norm()));
    }
  }
}

TEST_CASE("dynamics Jacobians match central differences") {
  const ScenarioConfig c = lever_config();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Sample p = random_sample(rng);
    const DynamicsJacobians jac = dynamics_jacobians(p.x, p.T, c);
    const Eigen::MatrixXd A_fd = oracles::finite_difference(
        [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return state_derivative(StateVector(x), p.T, c); },
        p.x);
    const Eigen::MatrixXd B_fd = oracles::finite_difference(
        [&](const Eigen::VectorXd& u) -> Eigen::VectorXd { return state_derivative(p.x, Vec3(u), c); },
        Eigen::VectorXd(p.T));
    worst = std::max(worst, (A_fd - jac.A).norm() / std::max(1.0, jac.A.norm()));
    worst = std::max(worst, (B_fd - jac.B).norm() / std::max(1.0, jac.B.norm()));
  }
  CHECK(worst <= 1e-6);

  const DynamicsJacobians jac = dynamics_jacobians(VehicleState{}.pack(), Vec3(1, 0, 0), ScenarioConfig{});
  CHECK((jac.B.row(idx::m).transpose() - Vec3(-0.05, 0, 0)).norm() < 1e-15);
}

TEST_CASE("propagation") {
  SUBCASE("ballistic arc matches the coast polynomial") {
    ScenarioConfig c;
    c.rho_Sa_Ca = 0.0;
    VehicleState s;
    s.m = 4.0;
    s.r_I = c.r_I_init;
    s.v_I = c.v_I_init;
    c.t_c_max = 3.0;
    const VehicleState end = propagate(s, FohControl{}, 1.5, c);
    const auto [r, v] = coast_polynomials(1.5, c);
    CHECK((end.r_I - r).norm() < 1e-9);
    CHECK((end.v_I - v).norm() < 1e-9);
    CHECK(end.m == doctest::Approx(4.0 - 0.02 * 1.5).epsilon(1e-12));
  }
  SUBCASE("hover equilibrium") {
    ScenarioConfig c;
    c.alpha_mdot = 1e-12;
    c.beta_mdot = 0.0;
    VehicleState s;
    s.m = 3.0;
    const Vec3 T = -s.m * c.g_I;
    const VehicleState end = propagate(s, FohControl{T, T}, 1.0, c);
    CHECK(end.v_I.norm() <= 1e-8);
    CHECK(end.w_B.norm() <= 1e-8);
  }
  SUBCASE("mass floor") {
    ScenarioConfig c;
    VehicleState s;
    s.m = 4.0;
    const Vec3 T(8.0, 0.0, 0.0);
    CHECK_THROWS_AS(propagate(s, FohControl{T, T}, 10.0, c), PropagationError);
  }
  SUBCASE("non-positive interval") {
    CHECK_THROWS_AS(propagate(VehicleState{}, FohControl{}, 0.0, ScenarioConfig{}), DomainError);
  }
}
