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
#include "stcpdg/core.hpp"

#include <cmath>

using namespace stcpdg;

TEST_CASE("state packing round trip") {
  VehicleState s;
  s.m = 3.5;
  s.r_I = Vec3(1, 2, 3);
  s.v_I = Vec3(-1, 0.5, 0.25);
  s.q_BI = Vec4(0.5, 0.5, 0.5, 0.5);
  s.w_B = Vec3(0.1, -0.2, 0.3);
  const StateVector x = s.pack();
  CHECK(x(idx::m) == 3.5);
  CHECK(x(idx::r + 2) == 3.0);
  CHECK(x(idx::v) == -1.0);
  CHECK(x(idx::q + 3) == 0.5);
  CHECK(x(idx::w + 1) == -0.2);
  const VehicleState back = VehicleState::unpack(x);
  CHECK(back.pack() == x);
}

TEST_CASE("solution variable node layout") {
  SolutionVariable z(5);
  CHECK(z.K() == 5);
  CHECK(z.tau(0) == 0.0);
  CHECK(z.tau(4) == 1.0);
  CHECK(z.tau(2) == 0.5);
  z.t_c = 0.7;
  z.t_b = 9.0;
  z.X(idx::m, 3) = 2.5;
  z.U(2, 3) = -4.0;
  const NodeWeights n = z.node(3);
  CHECK(n(0) == 0.7);
  CHECK(n(1) == 9.0);
  CHECK(n(2 + idx::m) == 2.5);
  CHECK(n(kNodeDim - 1) == -4.0);

  CHECK_THROWS_AS(SolutionVariable(1), ConfigError);
  CHECK_NOTHROW(z.validate(1.0));
  CHECK_THROWS_AS(z.validate(0.5), DomainError);
  z.t_b = 0.0;
  CHECK_THROWS_AS(z.validate(1.0), DomainError);
}

TEST_CASE("configuration validation") {
  ScenarioConfig c;
  CHECK_NOTHROW(c.validate());

  auto rejects = [](auto mutate) {
    ScenarioConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  };
  rejects([](ScenarioConfig& b) { b.m_dry = b.m_ig; });
  rejects([](ScenarioConfig& b) { b.m_dry = -1.0; });
  rejects([](ScenarioConfig& b) { b.T_min = 0.0; });
  rejects([](ScenarioConfig& b) { b.T_max = 0.5; });
  rejects([](ScenarioConfig& b) { b.J_B(0, 1) = 1.0; });
  rejects([](ScenarioConfig& b) { b.J_B = -Mat3::Identity(); });
  rejects([](ScenarioConfig& b) { b.K = 1; });
  rejects([](ScenarioConfig& b) { b.gamma_gs = deg2rad(90.0); });
  rejects([](ScenarioConfig& b) { b.W_tr(3) = -1.0; });
  rejects([](ScenarioConfig& b) { b.sigma_0 = 0.01; });
  rejects([](ScenarioConfig& b) { b.units.time = 0.0; });
  rejects([](ScenarioConfig& b) { b.r_I_init(0) = std::nan(""); });
  rejects([](ScenarioConfig& b) { b.stc_trigger_margin = -0.1; });
  rejects([](ScenarioConfig& b) { b.trust_region_scale = 0.0; });
  rejects([](ScenarioConfig& b) {
    b.keepout_enabled = true;
    b.keepout_walls.clear();
  });
  rejects([](ScenarioConfig& b) { b.keepout_walls[0].axis = 3; });
  rejects([](ScenarioConfig& b) {
    b.aoa_enabled = true;
    b.V_alpha = 0.0;
  });
}

TEST_CASE("configuration equality is field by field") {
  ScenarioConfig a, b;
  CHECK(a == b);
  b.W_tr(7) = std::nextafter(b.W_tr(7), 1.0);
  CHECK_FALSE(a == b);
  b = a;
  b.keepout_walls[2].side = WallSide::below;
  CHECK_FALSE(a == b);
}

TEST_CASE("coast polynomials") {
  ScenarioConfig c;
  SUBCASE("zero coast") {
    const auto [r, v] = coast_polynomials(0.0, c);
    CHECK(r == c.r_I_init);
    CHECK(v == c.v_I_init);
  }
  SUBCASE("two units of coast") {
    const auto [r, v] = coast_polynomials(2.0, c);
    CHECK((r - Vec3(12.0, 8.86, 3.58)).norm() < 1e-12);
    CHECK((v - Vec3(-2.0, -3.57, 1.79)).norm() < 1e-12);
  }
  SUBCASE("gravity free") {
    c.g_I.setZero();
    const auto [r, v] = coast_polynomials(1.0, c);
    CHECK((r - (c.r_I_init + c.v_I_init)).norm() < 1e-15);
    CHECK(v == c.v_I_init);
  }
  CHECK_THROWS_AS(coast_polynomials(-0.1, c), DomainError);
  CHECK_THROWS_AS(coast_polynomials(2.5, c), DomainError);
}

TEST_CASE("initial guess") {
  ScenarioConfig c;
  const SolutionVariable z = initial_guess(c);
  CHECK(z.K() == 30);
  CHECK(z.t_b == 10.0);
  CHECK(z.t_c == 1.0);

  // Coast polynomial evaluated independently at t_c = 1.
  const Vec3 r_expected = c.r_I_init + c.v_I_init + 0.5 * c.g_I;
  CHECK((z.state(0).r_I - r_expected).norm() < 1e-12);
  CHECK(z.state(0).m == c.m_ig);
  CHECK(std::abs(z.state(29).m - 3.0) < 1e-12);
  CHECK(z.state(29).r_I.norm() < 1e-12);
  CHECK(z.state(29).v_I.norm() < 1e-12);
  for (int k = 0; k < z.K(); ++k) {
    const VehicleState s = z.state(k);
    CHECK(s.q_BI == Vec4(1, 0, 0, 0));
    CHECK(s.w_B.isZero());
    const double T = z.U.col(k).norm();
    CHECK(T >= c.T_min - 1e-12);
    CHECK(T <= c.T_max + 1e-12);
    // -m g clipped; here m <= 4 so the thrust is exactly m along +x.
    CHECK((z.U.col(k) - Vec3(s.m, 0, 0)).norm() < 1e-12);
  }

  SUBCASE("degenerate endpoints") {
    ScenarioConfig d;
    d.r_I_init.setZero();
    d.v_I_init.setZero();
    d.t_c_max = 0.0;
    const SolutionVariable g = initial_guess(d);
    CHECK(g.t_c == 0.0);
    for (int k = 0; k < g.K(); ++k) CHECK(g.state(k).r_I.isZero());
  }

  SUBCASE("invalid configuration") {
    ScenarioConfig bad;
    bad.K = 0;
    CHECK_THROWS_AS(initial_guess(bad), ConfigError);
  }
}
