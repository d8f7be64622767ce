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
#include "stcpdg/discretize.hpp"
#include "stcpdg/ipm.hpp"
#include "stcpdg/stc.hpp"
#include "stcpdg/subproblem.hpp"

#include <cmath>
#include <set>

using namespace stcpdg;

TEST_CASE("decision vector layout") {
  VariableLayout L;
  L.K = 30;
  CHECK(L.core_size() == 30 * 17 + 2 + 29 * 14);
  CHECK(L.core_size() == 918);
  CHECK(L.size() == 918 + 29 * 14 + 30);

  std::set<int> seen;
  for (int k = 0; k < L.K; ++k) {
    for (int i = 0; i < kStateDim; ++i) seen.insert(L.x(k, i));
    for (int i = 0; i < kControlDim; ++i) seen.insert(L.u(k, i));
    seen.insert(L.eta(k));
  }
  seen.insert(L.sigma());
  seen.insert(L.t_c());
  for (int k = 0; k + 1 < L.K; ++k)
    for (int i = 0; i < kStateDim; ++i) {
      seen.insert(L.nu(k, i));
      seen.insert(L.nu_abs(k, i));
    }
  CHECK(static_cast<int>(seen.size()) == L.size());
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == L.size() - 1);

  CHECK(L.node_entry(4, 0) == L.t_c());
  CHECK(L.node_entry(4, 1) == L.sigma());
  CHECK(L.node_entry(4, 2 + idx::v) == L.x(4, idx::v));
  CHECK(L.node_entry(4, kNodeDim - 1) == L.u(4, 2));
}

TEST_CASE("trust deviation") {
  SolutionVariable a(2), b(2);
  a.t_c = b.t_c = 0.5;
  a.t_b = 10.0;
  b.t_b = 11.0;
  b.X(idx::r, 1) = 2.0;
  NodeWeights w = NodeWeights::Ones();
  w(1) = 0.25;
  // Two nodes with a sigma change of 1 each, plus one state entry of 2.
  CHECK(trust_deviation(b, a, w) == doctest::Approx(2 * 0.25 + 4.0));
  CHECK_THROWS_AS(trust_deviation(SolutionVariable(3), a, w), AssemblyError);
}

TEST_CASE("subproblem around the initial guess") {
  ScenarioConfig config;
  const SolutionVariable ref = initial_guess(config);
  const auto disc = discretize_foh(ref, config, {});
  const ConicSubproblem sub = assemble(ref, disc, config);
  const VariableLayout& L = sub.layout;
  const int K = config.K;

  CHECK(sub.program.num_vars() == L.size());
  CHECK(sub.program.num_eq() == (K - 1) * kStateDim + 10 + 13);
  CHECK(sub.program.cones.nonneg == 2 * K + 2 * (K - 1) * kStateDim + 3);
  REQUIRE(sub.program.cones.soc.size() == static_cast<std::size_t>(6 * K));
  CHECK(sub.program.cones.soc.back() == kNodeDim + 2);
  CHECK(sub.stc_rows == 0);
  CHECK(sub.trust_weights == config.trust_region_scale * config.W_tr);

  const auto res = solve(sub, InteriorPointSolver());
  REQUIRE(res.status == SolveStatus::optimal);
  const SubproblemSolution sol = extract(sub, res.x);
  const SolutionVariable& z = sol.trajectory;

  // Discrete dynamics hold with the reported virtual control.
  double worst = 0.0;
  for (int k = 0; k + 1 < K; ++k) {
    const StateVector pred = disc.A[k] * z.X.col(k) + disc.B_minus[k] * z.U.col(k) + disc.B_plus[k] * z.U.col(k + 1) +
                             disc.S[k] * z.t_b + disc.xi[k] + sol.nu.col(k);
    worst = std::max(worst, (pred - z.X.col(k + 1)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-7);

  // Boundary conditions.
  const VehicleState last = z.state(K - 1);
  CHECK(last.r_I.norm() <= 1e-7);
  CHECK(last.v_I.norm() <= 1e-7);
  CHECK(last.w_B.norm() <= 1e-7);
  CHECK((last.q_BI - Vec4(1, 0, 0, 0)).norm() <= 1e-7);
  CHECK(std::abs(z.state(0).m - config.m_ig) <= 1e-7);
  CHECK(z.t_c >= -1e-9);
  CHECK(z.t_c <= config.t_c_max + 1e-9);
  CHECK(z.t_b >= config.sigma_min - 1e-9);

  // Node-wise convex constraints.
  for (int k = 0; k < K; ++k) {
    const Vec3 u = z.U.col(k);
    CHECK(u.norm() <= config.T_max + 1e-6);
    CHECK(disc.thrust_rows[k].normal.dot(u) >= config.T_min - 1e-6);
    CHECK(z.X(idx::m, k) >= config.m_dry - 1e-6);
  }

  // The epigraph variables are tight, so the objective splits into its parts.
  double eta = 0.0, p = 0.0;
  for (int k = 0; k < K; ++k) eta += res.x[L.eta(k)];
  for (int k = 0; k + 1 < K; ++k)
    for (int i = 0; i < kStateDim; ++i) p += res.x[L.nu_abs(k, i)];
  CHECK(std::abs(eta - sol.trust_deviation) <= 1e-6 * std::max(1.0, eta));
  CHECK(std::abs(p - sol.nu_l1) <= 1e-6 * std::max(1.0, p));
  CHECK(std::abs(res.objective - (z.t_b + config.w_nu * p + eta)) <= 1e-6 * std::abs(res.objective));

  CHECK_THROWS_AS(extract(sub, Eigen::VectorXd::Zero(3)), AssemblyError);
}

TEST_CASE("STC rows enter the subproblem") {
  ScenarioConfig config;
  config.aoa_enabled = true;
  const SolutionVariable ref = initial_guess(config);
  // Turn the guess sideways so the velocity has a large angle of attack.
  SolutionVariable tilted = ref;
  for (int k = 0; k < ref.K(); ++k) tilted.X.col(k).segment<4>(idx::q) = Vec4(std::sqrt(0.5), 0, 0, std::sqrt(0.5));
  const auto stcs = enabled_stcs(config);
  const auto disc = discretize_foh(tilted, config, stcs);
  int informative = 0;
  for (const auto& row : disc.stc_rows) informative += !row.vacuous();
  REQUIRE(informative > 0);
  const ConicSubproblem sub = assemble(tilted, disc, config);
  CHECK(sub.stc_rows == informative);

  const auto plain = assemble(tilted, discretize_foh(tilted, config, {}), config);
  CHECK(sub.program.cones.nonneg == plain.program.cones.nonneg + informative);
}

TEST_CASE("assembly dimension checks") {
  ScenarioConfig config;
  const SolutionVariable ref = initial_guess(config);
  auto disc = discretize_foh(ref, config, {});
  ScenarioConfig other = config;
  other.K = 20;
  CHECK_THROWS_AS(assemble(ref, disc, other), AssemblyError);
  auto short_disc = disc;
  short_disc.A.pop_back();
  CHECK_THROWS_AS(assemble(ref, short_disc, config), AssemblyError);
  auto few_rows = disc;
  few_rows.thrust_rows.pop_back();
  CHECK_THROWS_AS(assemble(ref, few_rows, config), AssemblyError);
  auto bad_stc = disc;
  StcRow row;
  row.node = 99;
  row.value = 1.0;
  bad_stc.stc_rows.push_back(row);
  CHECK_THROWS_AS(assemble(ref, bad_stc, config), AssemblyError);
}
