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
#include "stcpdg/stc.hpp"

#include <array>
#include <cmath>
#include <random>

using namespace stcpdg;

namespace {

StateVector state_with(const Vec3& r, const Vec3& v, const Vec4& q = Vec4(1, 0, 0, 0)) {
  VehicleState s;
  s.m = 3.0;
  s.r_I = r;
  s.v_I = v;
  s.q_BI = q;
  return s.pack();
}

Logic to_logic(oracles::Combine c) { return c == oracles::Combine::all ? Logic::all : Logic::any; }

}  // namespace

TEST_CASE("shat and the projected product") {
  CHECK(shat(-2.0) == 2.0);
  CHECK(shat(0.0) == 0.0);
  CHECK(shat(3.0) == 0.0);
  CHECK(projected(1.0, 7.0) == 0.0);
  CHECK(projected(-1.0, 0.0) == 0.0);
  CHECK(projected(-0.5, 4.0) == 2.0);
}

TEST_CASE("projected form agrees with the slack form and the implication on a grid") {
  const oracles::GridAxis axis{-1.0, 1.0, 201};
  int disagreements = 0;
  for (int i = 0; i < axis.count; ++i) {
    for (int j = 0; j < axis.count; ++j) {
      const double g = axis.at(i), c = axis.at(j);
      const bool logical = !(g < 0.0) || c == 0.0;
      const bool proj = projected(g, c) == 0.0;
      const bool orig = oracles::original_form_feasible(g, c);
      if (logical != proj || logical != orig) ++disagreements;
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("projected feasible set properties") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double g = u(rng), c = u(rng);
    // Contrapositive: a violated constraint forces an inactive trigger.
    if (c != 0.0 && projected(g, c) == 0.0) CHECK(g >= 0.0);
    // The feasible set is the union of {g >= 0} and {c = 0}.
    CHECK((projected(g, c) == 0.0) == (g >= 0.0 || c == 0.0));
  }
}

TEST_CASE("scalar STC evaluation") {
  ScalarStc stc;
  stc.trigger = NodeFunction::affine_position(1.0, Vec3::Zero());
  stc.constraint = NodeFunction::affine_position(7.0, Vec3::Zero());
  const StateVector x = state_with(Vec3::Zero(), Vec3::Zero());
  CHECK(eval_projected(stc, x) == 0.0);
  stc.trigger.constant = -1.0;
  stc.constraint.constant = 0.0;
  CHECK(eval_projected(stc, x) == 0.0);
  stc.trigger = NodeFunction::affine_position(0.0, Vec3(1, 0, 0));
  stc.constraint = NodeFunction::affine_position(0.5, Vec3(0, 2, 0));
  const StateVector y = state_with(Vec3(-2.0, 1.0, 0.0), Vec3::Zero());
  CHECK(eval_projected(stc, y) == doctest::Approx(2.0 * 2.5));
}

TEST_CASE("compound forms reduce to the scalar form") {
  const std::array<double, 5> values{-1.0, -0.3, 0.0, 0.4, 2.0};
  for (Logic tm : {Logic::all, Logic::any}) {
    for (Logic cm : {Logic::all, Logic::any}) {
      for (double g : values) {
        for (double c : values) {
          const CompoundForm form{tm, cm, ConstraintSense::equality, false};
          const std::array<double, 1> gs{g}, cs{c};
          const CompoundValue v = compose(form, gs, cs);
          REQUIRE(v.h.size() == 1);
          CHECK(v.h[0] == projected(g, c));
        }
      }
    }
  }
}

TEST_CASE("an inactive trigger disables an all-trigger") {
  const std::array<double, 2> g{-1.0, 1.0};
  for (double c1 : {-3.0, 0.0, 5.0}) {
    const std::array<double, 2> c{c1, 2.0};
    for (Logic cm : {Logic::all, Logic::any}) {
      const CompoundValue v = compose({Logic::all, cm, ConstraintSense::equality, false}, g, c);
      for (double h : v.h) CHECK(h == 0.0);
    }
  }
}

TEST_CASE("compound truth tables over all sign patterns") {
  using oracles::Combine;
  const std::array<double, 3> signs{-1.0, 0.0, 1.0};
  struct Case {
    Combine trig, cons;
    bool nonneg;
  };
  const std::array<Case, 6> cases{{
      {Combine::any, Combine::all, false},
      {Combine::all, Combine::all, false},
      {Combine::any, Combine::any, false},
      {Combine::all, Combine::any, false},
      {Combine::any, Combine::all, true},
      {Combine::all, Combine::all, true},
  }};
  for (const Case& cs : cases) {
    int mismatches = 0, patterns = 0;
    for (double g1 : signs)
      for (double g2 : signs)
        for (double c1 : signs)
          for (double c2 : signs) {
            const std::vector<double> g{g1, g2}, c{c1, c2};
            const CompoundForm form{to_logic(cs.trig), to_logic(cs.cons), ConstraintSense::equality, cs.nonneg};
            const CompoundValue v = compose(form, g, c);
            bool expected = oracles::stc_truth(cs.trig, cs.cons, g, c);
            if (cs.nonneg) expected = expected && c1 >= 0.0 && c2 >= 0.0;
            if (surrogate_feasible(v, ConstraintSense::equality) != expected) ++mismatches;
            ++patterns;
          }
    CHECK(patterns == 81);
    CHECK(mismatches == 0);
  }
}

TEST_CASE("invalid compound forms") {
  const std::array<double, 2> g{-1.0, 1.0}, c{0.0, 1.0};
  const std::array<double, 0> none{};
  CHECK_THROWS_AS(compose({Logic::all, Logic::any, ConstraintSense::inequality, false}, g, c), SpecificationError);
  CHECK_THROWS_AS(compose({Logic::all, Logic::all, ConstraintSense::equality, false}, none, c), SpecificationError);
  CompoundStc empty;
  CHECK_THROWS_AS(empty.validate(), SpecificationError);
}

TEST_CASE("angle-of-attack STC") {
  ScenarioConfig config;
  config.aoa_enabled = true;
  const ScalarStc aoa = make_aoa_stc(config);
  const double amax = config.alpha_max;

  SUBCASE("slow flight leaves the trigger off") {
    // Speed 2.4 with the velocity along body +y, i.e. 90 deg from -x.
    const StateVector x = state_with(Vec3::Zero(), Vec3(0.0, 2.4, 0.0));
    CHECK(aoa.trigger.value(x) > 0.0);
    CHECK(eval_projected(aoa, x) == 0.0);
  }
  SUBCASE("zero angle of attack") {
    for (double speed : {0.5, 3.0, 40.0}) {
      const StateVector x = state_with(Vec3::Zero(), Vec3(-speed, 0.0, 0.0));
      CHECK(aoa.constraint.value(x) == doctest::Approx((std::cos(amax) - 1.0) * speed));
      CHECK(eval_projected(aoa, x) <= 0.0);
    }
  }
  SUBCASE("fast flight at 20 deg") {
    const double a = deg2rad(20.0);
    const StateVector x = state_with(Vec3::Zero(), -3.0 * Vec3(std::cos(a), std::sin(a), 0.0));
    const double expected = 0.5 * 3.0 * (std::cos(amax) - std::cos(a));
    CHECK(eval_projected(aoa, x) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(eval_projected(aoa, x) > 0.0);
  }
  SUBCASE("rotated body frame") {
    // Body pitched so its -x axis lines up with the inertial velocity.
    const double a = deg2rad(30.0);
    const Vec4 q(std::cos(a / 2), 0.0, 0.0, std::sin(a / 2));
    const Vec3 v_B = -3.0 * Vec3::UnitX();
    const Vec3 v_I = detail::dcm_bi(q).transpose() * v_B;
    const StateVector x = state_with(Vec3::Zero(), v_I, q);
    CHECK(aoa.constraint.value(x) == doctest::Approx((std::cos(amax) - 1.0) * 3.0));
  }
  SUBCASE("gradient vanishes with an inactive trigger") {
    // Speed 2.24 < V_alpha at 90 deg.
    const StateVector x = state_with(Vec3::Zero(), Vec3(0.0, 2.0, 1.0));
    CHECK(jacobian(aoa, x).isZero(0.0));
  }
  CHECK_THROWS_AS(make_aoa_stc([] {
                    ScenarioConfig c;
                    c.alpha_max = deg2rad(95.0);
                    return c;
                  }()),
                  ConfigError);
}

TEST_CASE("keep-out compound STC") {
  ScenarioConfig config;
  config.keepout_enabled = true;
  const CompoundStc stc = make_keepout_stc(config);
  REQUIRE(stc.triggers.size() == 4);
  REQUIRE(stc.constraints.size() == 1);

  SUBCASE("outside one wall") {
    const StateVector x = state_with(Vec3(1.0, 6.0, 0.0), Vec3::Zero());
    const CompoundValue v = eval_compound(stc, x);
    for (double h : v.h) CHECK(h == 0.0);
    CHECK(implication_holds(stc, x));
  }
  SUBCASE("inside every wall and too low") {
    const StateVector x = state_with(Vec3(1.0, 3.0, 0.0), Vec3::Zero());
    const CompoundValue v = eval_compound(stc, x);
    REQUIRE(v.h.size() == 1);
    // Every wall is 2 away, the constraint is 3 - 1 = 2 too low.
    CHECK(v.h[0] == doctest::Approx(16.0 * 2.0));
    CHECK_FALSE(surrogate_feasible(v, ConstraintSense::inequality));
    CHECK_FALSE(implication_holds(stc, x));
  }
  SUBCASE("inside every wall above the lid") {
    const StateVector x = state_with(Vec3(4.0, 3.0, 0.0), Vec3::Zero());
    CHECK(surrogate_feasible(eval_compound(stc, x), ConstraintSense::inequality));
    CHECK(implication_holds(stc, x));
  }
}

TEST_CASE("STC Jacobians match central differences") {
  ScenarioConfig config;
  config.aoa_enabled = true;
  config.keepout_enabled = true;
  const ScalarStc aoa = make_aoa_stc(config);
  const CompoundStc keepout = make_keepout_stc(config);
  CompoundStc any_trigger = keepout;
  any_trigger.trigger_mode = Logic::any;
  CompoundStc product = to_compound(aoa);
  product.constraints.push_back(NodeFunction::affine_position(0.2, Vec3(0.1, -0.3, 0.2)));
  product.constraint_mode = Logic::any;
  product.sense = ConstraintSense::equality;

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked_scalar = 0, checked_compound = 0;
  double worst = 0.0;
  auto rel = [](const StateVector& a, const Eigen::VectorXd& b) { return (a - b).norm() / std::max(1.0, a.norm()); };
  auto far_from_kinks = [](const CompoundStc& stc, const StateVector& x) {
    for (const auto& g : stc.triggers)
      if (std::abs(g.value(x)) <= 1e-4) return false;
    return x.segment<3>(idx::v).norm() > 1e-3;
  };

  while (checked_scalar < 100 || checked_compound < 300) {
    const Vec3 r(1.5 + 2.0 * u(rng), 3.0 + 2.5 * u(rng), 2.5 * u(rng));
    const Vec3 v = Vec3(u(rng), u(rng), u(rng)) * 3.5;
    const Vec4 q = Vec4(1.0 + 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)).normalized();
    const StateVector x = state_with(r, v, q);

    if (checked_scalar < 100 && far_from_kinks(to_compound(aoa), x)) {
      const Eigen::VectorXd fd = oracles::finite_difference_scalar(
          [&](const Eigen::VectorXd& p) { return eval_projected(aoa, StateVector(p)); }, x);
      worst = std::max(worst, rel(jacobian(aoa, x), fd));
      ++checked_scalar;
    }
    for (const CompoundStc* stc : std::array<const CompoundStc*, 3>{&keepout, &any_trigger, &product}) {
      if (!far_from_kinks(*stc, x)) continue;
      const auto rows = jacobian(*stc, x);
      const auto h = eval_compound(*stc, x).h;
      REQUIRE(rows.size() == h.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const Eigen::VectorXd fd = oracles::finite_difference_scalar(
            [&](const Eigen::VectorXd& p) { return eval_compound(*stc, StateVector(p)).h[i]; }, x);
        worst = std::max(worst, rel(rows[i], fd));
      }
      ++checked_compound;
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("margins shift triggers and inequality constraints") {
  ScenarioConfig config;
  config.aoa_enabled = true;
  config.keepout_enabled = true;
  const auto base = enabled_stcs(config);
  REQUIRE(base.size() == 2);
  CHECK(base[0].name == "aoa");
  CHECK(base[1].name == "keepout");
  const auto shifted = with_margins(base, 0.05, 1e-3);
  for (std::size_t s = 0; s < base.size(); ++s) {
    for (std::size_t i = 0; i < base[s].triggers.size(); ++i)
      CHECK(shifted[s].triggers[i].constant == base[s].triggers[i].constant - 0.05);
    for (std::size_t j = 0; j < base[s].constraints.size(); ++j)
      CHECK(shifted[s].constraints[j].constant == base[s].constraints[j].constant + 1e-3);
  }
  CompoundStc eq = base[0];
  eq.sense = ConstraintSense::equality;
  CHECK(with_margins({eq}, 0.1, 0.2)[0].constraints[0].constant == eq.constraints[0].constant);

  config.aoa_enabled = false;
  config.keepout_enabled = false;
  CHECK(enabled_stcs(config).empty());
}
