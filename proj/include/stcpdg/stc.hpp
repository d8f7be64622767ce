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

#ifndef STCPDG_STC_HPP
#define STCPDG_STC_HPP

#include "stcpdg/core.hpp"

#include <span>
#include <string>
#include <vector>

namespace stcpdg {

/// Scalar function of one node's state built from the primitives the landing
/// constraints need:
///   f(x) = constant + position_weights . r_I + speed_coeff * |v_I|
///          + projection_coeff * body_axis . (C_BI(q) v_I)
struct NodeFunction {
  double constant = 0.0;
  Vec3 position_weights = Vec3::Zero();
  double speed_coeff = 0.0;
  double projection_coeff = 0.0;
  Vec3 body_axis = Vec3::UnitX();

  static NodeFunction affine_position(double constant, const Vec3& weights);

  double value(const StateVector& x) const;
  // |v| contributes a zero subgradient at v = 0.
  StateVector gradient(const StateVector& x) const;
};

enum class ConstraintSense { equality, inequality };
enum class Logic { all, any };

struct ScalarStc {
  std::string name;
  NodeFunction trigger;
  NodeFunction constraint;
  ConstraintSense sense = ConstraintSense::equality;
};

struct CompoundStc {
  std::string name;
  std::vector<NodeFunction> triggers;
  std::vector<NodeFunction> constraints;
  Logic trigger_mode = Logic::all;
  Logic constraint_mode = Logic::all;
  ConstraintSense sense = ConstraintSense::equality;
  // Caller guarantees c_i >= 0, which allows the single-row sum form for
  // all-constraints; the sign conditions are returned as side conditions.
  bool constraints_nonnegative = false;

  void validate() const;
};

CompoundStc to_compound(const ScalarStc& stc);

/// -min(g, 0)
double shat(double g_value);

/// Projected surrogate h = -min(g, 0) * c.
double projected(double g_value, double c_value);
double eval_projected(const ScalarStc& stc, const StateVector& x);

struct CompoundValue {
  // Each entry must be == 0 (equality sense) or <= 0 (inequality sense).
  std::vector<double> h;
  // Each entry must be >= 0.
  std::vector<double> side_conditions;
};

struct CompoundForm {
  Logic trigger_mode = Logic::all;
  Logic constraint_mode = Logic::all;
  ConstraintSense sense = ConstraintSense::equality;
  bool constraints_nonnegative = false;
};

/// Composition on already-evaluated trigger and constraint values.
CompoundValue compose(const CompoundForm& form, std::span<const double> g_values, std::span<const double> c_values);
CompoundValue eval_compound(const CompoundStc& stc, const StateVector& x);

/// True when the surrogate rows and side conditions hold within `tol`.
bool surrogate_feasible(const CompoundValue& value, ConstraintSense sense, double tol = 0.0);

/// Gradient of h for the scalar surrogate at x. At g = 0 the derivative of
/// -min(g, 0) is taken from the inactive side, i.e. zero.
StateVector jacobian(const ScalarStc& stc, const StateVector& x);
/// One gradient per row of eval_compound(stc, x).h.
std::vector<StateVector> jacobian(const CompoundStc& stc, const StateVector& x);

/// Direct evaluation of the logical implication (not the surrogate).
/// Triggers count as active when g < -trigger_margin; constraints count as met
/// when c <= constraint_tol (inequality) or |c| <= constraint_tol (equality).
bool implication_holds(const CompoundStc& stc, const StateVector& x, double trigger_margin = 0.0,
                       double constraint_tol = 0.0);

/// |v| > V_alpha  =>  angle of attack <= alpha_max.
ScalarStc make_aoa_stc(const ScenarioConfig& config);
/// Inside every configured wall  =>  altitude >= keepout_height.
CompoundStc make_keepout_stc(const ScenarioConfig& config);

/// All STCs enabled in the configuration, in a fixed order (AoA, keep-out).
std::vector<CompoundStc> enabled_stcs(const ScenarioConfig& config);

/// Copies tightened for the subproblem: every trigger becomes g - trigger_margin
/// (active once g < trigger_margin), every inequality constraint becomes
/// c + constraint_margin.
std::vector<CompoundStc> with_margins(std::vector<CompoundStc> stcs, double trigger_margin, double constraint_margin);

}  // namespace stcpdg

#endif  // STCPDG_STC_HPP
