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

#include "stcpdg/stc.hpp"

#include "stcpdg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stcpdg {

NodeFunction NodeFunction::affine_position(double constant, const Vec3& weights) {
  NodeFunction f;
  f.constant = constant;
  f.position_weights = weights;
  return f;
}

double NodeFunction::value(const StateVector& x) const {
  const Vec3 r = x.segment<3>(idx::r);
  const Vec3 v = x.segment<3>(idx::v);
  double out = constant + position_weights.dot(r);
  if (speed_coeff != 0.0) out += speed_coeff * v.norm();
  if (projection_coeff != 0.0) {
    const Vec4 q = x.segment<4>(idx::q);
    out += projection_coeff * body_axis.dot(detail::dcm_bi(q) * v);
  }
  return out;
}

StateVector NodeFunction::gradient(const StateVector& x) const {
  StateVector grad = StateVector::Zero();
  const Vec3 v = x.segment<3>(idx::v);
  grad.segment<3>(idx::r) = position_weights;
  if (speed_coeff != 0.0) {
    const double speed = v.norm();
    if (speed > 0.0) grad.segment<3>(idx::v) += speed_coeff * v / speed;
  }
  if (projection_coeff != 0.0) {
    const Vec4 q = x.segment<4>(idx::q);
    grad.segment<3>(idx::v) += projection_coeff * detail::dcm_bi(q).transpose() * body_axis;
    const auto dC = detail::dcm_bi_derivatives(q);
    for (int i = 0; i < 4; ++i) grad(idx::q + i) = projection_coeff * body_axis.dot(dC[i] * v);
  }
  return grad;
}

void CompoundStc::validate() const {
  if (triggers.empty() || constraints.empty())
    throw SpecificationError("compound STC '" + name + "' needs at least one trigger and one constraint");
  if (sense == ConstraintSense::inequality && constraint_mode == Logic::any && constraints.size() > 1)
    throw SpecificationError("compound STC '" + name +
                             "': an any-constraint of several inequalities has no product surrogate");
}

CompoundStc to_compound(const ScalarStc& stc) {
  CompoundStc c;
  c.name = stc.name;
  c.triggers = {stc.trigger};
  c.constraints = {stc.constraint};
  c.sense = stc.sense;
  return c;
}

double shat(double g_value) { return -std::min(g_value, 0.0); }

double projected(double g_value, double c_value) { return shat(g_value) * c_value; }

double eval_projected(const ScalarStc& stc, const StateVector& x) {
  return projected(stc.trigger.value(x), stc.constraint.value(x));
}

namespace {

double trigger_factor(Logic mode, std::span<const double> g) {
  if (mode == Logic::all) {
    double p = 1.0;
    for (double gi : g) p *= shat(gi);
    return p;
  }
  double s = 0.0;
  for (double gi : g) s += shat(gi);
  return s;
}

void check_form(const CompoundForm& form, std::size_t n_g, std::size_t n_c) {
  if (n_g == 0 || n_c == 0) throw SpecificationError("compound STC needs at least one trigger and one constraint");
  if (form.sense == ConstraintSense::inequality && form.constraint_mode == Logic::any && n_c > 1)
    throw SpecificationError("an any-constraint of several inequalities has no product surrogate");
}

}  // namespace

CompoundValue compose(const CompoundForm& form, std::span<const double> g, std::span<const double> c) {
  check_form(form, g.size(), c.size());
  const double t = trigger_factor(form.trigger_mode, g);
  CompoundValue out;
  if (form.constraint_mode == Logic::any) {
    double p = 1.0;
    for (double ci : c) p *= ci;
    out.h.push_back(t * p);
    return out;
  }
  if (form.sense == ConstraintSense::equality && form.constraints_nonnegative) {
    out.h.push_back(t * std::accumulate(c.begin(), c.end(), 0.0));
    out.side_conditions.assign(c.begin(), c.end());
    return out;
  }
  for (double ci : c) out.h.push_back(t * ci);
  return out;
}

CompoundValue eval_compound(const CompoundStc& stc, const StateVector& x) {
  std::vector<double> g, c;
  for (const auto& f : stc.triggers) g.push_back(f.value(x));
  for (const auto& f : stc.constraints) c.push_back(f.value(x));
  return compose({stc.trigger_mode, stc.constraint_mode, stc.sense, stc.constraints_nonnegative}, g, c);
}

bool surrogate_feasible(const CompoundValue& value, ConstraintSense sense, double tol) {
  for (double h : value.h) {
    if (sense == ConstraintSense::equality ? std::abs(h) > tol : h > tol) return false;
  }
  for (double s : value.side_conditions) {
    if (s < -tol) return false;
  }
  return true;
}

StateVector jacobian(const ScalarStc& stc, const StateVector& x) {
  const double g = stc.trigger.value(x);
  if (g >= 0.0) return StateVector::Zero();
  const double c = stc.constraint.value(x);
  // h = -g c on the active side.
  return -stc.trigger.gradient(x) * c - g * stc.constraint.gradient(x);
}

std::vector<StateVector> jacobian(const CompoundStc& stc, const StateVector& x) {
  stc.validate();
  const std::size_t n_g = stc.triggers.size(), n_c = stc.constraints.size();
  std::vector<double> s(n_g), c(n_c);
  std::vector<StateVector> ds(n_g), dc(n_c);
  for (std::size_t i = 0; i < n_g; ++i) {
    const double g = stc.triggers[i].value(x);
    s[i] = shat(g);
    ds[i] = g < 0.0 ? StateVector(-stc.triggers[i].gradient(x)) : StateVector::Zero();
  }
  for (std::size_t j = 0; j < n_c; ++j) {
    c[j] = stc.constraints[j].value(x);
    dc[j] = stc.constraints[j].gradient(x);
  }

  double t = 0.0;
  StateVector dt = StateVector::Zero();
  if (stc.trigger_mode == Logic::all) {
    t = 1.0;
    for (std::size_t i = 0; i < n_g; ++i) t *= s[i];
    for (std::size_t i = 0; i < n_g; ++i) {
      double others = 1.0;
      for (std::size_t j = 0; j < n_g; ++j)
        if (j != i) others *= s[j];
      dt += others * ds[i];
    }
  } else {
    for (std::size_t i = 0; i < n_g; ++i) {
      t += s[i];
      dt += ds[i];
    }
  }

  std::vector<StateVector> rows;
  if (stc.constraint_mode == Logic::any) {
    double p = 1.0;
    StateVector dp = StateVector::Zero();
    for (std::size_t j = 0; j < n_c; ++j) p *= c[j];
    for (std::size_t j = 0; j < n_c; ++j) {
      double others = 1.0;
      for (std::size_t i = 0; i < n_c; ++i)
        if (i != j) others *= c[i];
      dp += others * dc[j];
    }
    rows.push_back(dt * p + t * dp);
  } else if (stc.sense == ConstraintSense::equality && stc.constraints_nonnegative) {
    double sum = 0.0;
    StateVector dsum = StateVector::Zero();
    for (std::size_t j = 0; j < n_c; ++j) {
      sum += c[j];
      dsum += dc[j];
    }
    rows.push_back(dt * sum + t * dsum);
  } else {
    for (std::size_t j = 0; j < n_c; ++j) rows.push_back(dt * c[j] + t * dc[j]);
  }
  return rows;
}

bool implication_holds(const CompoundStc& stc, const StateVector& x, double trigger_margin, double constraint_tol) {
  auto active = [&](const NodeFunction& f) { return f.value(x) < -trigger_margin; };
  auto met = [&](const NodeFunction& f) {
    const double c = f.value(x);
    return stc.sense == ConstraintSense::inequality ? c <= constraint_tol : std::abs(c) <= constraint_tol;
  };
  const bool triggered = stc.trigger_mode == Logic::all
                             ? std::all_of(stc.triggers.begin(), stc.triggers.end(), active)
                             : std::any_of(stc.triggers.begin(), stc.triggers.end(), active);
  if (!triggered) return true;
  return stc.constraint_mode == Logic::all ? std::all_of(stc.constraints.begin(), stc.constraints.end(), met)
                                           : std::any_of(stc.constraints.begin(), stc.constraints.end(), met);
}

ScalarStc make_aoa_stc(const ScenarioConfig& config) {
  if (!(config.V_alpha > 0.0)) throw ConfigError("V_alpha must be positive");
  if (!(config.alpha_max > 0.0) || !(config.alpha_max < deg2rad(90.0)))
    throw ConfigError("alpha_max must lie in (0, 90) deg");
  ScalarStc stc;
  stc.name = "aoa";
  stc.sense = ConstraintSense::inequality;
  stc.trigger.constant = config.V_alpha;
  stc.trigger.speed_coeff = -1.0;
  stc.constraint.speed_coeff = std::cos(config.alpha_max);
  stc.constraint.projection_coeff = 1.0;
  stc.constraint.body_axis = Vec3::UnitX();
  return stc;
}

CompoundStc make_keepout_stc(const ScenarioConfig& config) {
  if (config.keepout_walls.empty()) throw ConfigError("keep-out constraint needs at least one wall");
  CompoundStc stc;
  stc.name = "keepout";
  stc.trigger_mode = Logic::all;
  stc.constraint_mode = Logic::all;
  stc.sense = ConstraintSense::inequality;
  for (const auto& wall : config.keepout_walls) {
    if (wall.axis < 0 || wall.axis > 2) throw ConfigError("keep-out wall axis must be 0, 1 or 2");
    const Vec3 e = Vec3::Unit(wall.axis);
    stc.triggers.push_back(wall.side == WallSide::above ? NodeFunction::affine_position(wall.bound, -e)
                                                        : NodeFunction::affine_position(-wall.bound, e));
  }
  stc.constraints.push_back(NodeFunction::affine_position(config.keepout_height, -Vec3::UnitX()));
  return stc;
}

std::vector<CompoundStc> enabled_stcs(const ScenarioConfig& config) {
  std::vector<CompoundStc> out;
  if (config.aoa_enabled) out.push_back(to_compound(make_aoa_stc(config)));
  if (config.keepout_enabled) out.push_back(make_keepout_stc(config));
  return out;
}

std::vector<CompoundStc> with_margins(std::vector<CompoundStc> stcs, double trigger_margin, double constraint_margin) {
  for (auto& stc : stcs) {
    for (auto& g : stc.triggers) g.constant -= trigger_margin;
    if (stc.sense == ConstraintSense::inequality)
      for (auto& c : stc.constraints) c.constant += constraint_margin;
  }
  return stcs;
}

}  // namespace stcpdg
