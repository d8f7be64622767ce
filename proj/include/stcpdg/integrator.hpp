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

#ifndef STCPDG_INTEGRATOR_HPP
#define STCPDG_INTEGRATOR_HPP

#include <Eigen/Dense>

#include <functional>

namespace stcpdg {

struct IntegratorTolerances {
  double relative = 1e-10;
  double absolute = 1e-12;
  double initial_step = 1e-2;
  long max_steps = 200000;
};

using OdeRhs = std::function<void(const Eigen::VectorXd& y, Eigen::VectorXd& dydt, double t)>;
// Called after every accepted step; may modify y in place (projection) and
// may throw to abort the integration.
using StepHook = std::function<void(Eigen::VectorXd& y, double t)>;

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(y, t) from t0 to t1.
/// Returns the number of accepted steps.
long integrate_adaptive(const OdeRhs& rhs, Eigen::VectorXd& y, double t0, double t1,
                        const IntegratorTolerances& tol = {}, const StepHook& hook = {});

}  // namespace stcpdg

#endif  // STCPDG_INTEGRATOR_HPP
