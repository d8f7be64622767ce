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

#include "stcpdg/integrator.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <cmath>
#include <stdexcept>

namespace stcpdg {

namespace odeint = boost::numeric::odeint;

long integrate_adaptive(const OdeRhs& rhs, Eigen::VectorXd& y, double t0, double t1,
                        const IntegratorTolerances& tol, const StepHook& hook) {
  using Stepper = odeint::runge_kutta_dopri5<Eigen::VectorXd, double, Eigen::VectorXd, double,
                                             odeint::vector_space_algebra>;
  auto stepper = odeint::make_controlled(tol.absolute, tol.relative, Stepper());

  const double span = t1 - t0;
  if (span == 0.0) return 0;
  if (!(span > 0.0)) throw std::invalid_argument("integration interval must be positive");

  auto system = [&rhs](const Eigen::VectorXd& x, Eigen::VectorXd& dxdt, double t) {
    dxdt.resize(x.size());
    rhs(x, dxdt, t);
  };

  double t = t0;
  double dt = std::min(tol.initial_step, span);
  long accepted = 0;
  long attempts = 0;
  while (t < t1) {
    // Land exactly on t1 rather than overshooting.
    if (t + dt > t1 || t1 - (t + dt) < 1e-14 * span) dt = t1 - t;
    if (stepper.try_step(system, y, t, dt) == odeint::success) {
      ++accepted;
      if (t1 - t < 1e-14 * span) t = t1;
      if (hook) hook(y, t);
    } else if (dt < 1e-15 * span) {
      throw std::runtime_error("integration step size underflow");
    }
    if (++attempts > tol.max_steps) throw std::runtime_error("integration exceeded the step budget");
  }
  return accepted;
}

}  // namespace stcpdg
