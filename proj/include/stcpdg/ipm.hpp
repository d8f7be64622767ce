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

#ifndef STCPDG_IPM_HPP
#define STCPDG_IPM_HPP

#include "stcpdg/conic.hpp"

namespace stcpdg {

enum class KktMethod { sparse_ldlt, dense_lu };

struct IpmSettings {
  double feastol = 1e-9;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iterations = 100;
  double static_regularization = 1e-9;
  double dynamic_regularization = 2e-7;  // replaces wrong-signed pivots
  int refinement_steps = 8;
  int equilibration_passes = 3;
  double step_fraction = 0.99;
  KktMethod kkt = KktMethod::sparse_ldlt;
  bool verbose = false;  // per-iteration trace on stderr
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding,
/// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps. Returns
/// certificates of infeasibility or unboundedness through SolveResult::status.
class InteriorPointSolver final : public ConicBackend {
 public:
  explicit InteriorPointSolver(IpmSettings settings = {}) : settings_(settings) {}

  std::string name() const override { return settings_.kkt == KktMethod::dense_lu ? "ipm-dense" : "ipm"; }
  SolveResult solve(const ConicProgram& program) const override;

  const IpmSettings& settings() const { return settings_; }

 private:
  IpmSettings settings_;
};

}  // namespace stcpdg

#endif  // STCPDG_IPM_HPP
