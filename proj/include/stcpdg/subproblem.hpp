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

#ifndef STCPDG_SUBPROBLEM_HPP
#define STCPDG_SUBPROBLEM_HPP

#include "stcpdg/conic.hpp"
#include "stcpdg/core.hpp"
#include "stcpdg/discretize.hpp"

namespace stcpdg {

/// Decision vector: [x_0..x_{K-1}, u_0..u_{K-1}, sigma, t_c, nu_0..nu_{K-2},
/// p_0..p_{K-2}, eta_0..eta_{K-1}] where p bounds |nu| elementwise and eta_k
/// is the trust-region epigraph of node k.
struct VariableLayout {
  int K = 0;

  int x(int k, int i) const { return k * kStateDim + i; }
  int u(int k, int i) const { return K * kStateDim + k * kControlDim + i; }
  int sigma() const { return K * (kStateDim + kControlDim); }
  int t_c() const { return sigma() + 1; }
  int nu(int k, int i) const { return t_c() + 1 + k * kStateDim + i; }
  int nu_abs(int k, int i) const { return nu(K - 1, 0) + k * kStateDim + i; }
  int eta(int k) const { return nu_abs(K - 1, 0) + k; }
  /// Entries of z_k = [t_c, sigma, x_k, u_k] in decision-vector order.
  int node_entry(int k, int j) const;

  int core_size() const { return nu(K - 1, 0); }
  int size() const { return eta(K); }
};

struct ConicSubproblem {
  ConicProgram program;
  VariableLayout layout;
  SolutionVariable reference;
  NodeWeights trust_weights;
  int stc_rows = 0;  // linearized STC rows kept after dropping vacuous ones
};

/// Builds the convex subproblem around `reference` using its discretization.
ConicSubproblem assemble(const SolutionVariable& reference, const DiscretizationData& disc,
                         const ScenarioConfig& config);

SolveResult solve(const ConicSubproblem& sub, const ConicBackend& backend);

struct SubproblemSolution {
  SolutionVariable trajectory;
  Eigen::Matrix<double, kStateDim, Eigen::Dynamic> nu;
  double nu_l1 = 0.0;
  double trust_deviation = 0.0;
};

SubproblemSolution extract(const ConicSubproblem& sub, const Eigen::VectorXd& primal);

/// sum_k sum_j w_j (z_kj - zbar_kj)^2
double trust_deviation(const SolutionVariable& z, const SolutionVariable& reference, const NodeWeights& weights);

}  // namespace stcpdg

#endif  // STCPDG_SUBPROBLEM_HPP
