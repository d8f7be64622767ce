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

#include "stcpdg/subproblem.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <utility>

namespace stcpdg {

int VariableLayout::node_entry(int k, int j) const {
  if (j == 0) return t_c();
  if (j == 1) return sigma();
  if (j < 2 + kStateDim) return x(k, j - 2);
  return u(k, j - 2 - kStateDim);
}

namespace {

// constant + sum coef * var
struct Affine {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  Affine& add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
    return *this;
  }
};

Affine var(int index, double coef = 1.0, double constant = 0.0) {
  Affine a;
  a.constant = constant;
  a.add(index, coef);
  return a;
}

Affine constant(double value) { return Affine{value, {}}; }

class ProgramBuilder {
 public:
  explicit ProgramBuilder(int n) : n_(n) {}

  // sum terms = -constant
  void equality(const Affine& a) {
    for (const auto& [j, v] : a.terms) eq_.emplace_back(eq_rows_, j, v);
    b_.push_back(-a.constant);
    ++eq_rows_;
  }

  void nonneg(const Affine& a) { lp_.push_back(a); }

  void soc(std::vector<Affine> rows) { soc_.push_back(std::move(rows)); }

  ConicProgram finish(const Eigen::VectorXd& c) const {
    ConicProgram p;
    p.c = c;
    p.A.resize(eq_rows_, n_);
    p.A.setFromTriplets(eq_.begin(), eq_.end());
    p.b = Eigen::Map<const Eigen::VectorXd>(b_.data(), static_cast<Eigen::Index>(b_.size()));
    std::vector<Triplet> g;
    std::vector<double> h;
    auto emit = [&](const Affine& a) {
      const int row = static_cast<int>(h.size());
      for (const auto& [j, v] : a.terms) g.emplace_back(row, j, -v);
      h.push_back(a.constant);
    };
    for (const auto& a : lp_) emit(a);
    p.cones.nonneg = static_cast<int>(lp_.size());
    for (const auto& cone : soc_) {
      for (const auto& a : cone) emit(a);
      p.cones.soc.push_back(static_cast<int>(cone.size()));
    }
    p.G.resize(static_cast<int>(h.size()), n_);
    p.G.setFromTriplets(g.begin(), g.end());
    p.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    return p;
  }

 private:
  int n_;
  int eq_rows_ = 0;
  std::vector<Triplet> eq_;
  std::vector<double> b_;
  std::vector<Affine> lp_;
  std::vector<std::vector<Affine>> soc_;
};

void check_dimensions(const SolutionVariable& ref, const DiscretizationData& disc, const ScenarioConfig& config) {
  const int K = ref.K();
  std::ostringstream os;
  if (K != config.K) os << "reference has " << K << " nodes, configuration expects " << config.K;
  else if (ref.U.cols() != K) os << "reference control has " << ref.U.cols() << " nodes";
  else if (disc.intervals() != K - 1 || static_cast<int>(disc.B_minus.size()) != K - 1 ||
           static_cast<int>(disc.B_plus.size()) != K - 1 || static_cast<int>(disc.S.size()) != K - 1 ||
           static_cast<int>(disc.xi.size()) != K - 1)
    os << "discretization covers " << disc.intervals() << " intervals, expected " << K - 1;
  else if (static_cast<int>(disc.thrust_rows.size()) != K)
    os << "discretization has " << disc.thrust_rows.size() << " thrust rows, expected " << K;
  else
    for (const auto& row : disc.stc_rows)
      if (row.node < 0 || row.node >= K) {
        os << "STC row refers to node " << row.node;
        break;
      }
  if (!os.str().empty()) throw AssemblyError(os.str());
}

}  // namespace

ConicSubproblem assemble(const SolutionVariable& reference, const DiscretizationData& disc,
                         const ScenarioConfig& config) {
  check_dimensions(reference, disc, config);
  const int K = reference.K();
  ConicSubproblem sub;
  sub.layout.K = K;
  sub.reference = reference;
  sub.trust_weights = config.trust_region_scale * config.W_tr;
  const VariableLayout& L = sub.layout;
  const int n = L.size();
  ProgramBuilder pb(n);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  c[L.sigma()] = 1.0;
  for (int k = 0; k + 1 < K; ++k)
    for (int i = 0; i < kStateDim; ++i) c[L.nu_abs(k, i)] = config.w_nu;
  for (int k = 0; k < K; ++k) c[L.eta(k)] = 1.0;

  // Discrete dynamics with virtual control.
  for (int k = 0; k + 1 < K; ++k) {
    for (int i = 0; i < kStateDim; ++i) {
      Affine row;
      row.constant = -disc.xi[k][i];
      row.add(L.x(k + 1, i), 1.0);
      for (int j = 0; j < kStateDim; ++j) row.add(L.x(k, j), -disc.A[k](i, j));
      for (int j = 0; j < kControlDim; ++j) {
        row.add(L.u(k, j), -disc.B_minus[k](i, j));
        row.add(L.u(k + 1, j), -disc.B_plus[k](i, j));
      }
      row.add(L.sigma(), -disc.S[k][i]);
      row.add(L.nu(k, i), -1.0);
      pb.equality(row);
    }
  }

  // Ignition conditions, linear in t_c about the reference coast time.
  const double tc_ref = reference.t_c;
  const auto [p_r, p_v] = coast_polynomials(tc_ref, config);
  pb.equality(var(L.x(0, idx::m), 1.0, -config.m_ig));
  for (int i = 0; i < 3; ++i) {
    pb.equality(var(L.x(0, idx::r + i), 1.0, -(p_r[i] - p_v[i] * tc_ref)).add(L.t_c(), -p_v[i]));
    pb.equality(var(L.x(0, idx::v + i), 1.0, -(p_v[i] - config.g_I[i] * tc_ref)).add(L.t_c(), -config.g_I[i]));
    pb.equality(var(L.x(0, idx::w + i)));
  }

  // Terminal conditions.
  const int f = K - 1;
  for (int i = 0; i < 3; ++i) {
    pb.equality(var(L.x(f, idx::r + i)));
    pb.equality(var(L.x(f, idx::v + i)));
    pb.equality(var(L.x(f, idx::w + i)));
  }
  pb.equality(var(L.x(f, idx::q), 1.0, -1.0));
  for (int i = 1; i < 4; ++i) pb.equality(var(L.x(f, idx::q + i)));

  // Orthant rows.
  for (int k = 0; k < K; ++k) {
    pb.nonneg(var(L.x(k, idx::m), 1.0, -config.m_dry));
    const ThrustRow& tr = disc.thrust_rows[k];
    Affine lb = constant(-tr.T_min);
    for (int j = 0; j < kControlDim; ++j) lb.add(L.u(k, j), tr.normal[j]);
    pb.nonneg(lb);
  }
  for (int k = 0; k + 1 < K; ++k)
    for (int i = 0; i < kStateDim; ++i) {
      pb.nonneg(var(L.nu_abs(k, i)).add(L.nu(k, i), -1.0));
      pb.nonneg(var(L.nu_abs(k, i)).add(L.nu(k, i), 1.0));
    }
  pb.nonneg(var(L.t_c()));
  pb.nonneg(var(L.t_c(), -1.0, config.t_c_max));
  pb.nonneg(var(L.sigma(), 1.0, -config.sigma_min));

  for (const StcRow& row : disc.stc_rows) {
    if (row.vacuous()) continue;
    Affine a;
    a.constant = row.value - row.gradient.dot(row.reference);
    for (int i = 0; i < kStateDim; ++i) a.add(L.x(row.node, i), row.gradient[i]);
    ++sub.stc_rows;
    if (row.kind == RowKind::side_condition) {
      pb.nonneg(a);
    } else if (row.sense == ConstraintSense::equality) {
      pb.equality(a);
    } else {
      Affine neg;
      neg.constant = -a.constant;
      for (const auto& [j, v] : a.terms) neg.add(j, -v);
      pb.nonneg(neg);
    }
  }

  // Second-order cones.
  const double tan_gs = std::tan(config.gamma_gs);
  const double tilt = std::sqrt(0.5 * (1.0 - std::cos(config.theta_max)));
  const double cos_gimbal = std::cos(config.delta_max);
  for (int k = 0; k < K; ++k) {
    pb.soc({var(L.x(k, idx::r)), var(L.x(k, idx::r + 1), tan_gs), var(L.x(k, idx::r + 2), tan_gs)});
    pb.soc({constant(tilt), var(L.x(k, idx::q + 2)), var(L.x(k, idx::q + 3))});
    pb.soc({constant(config.omega_max), var(L.x(k, idx::w)), var(L.x(k, idx::w + 1)), var(L.x(k, idx::w + 2))});
    pb.soc({constant(config.T_max), var(L.u(k, 0)), var(L.u(k, 1)), var(L.u(k, 2))});
    pb.soc({var(L.u(k, 0)), var(L.u(k, 0), cos_gimbal), var(L.u(k, 1), cos_gimbal), var(L.u(k, 2), cos_gimbal)});
  }

  // Trust region sum_j w_j (z_kj - zbar_kj)^2 <= eta_k as a rotated cone:
  // |(2 sqrt(w) (z_k - zbar_k), eta_k - 1)| <= eta_k + 1.
  for (int k = 0; k < K; ++k) {
    const NodeWeights zbar = reference.node(k);
    std::vector<Affine> cone;
    cone.push_back(var(L.eta(k), 1.0, 1.0));
    for (int j = 0; j < kNodeDim; ++j) {
      const double w = 2.0 * std::sqrt(sub.trust_weights[j]);
      cone.push_back(var(L.node_entry(k, j), w, -w * zbar[j]));
    }
    cone.push_back(var(L.eta(k), 1.0, -1.0));
    pb.soc(std::move(cone));
  }

  sub.program = pb.finish(c);
  sub.program.validate();
  return sub;
}

SolveResult solve(const ConicSubproblem& sub, const ConicBackend& backend) { return backend.solve(sub.program); }

SubproblemSolution extract(const ConicSubproblem& sub, const Eigen::VectorXd& primal) {
  const VariableLayout& L = sub.layout;
  if (primal.size() != L.size()) throw AssemblyError("primal vector has the wrong length");
  const int K = L.K;
  SubproblemSolution out;
  out.trajectory = SolutionVariable(K);
  out.trajectory.t_c = primal[L.t_c()];
  out.trajectory.t_b = primal[L.sigma()];
  for (int k = 0; k < K; ++k) {
    out.trajectory.X.col(k) = primal.segment<kStateDim>(L.x(k, 0));
    out.trajectory.U.col(k) = primal.segment<kControlDim>(L.u(k, 0));
  }
  out.nu.resize(kStateDim, K - 1);
  for (int k = 0; k + 1 < K; ++k) out.nu.col(k) = primal.segment<kStateDim>(L.nu(k, 0));
  out.nu_l1 = out.nu.cwiseAbs().sum();
  out.trust_deviation = trust_deviation(out.trajectory, sub.reference, sub.trust_weights);
  return out;
}

double trust_deviation(const SolutionVariable& z, const SolutionVariable& reference, const NodeWeights& weights) {
  if (z.K() != reference.K()) throw AssemblyError("trajectories have different node counts");
  double total = 0.0;
  for (int k = 0; k < z.K(); ++k) total += (z.node(k) - reference.node(k)).cwiseAbs2().dot(weights);
  return total;
}

}  // namespace stcpdg
