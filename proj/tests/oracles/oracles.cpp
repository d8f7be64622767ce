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

#include "oracles.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

double GridAxis::at(int i) const {
  if (count < 2) throw std::invalid_argument("grid axis needs at least two points");
  // Integer-based spacing keeps 0 exactly on symmetric odd grids.
  const int last = count - 1;
  return (min * (last - i) + max * i) / last;
}

std::vector<Eigen::VectorXd> grid(const std::vector<GridAxis>& axes) {
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(axes.size(), 0);
  while (true) {
    Eigen::VectorXd p(axes.size());
    for (std::size_t d = 0; d < axes.size(); ++d) p[d] = axes[d].at(idx[d]);
    out.push_back(p);
    int d = static_cast<int>(axes.size()) - 1;
    while (d >= 0 && ++idx[d] == axes[d].count) idx[d--] = 0;
    if (d < 0) break;
  }
  return out;
}

bool stc_truth(Combine triggers, Combine constraints, const std::vector<double>& g, const std::vector<double>& c) {
  bool on = triggers == Combine::all;
  for (double gi : g) on = triggers == Combine::all ? (on && gi < 0.0) : (on || gi < 0.0);
  if (!on) return true;
  bool met = constraints == Combine::all;
  for (double ci : c) met = constraints == Combine::all ? (met && ci == 0.0) : (met || ci == 0.0);
  return met;
}

bool original_form_feasible(double g, double c) {
  // s c = 0 leaves s = 0 (needs g >= 0) or c = 0 (any s >= max(0, -g)).
  return g >= 0.0 || c == 0.0;
}

Eigen::MatrixXd finite_difference(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                                  const Eigen::VectorXd& x, double step) {
  const Eigen::VectorXd f0 = fn(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    J.col(i) = (fn(xp) - fn(xm)) / (2.0 * step);
  }
  return J;
}

Eigen::VectorXd finite_difference_scalar(const std::function<double(const Eigen::VectorXd&)>& fn,
                                         const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (fn(xp) - fn(xm)) / (2.0 * step);
  }
  return g;
}

FohMatrices foh_matrix_exponential(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, double sigma, double dtau,
                                   const Eigen::VectorXd& x_k, const Eigen::VectorXd& u_k,
                                   const Eigen::VectorXd& u_next) {
  const Eigen::Index n = M.rows(), m = N.cols(), d = n + 2 * m;
  // Augmented state [x; u(s); du/ds] with u affine in s.
  Eigen::MatrixXd E1 = Eigen::MatrixXd::Zero(d, d), E0 = Eigen::MatrixXd::Zero(d, d);
  E1.block(0, 0, n, n) = M;
  E1.block(0, n, n, m) = N;
  E0.block(n, n + m, m, m).setIdentity();
  const Eigen::MatrixXd E = sigma * E1 + E0;

  // exp of [[E, E1], [0, E]] * dtau carries d/dsigma exp(E dtau) in its corner.
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  big.topLeftCorner(d, d) = E * dtau;
  big.topRightCorner(d, d) = E1 * dtau;
  big.bottomRightCorner(d, d) = E * dtau;
  const Eigen::MatrixXd ebig = big.exp();
  const Eigen::MatrixXd Phi = ebig.topLeftCorner(d, d);
  const Eigen::MatrixXd dPhi = ebig.topRightCorner(d, d);

  FohMatrices out;
  out.A = Phi.block(0, 0, n, n);
  const Eigen::MatrixXd G1 = Phi.block(0, n, n, m), G2 = Phi.block(0, n + m, n, m);
  out.B_minus = G1 - G2 / dtau;
  out.B_plus = G2 / dtau;
  Eigen::VectorXd w(d);
  w << x_k, u_k, (u_next - u_k) / dtau;
  out.x_end = (Phi * w).head(n);
  out.S = (dPhi * w).head(n);
  return out;
}

namespace {

Eigen::VectorXd project_soc(const Eigen::VectorXd& v) {
  const double t = v[0];
  const double nx = v.tail(v.size() - 1).norm();
  if (nx <= t) return v;
  if (nx <= -t) return Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd out(v.size());
  const double a = 0.5 * (t + nx);
  out[0] = a;
  out.tail(v.size() - 1) = a * v.tail(v.size() - 1) / nx;
  return out;
}

}  // namespace

Eigen::VectorXd project_cone(const Eigen::VectorXd& v, const stcpdg::ConeDims& cones) {
  Eigen::VectorXd out = v;
  for (int i = 0; i < cones.nonneg; ++i) out[i] = std::max(0.0, v[i]);
  int off = cones.nonneg;
  for (int dim : cones.soc) {
    out.segment(off, dim) = project_soc(v.segment(off, dim));
    off += dim;
  }
  return out;
}

FirstOrderResult solve_first_order(const stcpdg::ConicProgram& prog, int max_iterations, double tol) {
  const int n = prog.num_vars(), p = prog.num_eq(), m = prog.num_cone_rows();
  Eigen::MatrixXd Mat(p + m, n);
  Mat.topRows(p) = Eigen::MatrixXd(prog.A);
  Mat.bottomRows(m) = Eigen::MatrixXd(prog.G);
  Eigen::VectorXd q(p + m);
  q << prog.b, prog.h;

  // min c'x + I(s) s.t. Mx + s = q with s in {0}^p x K, scaled ADMM with a
  // small proximal term on x so the x-step is always well posed.
  const double rho = 1.0, prox = 1e-6, relax = 1.6;
  const Eigen::LLT<Eigen::MatrixXd> llt(rho * Mat.transpose() * Mat + prox * Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), s = Eigen::VectorXd::Zero(p + m), u = Eigen::VectorXd::Zero(p + m);
  auto project = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(p + m);
    out.head(p).setZero();
    out.tail(m) = project_cone(v.tail(m), prog.cones);
    return out;
  };

  FirstOrderResult res;
  for (int it = 1; it <= max_iterations; ++it) {
    x = llt.solve(prox * x - prog.c - rho * Mat.transpose() * (s - q + u));
    const Eigen::VectorXd Mx = relax * (Mat * x) - (1.0 - relax) * (s - q);
    const Eigen::VectorXd s_old = s;
    s = project(q - Mx - u);
    u += Mx + s - q;
    res.iterations = it;
    if (it % 50 == 0) {
      const double pres = (Mat * x + s - q).norm() / (1.0 + q.norm());
      const double dres = rho * (Mat.transpose() * (s - s_old)).norm() / (1.0 + prog.c.norm());
      if (pres < tol && dres < tol) {
        res.converged = true;
        break;
      }
    }
  }
  res.x = x;
  res.objective = prog.c.dot(x);
  res.primal_residual = (Mat * x + s - q).norm();
  return res;
}

stcpdg::ConicProgram random_socp(std::mt19937_64& rng, int n, int p, int nonneg, const std::vector<int>& socs) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.5, 1.5);
  stcpdg::ConicProgram prog;
  prog.cones.nonneg = nonneg;
  prog.cones.soc = socs;
  const int m = prog.cones.total();

  auto interior = [&]() {
    Eigen::VectorXd v(m);
    for (int i = 0; i < nonneg; ++i) v[i] = ud(rng);
    int off = nonneg;
    for (int dim : socs) {
      Eigen::VectorXd tail(dim - 1);
      for (int i = 0; i < dim - 1; ++i) tail[i] = nd(rng);
      v.segment(off + 1, dim - 1) = tail;
      v[off] = tail.norm() + ud(rng);
      off += dim;
    }
    return v;
  };

  Eigen::MatrixXd A(p, n), G(m, n);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = nd(rng);
  Eigen::VectorXd x0(n), y0(p);
  for (int j = 0; j < n; ++j) x0[j] = nd(rng);
  for (int i = 0; i < p; ++i) y0[i] = nd(rng);
  const Eigen::VectorXd s0 = interior(), z0 = interior();

  prog.A = A.sparseView();
  prog.G = G.sparseView();
  prog.b = A * x0;
  prog.h = G * x0 + s0;
  prog.c = -A.transpose() * y0 - G.transpose() * z0;
  return prog;
}

}  // namespace oracles
