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

#include "stcpdg/ipm.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace stcpdg {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConeScaling {
  Vec w_lp;              // sqrt(s / z) per orthant row
  std::vector<Mat> W;    // symmetric NT scaling per SOC
  std::vector<Mat> Winv;
  std::vector<Mat> W2;
  Vec lambda;            // W z = W^{-1} s
};

class Cones {
 public:
  explicit Cones(const ConeDims& dims) : nonneg_(dims.nonneg), soc_(dims.soc) {
    int row = nonneg_;
    for (int d : soc_) {
      offset_.push_back(row);
      row += d;
    }
    rows_ = row;
  }

  int rows() const { return rows_; }
  int nonneg() const { return nonneg_; }
  int degree() const { return nonneg_ + static_cast<int>(soc_.size()); }
  const std::vector<int>& soc() const { return soc_; }
  const std::vector<int>& offset() const { return offset_; }

  /// Smallest "eigenvalue": s_i on the orthant, t - |v| on each SOC.
  double margin(const Vec& v) const {
    double m = kInf;
    for (int i = 0; i < nonneg_; ++i) m = std::min(m, v[i]);
    for (std::size_t k = 0; k < soc_.size(); ++k) {
      const int o = offset_[k];
      m = std::min(m, v[o] - v.segment(o + 1, soc_[k] - 1).norm());
    }
    return m;
  }

  void add_identity(Vec& v, double a) const {
    for (int i = 0; i < nonneg_; ++i) v[i] += a;
    for (int o : offset_) v[o] += a;
  }

  Vec identity() const {
    Vec e = Vec::Zero(rows_);
    add_identity(e, 1.0);
    return e;
  }

  Vec product(const Vec& u, const Vec& v) const {
    Vec out(rows_);
    out.head(nonneg_) = u.head(nonneg_).cwiseProduct(v.head(nonneg_));
    for (std::size_t k = 0; k < soc_.size(); ++k) {
      const int o = offset_[k];
      const int d = soc_[k];
      out[o] = u.segment(o, d).dot(v.segment(o, d));
      out.segment(o + 1, d - 1) = u[o] * v.segment(o + 1, d - 1) + v[o] * u.segment(o + 1, d - 1);
    }
    return out;
  }

  /// Solves lambda o x = v.
  Vec divide(const Vec& lambda, const Vec& v) const {
    Vec out(rows_);
    out.head(nonneg_) = v.head(nonneg_).cwiseQuotient(lambda.head(nonneg_));
    for (std::size_t k = 0; k < soc_.size(); ++k) {
      const int o = offset_[k];
      const int d = soc_[k];
      const double l0 = lambda[o];
      const auto l1 = lambda.segment(o + 1, d - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double x0 = (l0 * v[o] - l1.dot(v.segment(o + 1, d - 1))) / det;
      out[o] = x0;
      out.segment(o + 1, d - 1) = (v.segment(o + 1, d - 1) - x0 * l1) / l0;
    }
    return out;
  }

  /// sup { a >= 0 : x + a dx in K } for interior x.
  double max_step(const Vec& x, const Vec& dx) const {
    double alpha = kInf;
    for (int i = 0; i < nonneg_; ++i)
      if (dx[i] < 0.0) alpha = std::min(alpha, -x[i] / dx[i]);
    for (std::size_t k = 0; k < soc_.size(); ++k) {
      const int o = offset_[k];
      const int d = soc_[k];
      const double x0 = x[o];
      const double d0 = dx[o];
      const auto x1 = x.segment(o + 1, d - 1);
      const auto d1 = dx.segment(o + 1, d - 1);
      const double a = d0 * d0 - d1.squaredNorm();
      const double b = x0 * d0 - x1.dot(d1);
      const double c = std::max(0.0, (x0 - x1.norm()) * (x0 + x1.norm()));
      alpha = std::min(alpha, first_root(a, b, c));
    }
    return alpha;
  }

  /// Nesterov-Todd scaling for interior (s, z).
  bool scaling(const Vec& s, const Vec& z, ConeScaling& out) const {
    out.w_lp.resize(nonneg_);
    out.lambda.resize(rows_);
    for (int i = 0; i < nonneg_; ++i) {
      if (!(s[i] > 0.0) || !(z[i] > 0.0)) return false;
      out.w_lp[i] = std::sqrt(s[i] / z[i]);
      out.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    out.W.resize(soc_.size());
    out.Winv.resize(soc_.size());
    out.W2.resize(soc_.size());
    for (std::size_t k = 0; k < soc_.size(); ++k) {
      const int o = offset_[k];
      const int d = soc_[k];
      const Vec sk = s.segment(o, d);
      const Vec zk = z.segment(o, d);
      const double sn = sk.tail(d - 1).norm();
      const double zn = zk.tail(d - 1).norm();
      const double sres = (sk[0] - sn) * (sk[0] + sn);
      const double zres = (zk[0] - zn) * (zk[0] + zn);
      if (!(sk[0] > sn) || !(zk[0] > zn) || !(sres > 0.0) || !(zres > 0.0)) return false;
      const Vec sbar = sk / std::sqrt(sres);
      const Vec zbar = zk / std::sqrt(zres);
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      Vec Jz = zbar;
      Jz.tail(d - 1) *= -1.0;
      const Vec wbar = (sbar + Jz) / (2.0 * gamma);
      const double beta = std::pow(sres / zres, 0.25);
      Vec v = wbar;
      v[0] += 1.0;
      v /= std::sqrt(2.0 * (wbar[0] + 1.0));
      Mat J = Mat::Identity(d, d);
      J.bottomRightCorner(d - 1, d - 1) *= -1.0;
      out.W[k] = beta * (2.0 * v * v.transpose() - J);
      const Vec Jv = J * v;
      out.Winv[k] = (2.0 * Jv * Jv.transpose() - J) / beta;
      out.W2[k] = beta * beta * (2.0 * wbar * wbar.transpose() - J);
      out.lambda.segment(o, d) = out.W[k] * zk;
    }
    return true;
  }

  ConeScaling identity_scaling() const {
    ConeScaling sc;
    sc.w_lp = Vec::Ones(nonneg_);
    sc.lambda = identity();
    for (int d : soc_) {
      sc.W.push_back(Mat::Identity(d, d));
      sc.Winv.push_back(Mat::Identity(d, d));
      sc.W2.push_back(Mat::Identity(d, d));
    }
    return sc;
  }

  Vec apply(const ConeScaling& sc, const Vec& v, int which) const {
    // which: 1 -> W, -1 -> W^{-1}, 2 -> W^2
    Vec out(rows_);
    for (int i = 0; i < nonneg_; ++i) {
      const double w = sc.w_lp[i];
      out[i] = which == 1 ? w * v[i] : which == -1 ? v[i] / w : w * w * v[i];
    }
    for (std::size_t k = 0; k < soc_.size(); ++k) {
      const Mat& M = which == 1 ? sc.W[k] : which == -1 ? sc.Winv[k] : sc.W2[k];
      out.segment(offset_[k], soc_[k]) = M * v.segment(offset_[k], soc_[k]);
    }
    return out;
  }

 private:
  // Smallest positive root of a t^2 + 2 b t + c with c >= 0, or +inf.
  static double first_root(double a, double b, double c) {
    if (c <= 0.0) return b < 0.0 || a < 0.0 ? 0.0 : kInf;
    const double disc = b * b - a * c;
    if (std::abs(a) < 1e-300) return b < 0.0 ? -c / (2.0 * b) : kInf;
    if (disc < 0.0) return kInf;
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    double best = kInf;
    for (double r : {q / a, q != 0.0 ? c / q : kInf})
      if (r > 0.0) best = std::min(best, r);
    return best;
  }

  int nonneg_;
  std::vector<int> soc_;
  std::vector<int> offset_;
  int rows_ = 0;
};

/// Up-looking sparse LDL' on a fixed pattern with AMD ordering. Pivots whose
/// sign disagrees with the expected inertia (or that are too small) are
/// replaced by sign * delta, which keeps the factorization usable when large
/// cone scalings swamp the static regularization.
class QuasiDefiniteLdl {
 public:
  void analyze(const SparseMatrix& full, std::vector<int> signs) {
    n_ = static_cast<int>(full.rows());
    signs_ = std::move(signs);
    Eigen::AMDOrdering<int> amd;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
    amd(full, perm);
    // perm maps new position -> original index.
    P_.resize(n_);
    Pinv_.resize(n_);
    for (int k = 0; k < n_; ++k) P_[k] = perm.indices()[k];
    for (int k = 0; k < n_; ++k) Pinv_[P_[k]] = k;
    parent_.assign(n_, -1);
    lnz_.assign(n_, 0);
    std::vector<int> flag(n_);
    const int* Ap = full.outerIndexPtr();
    const int* Ai = full.innerIndexPtr();
    for (int k = 0; k < n_; ++k) {
      flag[k] = k;
      const int kk = P_[k];
      for (int p = Ap[kk]; p < Ap[kk + 1]; ++p) {
        int i = Pinv_[Ai[p]];
        if (i >= k) continue;
        for (; flag[i] != k; i = parent_[i]) {
          if (parent_[i] == -1) parent_[i] = k;
          ++lnz_[i];
          flag[i] = k;
        }
      }
    }
    Lp_.assign(n_ + 1, 0);
    for (int k = 0; k < n_; ++k) Lp_[k + 1] = Lp_[k] + lnz_[k];
    Li_.assign(static_cast<std::size_t>(Lp_[n_]), 0);
    Lx_.assign(static_cast<std::size_t>(Lp_[n_]), 0.0);
    D_.assign(n_, 0.0);
  }

  /// Returns the number of regularized pivots, or -1 on a non-finite pivot.
  int factor(const SparseMatrix& full, double delta, double eps) {
    const int* Ap = full.outerIndexPtr();
    const int* Ai = full.innerIndexPtr();
    const double* Ax = full.valuePtr();
    std::vector<double> y(n_, 0.0);
    std::vector<int> pattern(n_), flag(n_);
    int bumped = 0;
    for (int k = 0; k < n_; ++k) {
      int top = n_;
      flag[k] = k;
      lnz_[k] = 0;
      const int kk = P_[k];
      for (int p = Ap[kk]; p < Ap[kk + 1]; ++p) {
        int i = Pinv_[Ai[p]];
        if (i > k) continue;
        y[i] += Ax[p];
        int len = 0;
        for (; flag[i] != k; i = parent_[i]) {
          pattern[len++] = i;
          flag[i] = k;
        }
        while (len > 0) pattern[--top] = pattern[--len];
      }
      double d = y[k];
      y[k] = 0.0;
      for (; top < n_; ++top) {
        const int i = pattern[top];
        const double yi = y[i];
        y[i] = 0.0;
        const int p2 = Lp_[i] + lnz_[i];
        for (int p = Lp_[i]; p < p2; ++p) y[Li_[p]] -= Lx_[p] * yi;
        const double lki = yi / D_[i];
        d -= lki * yi;
        Li_[p2] = k;
        Lx_[p2] = lki;
        ++lnz_[i];
      }
      if (!std::isfinite(d)) return -1;
      const int sign = signs_[P_[k]];
      if (sign * d <= eps) {
        d = sign * delta;
        ++bumped;
      }
      D_[k] = d;
    }
    return bumped;
  }

  Vec solve(const Vec& b) const {
    Vec x(n_);
    for (int k = 0; k < n_; ++k) x[k] = b[P_[k]];
    for (int j = 0; j < n_; ++j)
      for (int p = Lp_[j]; p < Lp_[j] + lnz_[j]; ++p) x[Li_[p]] -= Lx_[p] * x[j];
    for (int j = 0; j < n_; ++j) x[j] /= D_[j];
    for (int j = n_ - 1; j >= 0; --j)
      for (int p = Lp_[j]; p < Lp_[j] + lnz_[j]; ++p) x[j] -= Lx_[p] * x[Li_[p]];
    Vec out(n_);
    for (int k = 0; k < n_; ++k) out[P_[k]] = x[k];
    return out;
  }

 private:
  int n_ = 0;
  std::vector<int> signs_, P_, Pinv_, parent_, lnz_, Lp_, Li_;
  std::vector<double> Lx_, D_;
};

/// Quasi-definite KKT system [0 A' G'; A 0 0; G 0 -W^2] with static
/// regularization in the factor and iterative refinement against the
/// unregularized operator.
class KktSolver {
 public:
  KktSolver(const SparseMatrix& A, const SparseMatrix& G, const Cones& cones, const IpmSettings& settings)
      : A_(A), G_(G), At_(A.transpose()), Gt_(G.transpose()), cones_(cones), settings_(settings) {
    n_ = static_cast<int>(A.cols());
    p_ = static_cast<int>(A.rows());
    m_ = static_cast<int>(G.rows());
    const int N = n_ + p_ + m_;
    const double delta = settings.static_regularization;
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(A.nonZeros() + G.nonZeros() + N));
    for (int j = 0; j < n_; ++j) t.emplace_back(j, j, delta);
    for (int j = 0; j < A.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) t.emplace_back(n_ + it.row(), j, it.value());
    for (int j = 0; j < G.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(G, j); it; ++it) t.emplace_back(n_ + p_ + it.row(), j, it.value());
    for (int i = 0; i < p_; ++i) t.emplace_back(n_ + i, n_ + i, -delta);
    const int zo = n_ + p_;
    for (int i = 0; i < cones.nonneg(); ++i) t.emplace_back(zo + i, zo + i, -1.0);
    for (std::size_t k = 0; k < cones.soc().size(); ++k) {
      const int o = zo + cones.offset()[k];
      const int d = cones.soc()[k];
      for (int b = 0; b < d; ++b)
        for (int a = b; a < d; ++a) t.emplace_back(o + a, o + b, a == b ? -1.0 : 0.0);
    }
    K_.resize(N, N);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();
    if (settings.kkt == KktMethod::sparse_ldlt) {
      std::vector<int> signs(N, -1);
      std::fill(signs.begin(), signs.begin() + n_, 1);
      ldl_.analyze(SparseMatrix(K_.selfadjointView<Eigen::Lower>()), std::move(signs));
    }
  }

  /// Falls back to heavier regularization when the pivots blow up, which
  /// happens once the orthant scalings span many orders of magnitude near
  /// the optimum. Refinement runs against the unregularized operator.
  bool factor(const ConeScaling& sc) {
    scaling_ = &sc;
    for (level_ = 0; level_ < kBoosts; ++level_)
      if (factor_once(sc, kBoost[level_])) return true;
    return false;
  }

  bool factor_once(const ConeScaling& sc, double boost) {
    const double delta = boost * settings_.static_regularization;
    const int zo = n_ + p_;
    const int* outer = K_.outerIndexPtr();
    double* values = K_.valuePtr();
    // Each x and y column stores its diagonal first in the lower triangle.
    for (int j = 0; j < n_; ++j) values[outer[j]] = delta;
    for (int i = 0; i < p_; ++i) values[outer[n_ + i]] = -delta;
    for (int i = 0; i < cones_.nonneg(); ++i) {
      const double w = sc.w_lp[i];
      values[outer[zo + i]] = -(w * w) - delta;
    }
    for (std::size_t k = 0; k < cones_.soc().size(); ++k) {
      const int o = zo + cones_.offset()[k];
      const int d = cones_.soc()[k];
      for (int b = 0; b < d; ++b)
        for (int a = b; a < d; ++a) values[outer[o + b] + (a - b)] = -sc.W2[k](a, b) - (a == b ? delta : 0.0);
    }
    if (settings_.kkt == KktMethod::sparse_ldlt) {
      return ldl_.factor(SparseMatrix(K_.selfadjointView<Eigen::Lower>()), boost * settings_.dynamic_regularization,
                         1e-13) >= 0;
    }
    const SparseMatrix sym = K_.selfadjointView<Eigen::Lower>();
    const Mat full = Mat(sym);
    lu_.compute(full);
    return std::isfinite(lu_.rcond()) && lu_.rcond() > 1e-300;
  }

  double last_error() const { return last_error_; }

  /// Solves K0 sol = rhs. A solve that refinement cannot bring below
  /// kRefineTol moves the factorization to the next regularization level;
  /// the most accurate finite solution is kept. Returns false only when no
  /// level gives a finite solution.
  bool solve(const Vec& rhs, Vec& sol) {
    double best = kInf;
    Vec candidate;
    while (true) {
      if (refined_solve(rhs, candidate) && last_error_ < best) {
        best = last_error_;
        sol = candidate;
      }
      if (best <= kRefineTol) break;
      bool refactored = false;
      while (!refactored && ++level_ < kBoosts) refactored = factor_once(*scaling_, kBoost[level_]);
      if (!refactored) break;
    }
    last_error_ = best;
    return std::isfinite(best);
  }

 private:
  static constexpr int kBoosts = 3;
  static constexpr double kBoost[kBoosts] = {1.0, 1e2, 1e4};
  static constexpr double kRefineTol = 1e-6;

  bool refined_solve(const Vec& rhs, Vec& sol) {
    sol = raw_solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    last_error_ = kInf;
    for (int it = 0; it <= settings_.refinement_steps; ++it) {
      const Vec r = rhs - multiply(sol);
      const double err = r.lpNorm<Eigen::Infinity>() / scale;
      if (!std::isfinite(err)) return false;
      if (err >= last_error_) {
        sol -= correction_;  // the last correction made things worse
        break;
      }
      const bool stalled = err > 0.5 * last_error_;
      last_error_ = err;
      if (stalled || err <= 1e-14 || it == settings_.refinement_steps) break;
      correction_ = raw_solve(r);
      sol += correction_;
    }
    return sol.allFinite();
  }

  Vec raw_solve(const Vec& rhs) const {
    if (settings_.kkt == KktMethod::sparse_ldlt) return ldl_.solve(rhs);
    return lu_.solve(rhs);
  }

  Vec multiply(const Vec& v) const {
    Vec out(n_ + p_ + m_);
    const auto x = v.head(n_);
    const auto y = v.segment(n_, p_);
    const auto z = v.tail(m_);
    out.head(n_) = At_ * y + Gt_ * z;
    out.segment(n_, p_) = A_ * x;
    out.tail(m_) = G_ * x - cones_.apply(*scaling_, z, 2);
    return out;
  }

  const SparseMatrix& A_;
  const SparseMatrix& G_;
  SparseMatrix At_;
  SparseMatrix Gt_;
  const Cones& cones_;
  const IpmSettings& settings_;
  int n_ = 0, p_ = 0, m_ = 0;
  SparseMatrix K_;
  QuasiDefiniteLdl ldl_;
  Eigen::PartialPivLU<Mat> lu_;
  const ConeScaling* scaling_ = nullptr;
  double last_error_ = 0.0;
  int level_ = 0;
  Vec correction_;
};

struct Presolved {
  SparseMatrix A;
  Vec b;
  std::vector<int> kept;  // original equality row of each kept row
  bool infeasible = false;
  std::string note;
};

Presolved presolve_equalities(const ConicProgram& program) {
  Presolved out;
  const Eigen::SparseMatrix<double, Eigen::RowMajor, int> rows = program.A;
  std::map<std::vector<std::pair<int, double>>, int> seen;
  std::vector<Triplet> t;
  int dropped_zero = 0, dropped_dup = 0;
  for (int i = 0; i < rows.outerSize(); ++i) {
    std::vector<std::pair<int, double>> key;
    for (decltype(rows)::InnerIterator it(rows, i); it; ++it)
      if (it.value() != 0.0) key.emplace_back(static_cast<int>(it.col()), it.value());
    const double bi = program.b[i];
    if (key.empty()) {
      if (std::abs(bi) > 1e-12) {
        out.infeasible = true;
        out.note = "equality row " + std::to_string(i) + " reads 0 = " + std::to_string(bi);
      }
      ++dropped_zero;
      continue;
    }
    auto [pos, inserted] = seen.emplace(key, i);
    if (!inserted) {
      if (std::abs(program.b[pos->second] - bi) > 1e-12 * (1.0 + std::abs(bi))) {
        out.infeasible = true;
        out.note = "equality rows " + std::to_string(pos->second) + " and " + std::to_string(i) + " conflict";
      }
      ++dropped_dup;
      continue;
    }
    const int r = static_cast<int>(out.kept.size());
    out.kept.push_back(i);
    for (const auto& [col, val] : key) t.emplace_back(r, col, val);
  }
  out.A.resize(static_cast<int>(out.kept.size()), program.num_vars());
  out.A.setFromTriplets(t.begin(), t.end());
  out.b.resize(static_cast<Eigen::Index>(out.kept.size()));
  for (std::size_t r = 0; r < out.kept.size(); ++r) out.b[static_cast<Eigen::Index>(r)] = program.b[out.kept[r]];
  // Linearly dependent rows leave the KKT system singular: keep an
  // independent subset and check that the rest agree with it.
  int dropped_dep = 0;
  if (!out.infeasible && out.A.rows() > 1) {
    SparseMatrix At = out.A.transpose();
    At.makeCompressed();
    Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr(At);
    const int rank = qr.info() == Eigen::Success ? static_cast<int>(qr.rank()) : static_cast<int>(out.A.rows());
    if (rank < out.A.rows()) {
      std::vector<int> indep(qr.colsPermutation().indices().data(), qr.colsPermutation().indices().data() + rank);
      std::sort(indep.begin(), indep.end());
      const Eigen::SparseMatrix<double, Eigen::RowMajor, int> full = out.A;
      std::vector<Triplet> tk;
      Vec bk(rank);
      std::vector<int> kept;
      for (int r = 0; r < rank; ++r) {
        for (decltype(full)::InnerIterator it(full, indep[r]); it; ++it) tk.emplace_back(r, it.col(), it.value());
        bk[r] = out.b[indep[r]];
        kept.push_back(out.kept[indep[r]]);
      }
      SparseMatrix Ak(rank, out.A.cols());
      Ak.setFromTriplets(tk.begin(), tk.end());
      // Least-norm solution of the kept rows, checked against every row.
      const SparseMatrix AAt = Ak * SparseMatrix(Ak.transpose());
      Eigen::SimplicialLDLT<SparseMatrix> ldlt(AAt);
      const Vec x0 = Ak.transpose() * ldlt.solve(bk);
      const double mismatch = (out.A * x0 - out.b).lpNorm<Eigen::Infinity>();
      if (ldlt.info() != Eigen::Success || !(mismatch <= 1e-9 * (1.0 + out.b.lpNorm<Eigen::Infinity>()))) {
        out.infeasible = true;
        out.note = "equality rows are inconsistent (rank " + std::to_string(rank) + " of " +
                   std::to_string(out.A.rows()) + ")";
      } else {
        dropped_dep = static_cast<int>(out.A.rows()) - rank;
        out.A = Ak;
        out.b = bk;
        out.kept = kept;
      }
    }
  }
  if (!out.infeasible && (dropped_zero > 0 || dropped_dup > 0 || dropped_dep > 0)) {
    std::ostringstream os;
    os << "presolve dropped " << dropped_zero << " zero, " << dropped_dup << " duplicate and " << dropped_dep
       << " dependent equality rows";
    out.note = os.str();
  }
  return out;
}

/// Diagonal scalings A~ = E_A A D, G~ = E_G G D with one factor per cone block.
struct Equilibration {
  Vec D, EA, EG;
};

Equilibration equilibrate(SparseMatrix& A, SparseMatrix& G, const Cones& cones, int passes) {
  const int n = static_cast<int>(A.cols());
  Equilibration eq{Vec::Ones(n), Vec::Ones(A.rows()), Vec::Ones(G.rows())};
  auto factor = [](double norm) { return norm < 1e-12 ? 1.0 : 1.0 / std::sqrt(std::clamp(norm, 1e-4, 1e4)); };
  for (int pass = 0; pass < passes; ++pass) {
    Vec col = Vec::Zero(n), rowA = Vec::Zero(A.rows()), rowG = Vec::Zero(G.rows());
    for (int j = 0; j < n; ++j) {
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
        col[j] = std::max(col[j], std::abs(it.value()));
        rowA[it.row()] = std::max(rowA[it.row()], std::abs(it.value()));
      }
      for (SparseMatrix::InnerIterator it(G, j); it; ++it) {
        col[j] = std::max(col[j], std::abs(it.value()));
        rowG[it.row()] = std::max(rowG[it.row()], std::abs(it.value()));
      }
    }
    for (std::size_t k = 0; k < cones.soc().size(); ++k) {
      auto block = rowG.segment(cones.offset()[k], cones.soc()[k]);
      block.setConstant(block.maxCoeff());
    }
    const Vec dc = col.unaryExpr(factor), ea = rowA.unaryExpr(factor), eg = rowG.unaryExpr(factor);
    A = ea.asDiagonal() * A * dc.asDiagonal();
    G = eg.asDiagonal() * G * dc.asDiagonal();
    eq.D = eq.D.cwiseProduct(dc);
    eq.EA = eq.EA.cwiseProduct(ea);
    eq.EG = eq.EG.cwiseProduct(eg);
  }
  return eq;
}

}  // namespace

SolveResult InteriorPointSolver::solve(const ConicProgram& program) const {
  const auto start = std::chrono::steady_clock::now();
  program.validate();
  const IpmSettings& st = settings_;
  SolveResult result;
  const int n = program.num_vars();
  const int p_orig = program.num_eq();
  const int m = program.num_cone_rows();
  auto finish = [&](SolveStatus status, std::string note) {
    result.status = status;
    if (!note.empty()) result.diagnostics = result.diagnostics.empty() ? note : result.diagnostics + "; " + note;
    result.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  };

  Presolved pre = presolve_equalities(program);
  result.diagnostics = pre.note;
  result.x = Vec::Zero(n);
  result.s = Vec::Zero(m);
  result.y = Vec::Zero(p_orig);
  result.z = Vec::Zero(m);
  if (pre.infeasible) {
    result.diagnostics.clear();
    return finish(SolveStatus::infeasible, pre.note);
  }

  const Cones cones(program.cones);
  SparseMatrix A = pre.A;
  SparseMatrix G = program.G;
  const Equilibration eq = equilibrate(A, G, cones, st.equilibration_passes);
  const Vec c = eq.D.cwiseProduct(program.c);
  const Vec b = eq.EA.cwiseProduct(pre.b);
  const Vec h = eq.EG.cwiseProduct(program.h);
  const SparseMatrix At = A.transpose();
  const SparseMatrix Gt = G.transpose();
  const int p = static_cast<int>(b.size());

  // Unscaled data for termination tests.
  const SparseMatrix& Ao = pre.A;
  const SparseMatrix& Go = program.G;
  const Vec& bo = pre.b;
  const Vec& ho = program.h;
  const Vec& co = program.c;
  const double bnorm = std::max(1.0, bo.norm());
  const double hnorm = std::max(1.0, ho.norm());
  const double cnorm = std::max(1.0, co.norm());

  auto store = [&](const Vec& x, const Vec& y, const Vec& z, const Vec& s, double scale) {
    result.x = eq.D.cwiseProduct(x) / scale;
    result.s = s.cwiseQuotient(eq.EG) / scale;
    result.z = eq.EG.cwiseProduct(z) / scale;
    Vec yo = eq.EA.cwiseProduct(y) / scale;
    result.y.setZero();
    for (int r = 0; r < p; ++r) result.y[pre.kept[static_cast<std::size_t>(r)]] = yo[r];
  };

  KktSolver kkt(A, G, cones, st);
  ConeScaling sc = cones.identity_scaling();
  if (!kkt.factor(sc)) return finish(SolveStatus::numerical_failure, "initial KKT factorization failed");

  Vec x(n), y(p), z(m), s(m);
  {
    Vec rhs = Vec::Zero(n + p + m), sol;
    rhs.segment(n, p) = b;
    rhs.tail(m) = h;
    if (!kkt.solve(rhs, sol)) return finish(SolveStatus::numerical_failure, "initial primal solve failed");
    x = sol.head(n);
    s = -sol.tail(m);
    const double ms = cones.margin(s);
    if (ms < 1e-8) cones.add_identity(s, 1.0 - std::min(ms, 0.0));
    rhs.setZero();
    rhs.head(n) = -c;
    if (!kkt.solve(rhs, sol)) return finish(SolveStatus::numerical_failure, "initial dual solve failed");
    y = sol.segment(n, p);
    z = sol.tail(m);
    const double mz = cones.margin(z);
    if (mz < 1e-8) cones.add_identity(z, 1.0 - std::min(mz, 0.0));
  }
  double tau = 1.0, kappa = 1.0;
  const Vec e = cones.identity();
  const int degree = cones.degree();

  for (int iter = 0;; ++iter) {
    result.iterations = iter;
    const Vec rx = At * y + Gt * z + c * tau;
    const Vec ry = A * x - b * tau;
    const Vec rz = s + G * x - h * tau;
    const double rt = kappa + c.dot(x) + b.dot(y) + h.dot(z);
    const double mu = (s.dot(z) + tau * kappa) / (degree + 1);

    // Termination on the unscaled problem.
    {
      const Vec xo = eq.D.cwiseProduct(x) / tau;
      const Vec so = s.cwiseQuotient(eq.EG) / tau;
      const Vec yo = eq.EA.cwiseProduct(y) / tau;
      const Vec zo = eq.EG.cwiseProduct(z) / tau;
      const double pcost = co.dot(xo);
      const double dcost = -bo.dot(yo) - ho.dot(zo);
      const double pres = std::max(p > 0 ? (Ao * xo - bo).norm() / bnorm : 0.0, (Go * xo + so - ho).norm() / hnorm);
      const double dres = (Ao.transpose() * yo + Go.transpose() * zo + co).norm() / cnorm;
      const double gap = so.dot(zo);
      const double relgap = gap / std::max(1e-300, std::min(std::abs(pcost), std::abs(dcost)));
      result.objective = pcost;
      result.dual_objective = dcost;
      result.primal_residual = pres;
      result.dual_residual = dres;
      result.gap = gap;
      if (st.verbose)
        std::fprintf(stderr, "%3d pcost %+.9e dcost %+.9e pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e\n", iter, pcost,
                     dcost, pres, dres, gap, tau, kappa);
      if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap))
        return finish(SolveStatus::numerical_failure, "non-finite iterate");
      if (pres < st.feastol && dres < st.feastol && (gap < st.abstol || relgap < st.reltol)) {
        store(x, y, z, s, tau);
        return finish(SolveStatus::optimal, "");
      }
      // Certificates use the unnormalized iterate.
      const Vec yc = eq.EA.cwiseProduct(y);
      const Vec zc = eq.EG.cwiseProduct(z);
      const double hzby = ho.dot(zc) + bo.dot(yc);
      if (hzby < 0.0 && (Ao.transpose() * yc + Go.transpose() * zc).norm() / -hzby < st.feastol) {
        store(x, y, z, s, 1.0);
        return finish(SolveStatus::infeasible, "primal infeasibility certificate");
      }
      const Vec xc = eq.D.cwiseProduct(x);
      const Vec sc_o = s.cwiseQuotient(eq.EG);
      const double cx = co.dot(xc);
      if (cx < 0.0) {
        const double res = std::max(p > 0 ? (Ao * xc).norm() : 0.0, (Go * xc + sc_o).norm());
        if (res / -cx < st.feastol) {
          store(x, y, z, s, 1.0);
          return finish(SolveStatus::unbounded, "dual infeasibility certificate");
        }
      }
      if (iter >= st.max_iterations) {
        store(x, y, z, s, tau);
        return finish(SolveStatus::max_iterations, "iteration limit reached");
      }
    }

    if (!cones.scaling(s, z, sc)) {
      store(x, y, z, s, tau);
      return finish(SolveStatus::numerical_failure, "iterate left the cone interior");
    }
    if (!kkt.factor(sc)) {
      store(x, y, z, s, tau);
      return finish(SolveStatus::numerical_failure, "KKT factorization failed");
    }
    Vec rhs1(n + p + m), sol1;
    rhs1 << -c, b, h;
    if (!kkt.solve(rhs1, sol1)) {
      store(x, y, z, s, tau);
      return finish(SolveStatus::numerical_failure, "KKT solve failed");
    }
    const double denom1 = c.dot(sol1.head(n)) + b.dot(sol1.segment(n, p)) + h.dot(sol1.tail(m)) - kappa / tau;

    struct Direction {
      Vec dx, dy, dz, ds, wdz, wids;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](double sigma, const Vec& ds_rhs, double dk_rhs) -> std::optional<Direction> {
      const Vec Wlds = cones.apply(sc, cones.divide(sc.lambda, ds_rhs), 1);
      Vec rhs2(n + p + m), sol2;
      rhs2 << -(1.0 - sigma) * rx, -(1.0 - sigma) * ry, -(1.0 - sigma) * rz - Wlds;
      if (!kkt.solve(rhs2, sol2)) return std::nullopt;
      const double bt = -(1.0 - sigma) * rt - dk_rhs / tau;
      Direction d;
      d.dtau = (bt - c.dot(sol2.head(n)) - b.dot(sol2.segment(n, p)) - h.dot(sol2.tail(m))) / denom1;
      if (!std::isfinite(d.dtau)) return std::nullopt;
      d.dx = sol2.head(n) + d.dtau * sol1.head(n);
      d.dy = sol2.segment(n, p) + d.dtau * sol1.segment(n, p);
      d.dz = sol2.tail(m) + d.dtau * sol1.tail(m);
      // Scaled directions: W^{-1} ds and W dz share lambda as base point.
      d.wdz = cones.apply(sc, d.dz, 1);
      d.wids = cones.divide(sc.lambda, ds_rhs) - d.wdz;
      d.ds = cones.apply(sc, d.wids, 1);
      d.dkappa = (dk_rhs - kappa * d.dtau) / tau;
      return d;
    };
    auto step_to_boundary = [&](const Direction& d) {
      double a = std::min(cones.max_step(sc.lambda, d.wids), cones.max_step(sc.lambda, d.wdz));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const Vec ll = cones.product(sc.lambda, sc.lambda);
    const auto affine = direction(0.0, -ll, -tau * kappa);
    if (!affine) {
      store(x, y, z, s, tau);
      return finish(SolveStatus::numerical_failure, "affine direction failed");
    }
    const double alpha_aff = std::min(1.0, step_to_boundary(*affine));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);
    const Vec corr = cones.product(affine->wids, affine->wdz);
    const Vec ds_rhs = -ll + sigma * mu * e - corr;
    const double dk_rhs = -tau * kappa + sigma * mu - affine->dtau * affine->dkappa;
    const auto combined = direction(sigma, ds_rhs, dk_rhs);
    if (!combined) {
      store(x, y, z, s, tau);
      return finish(SolveStatus::numerical_failure, "combined direction failed");
    }
    const double alpha = std::min(1.0, st.step_fraction * step_to_boundary(*combined));
    if (!(alpha > 1e-12)) {
      store(x, y, z, s, tau);
      return finish(SolveStatus::numerical_failure, "step length collapsed");
    }
    if (st.verbose) std::fprintf(stderr, "    alpha_aff %.3e sigma %.3e alpha %.3e kkt_err %.2e\n", alpha_aff, sigma, alpha, kkt.last_error());
    x += alpha * combined->dx;
    y += alpha * combined->dy;
    z += alpha * combined->dz;
    s += alpha * combined->ds;
    tau += alpha * combined->dtau;
    kappa += alpha * combined->dkappa;
  }
}

}  // namespace stcpdg
