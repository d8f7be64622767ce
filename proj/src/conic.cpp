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

#include "stcpdg/conic.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "stcpdg/core.hpp"
#include "stcpdg/ipm.hpp"

namespace stcpdg {

int ConeDims::total() const { return nonneg + std::accumulate(soc.begin(), soc.end(), 0); }

void ConicProgram::validate() const {
  const int n = num_vars();
  if (A.cols() != n || G.cols() != n) throw AssemblyError("cost and constraint column counts differ");
  if (A.rows() != b.size()) throw AssemblyError("equality matrix rows differ from rhs length");
  if (G.rows() != h.size()) throw AssemblyError("cone matrix rows differ from rhs length");
  if (cones.nonneg < 0) throw AssemblyError("negative orthant dimension");
  for (int d : cones.soc)
    if (d < 2) throw AssemblyError("second-order cone of dimension " + std::to_string(d));
  if (cones.total() != h.size()) throw AssemblyError("cone dimensions do not cover the cone rows");
  if (!c.allFinite() || !b.allFinite() || !h.allFinite()) throw AssemblyError("non-finite program data");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iterations: return "max-iters";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

std::unique_ptr<ConicBackend> make_backend(const std::string& name) {
  IpmSettings settings;
  if (name == "ipm") {
    settings.kkt = KktMethod::sparse_ldlt;
  } else if (name == "ipm-dense") {
    settings.kkt = KktMethod::dense_lu;
  } else {
    throw ConfigError("unknown conic backend '" + name + "'");
  }
  return std::make_unique<InteriorPointSolver>(settings);
}

std::vector<std::string> backend_names() { return {"ipm", "ipm-dense"}; }

double cone_violation(const ConicProgram& program, const Eigen::VectorXd& x) {
  const Eigen::VectorXd s = program.h - program.G * x;
  double worst = 0.0;
  int row = 0;
  for (; row < program.cones.nonneg; ++row) worst = std::max(worst, -s[row]);
  for (int d : program.cones.soc) {
    worst = std::max(worst, s.segment(row + 1, d - 1).norm() - s[row]);
    row += d;
  }
  return worst;
}

double equality_violation(const ConicProgram& program, const Eigen::VectorXd& x) {
  if (program.num_eq() == 0) return 0.0;
  return (program.A * x - program.b).lpNorm<Eigen::Infinity>();
}

namespace {

void write_triplets(std::ostream& os, const char* tag, const SparseMatrix& M) {
  os << tag << ' ' << M.nonZeros() << '\n';
  for (int j = 0; j < M.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(M, j); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_vector(std::ostream& os, const char* tag, const Eigen::VectorXd& v) {
  os << tag << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << '\n';
}

std::string expect_tag(std::istream& is, const std::string& tag) {
  std::string word;
  if (!(is >> word) || word != tag) throw ConfigError("conic dump: expected '" + tag + "', found '" + word + "'");
  return word;
}

template <typename T>
T read_value(std::istream& is, const char* what) {
  T value{};
  if (!(is >> value)) throw ConfigError(std::string("conic dump: bad ") + what);
  return value;
}

Eigen::VectorXd read_vector(std::istream& is, const std::string& tag, Eigen::Index expected) {
  expect_tag(is, tag);
  const auto size = read_value<Eigen::Index>(is, "vector length");
  if (size != expected) throw ConfigError("conic dump: " + tag + " has length " + std::to_string(size));
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = read_value<double>(is, "vector entry");
  return v;
}

SparseMatrix read_triplets(std::istream& is, const std::string& tag, int rows, int cols) {
  expect_tag(is, tag);
  const auto nnz = read_value<long>(is, "nonzero count");
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    const int i = read_value<int>(is, "row index");
    const int j = read_value<int>(is, "column index");
    const double v = read_value<double>(is, "matrix entry");
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw ConfigError("conic dump: " + tag + " index out of range");
    triplets.emplace_back(i, j, v);
  }
  SparseMatrix M(rows, cols);
  M.setFromTriplets(triplets.begin(), triplets.end());
  return M;
}

}  // namespace

void write_program(std::ostream& os, const ConicProgram& program) {
  program.validate();
  const auto old_precision = os.precision(17);
  os << "conic-program 1\n";
  os << "dims " << program.num_vars() << ' ' << program.num_eq() << ' ' << program.num_cone_rows() << '\n';
  write_vector(os, "c", program.c);
  write_triplets(os, "A", program.A);
  write_vector(os, "b", program.b);
  write_triplets(os, "G", program.G);
  write_vector(os, "h", program.h);
  os << "cones " << program.cones.nonneg << ' ' << program.cones.soc.size();
  for (int d : program.cones.soc) os << ' ' << d;
  os << '\n';
  os.precision(old_precision);
}

ConicProgram read_program(std::istream& is) {
  expect_tag(is, "conic-program");
  if (read_value<int>(is, "version") != 1) throw ConfigError("conic dump: unsupported version");
  expect_tag(is, "dims");
  const int n = read_value<int>(is, "variable count");
  const int p = read_value<int>(is, "equality count");
  const int m = read_value<int>(is, "cone row count");
  if (n < 0 || p < 0 || m < 0) throw ConfigError("conic dump: negative dimension");
  ConicProgram program;
  program.c = read_vector(is, "c", n);
  program.A = read_triplets(is, "A", p, n);
  program.b = read_vector(is, "b", p);
  program.G = read_triplets(is, "G", m, n);
  program.h = read_vector(is, "h", m);
  expect_tag(is, "cones");
  program.cones.nonneg = read_value<int>(is, "orthant dimension");
  const int nsoc = read_value<int>(is, "cone count");
  for (int k = 0; k < nsoc; ++k) program.cones.soc.push_back(read_value<int>(is, "cone dimension"));
  try {
    program.validate();
  } catch (const AssemblyError& e) {
    throw ConfigError(std::string("conic dump: ") + e.what());
  }
  return program;
}

}  // namespace stcpdg
