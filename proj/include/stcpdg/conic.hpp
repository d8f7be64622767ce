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

#ifndef STCPDG_CONIC_HPP
#define STCPDG_CONIC_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace stcpdg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Product cone: `nonneg` orthant rows followed by second-order cones
/// {(t, v) : |v| <= t} of the listed dimensions.
struct ConeDims {
  int nonneg = 0;
  std::vector<int> soc;

  int total() const;
  int degree() const { return nonneg + static_cast<int>(soc.size()); }
};

/// minimize c'x  subject to  A x = b,  h - G x in K.
struct ConicProgram {
  Eigen::VectorXd c;
  SparseMatrix A;
  Eigen::VectorXd b;
  SparseMatrix G;
  Eigen::VectorXd h;
  ConeDims cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(b.size()); }
  int num_cone_rows() const { return static_cast<int>(h.size()); }
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iterations, numerical_failure };

std::string to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x;  // primal
  Eigen::VectorXd s;  // cone slack h - G x
  Eigen::VectorXd y;  // equality multipliers
  Eigen::VectorXd z;  // cone multipliers
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  double solve_time = 0.0;  // seconds
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string diagnostics;
};

/// Any solver accepting the standard-form triple can stand behind this.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const ConicProgram& program) const = 0;
};

/// "ipm" (sparse LDL' KKT solves) or "ipm-dense" (dense LU KKT solves).
std::unique_ptr<ConicBackend> make_backend(const std::string& name);
std::vector<std::string> backend_names();

/// Largest violation of h - G x in K (0 when inside).
double cone_violation(const ConicProgram& program, const Eigen::VectorXd& x);
/// |A x - b|_inf
double equality_violation(const ConicProgram& program, const Eigen::VectorXd& x);

/// Plain-text dump; see docs/formats.md.
void write_program(std::ostream& os, const ConicProgram& program);
ConicProgram read_program(std::istream& is);

}  // namespace stcpdg

#endif  // STCPDG_CONIC_HPP
