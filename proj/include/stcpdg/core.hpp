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

#ifndef STCPDG_CORE_HPP
#define STCPDG_CORE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stcpdg {

inline constexpr int kStateDim = 14;
inline constexpr int kControlDim = 3;
// z_k = [t_c, sigma, x_k, u_k]
inline constexpr int kNodeDim = 2 + kStateDim + kControlDim;

namespace idx {
// Offsets into the packed 14-vector [m, r_I, v_I, q_BI, w_B].
inline constexpr int m = 0;
inline constexpr int r = 1;
inline constexpr int v = 4;
inline constexpr int q = 7;
inline constexpr int w = 11;
}  // namespace idx

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using ControlMatrix = Eigen::Matrix<double, kStateDim, kControlDim>;
using NodeWeights = Eigen::Matrix<double, kNodeDim, 1>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Error hierarchy. Input problems derive from std::invalid_argument, numerical
// and runtime failures from std::runtime_error.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SpecificationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PropagationError : public std::runtime_error {
 public:
  PropagationError(const std::string& what, int interval = -1)
      : std::runtime_error(what), interval_(interval) {}
  int interval() const { return interval_; }

 private:
  int interval_;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Units {
  double mass = 1.0;    // U_M
  double length = 1.0;  // U_L
  double time = 1.0;    // U_T

  void validate() const;

  bool operator==(const Units&) const = default;
};

struct VehicleState {
  double m = 1.0;
  Vec3 r_I = Vec3::Zero();
  Vec3 v_I = Vec3::Zero();
  Vec4 q_BI = Vec4(1.0, 0.0, 0.0, 0.0);  // scalar first
  Vec3 w_B = Vec3::Zero();

  StateVector pack() const;
  static VehicleState unpack(const StateVector& x);
};

struct ControlInput {
  Vec3 T_B = Vec3::Zero();
};

/// Discretized trajectory: K nodes at tau_k = k / (K - 1) over the burn.
struct SolutionVariable {
  double t_c = 0.0;
  double t_b = 1.0;
  Eigen::Matrix<double, kStateDim, Eigen::Dynamic> X;
  Eigen::Matrix<double, kControlDim, Eigen::Dynamic> U;

  SolutionVariable() = default;
  explicit SolutionVariable(int K);

  int K() const { return static_cast<int>(X.cols()); }
  double tau(int k) const { return static_cast<double>(k) / (K() - 1); }
  VehicleState state(int k) const { return VehicleState::unpack(X.col(k)); }
  ControlInput control(int k) const { return {U.col(k)}; }
  NodeWeights node(int k) const;

  void validate(double t_c_max) const;
};

enum class WallSide { above, below };

/// One keep-out half-space. The trigger is active (g < 0) when the vehicle
/// is on the keep-out side: g = bound - e_axis.r for `above`,
/// g = e_axis.r - bound for `below`.
struct KeepOutWall {
  int axis = 1;  // 0-based inertial axis
  WallSide side = WallSide::above;
  double bound = 0.0;

  bool operator==(const KeepOutWall&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Units units;

  // environment
  Vec3 g_I = Vec3(-1.0, 0.0, 0.0);

  // vehicle
  double m_ig = 4.0;
  double m_dry = 2.0;
  Vec3 r_T_B = Vec3(-0.01, 0.0, 0.0);
  Vec3 r_cp_B = Vec3::Zero();
  Mat3 J_B = 0.01 * Vec3(0.1, 1.0, 1.0).asDiagonal().toDenseMatrix();
  double alpha_mdot = 0.05;
  double beta_mdot = 0.02;
  double rho_Sa_Ca = 0.2;

  // bounds, angles in radians
  double gamma_gs = deg2rad(20.0);
  double theta_max = deg2rad(90.0);
  double omega_max = deg2rad(90.0);
  double delta_max = deg2rad(20.0);
  double T_min = 1.0;
  double T_max = 8.0;

  // boundary
  double t_c_max = 2.0;
  Vec3 r_I_init = Vec3(14.0, 16.0, 0.0);
  Vec3 v_I_init = Vec3(0.0, -3.57, 1.79);

  // angle-of-attack STC
  bool aoa_enabled = false;
  double alpha_max = deg2rad(10.0);
  double V_alpha = 2.5;

  // keep-out compound STC
  bool keepout_enabled = false;
  double keepout_height = 3.0;
  std::vector<KeepOutWall> keepout_walls = default_keepout_walls();

  // algorithm
  int K = 30;
  double w_nu = 1e3;
  // Per-entry weights of the quadratic trust penalty
  // trust_region_scale * sum_j W_tr[j] * (z_j - zbar_j)^2.
  NodeWeights W_tr = default_trust_weights();
  double trust_region_scale = 500.0;
  double eps_vc = 1e-4;
  double eps_tr = 1e-1;
  double sigma_0 = 10.0;
  double sigma_min = 0.1;
  // Subproblem STC rows treat a trigger as active once g < margin, so the
  // discrete solution cannot settle exactly on the trigger boundary.
  double stc_trigger_margin = 0.05;
  // Inequality STC constraints are enforced as c <= -margin in the subproblem.
  double stc_constraint_margin = 1e-3;
  int max_iterations = 30;

  static NodeWeights default_trust_weights();
  static std::vector<KeepOutWall> default_keepout_walls();

  void validate() const;

  // Field-by-field, exact.
  bool operator==(const ScenarioConfig& other) const;
};

/// Free-fall position and velocity after coasting for t_c.
std::pair<Vec3, Vec3> coast_polynomials(double t_c, const ScenarioConfig& config);

SolutionVariable initial_guess(const ScenarioConfig& config);

}  // namespace stcpdg

#endif  // STCPDG_CORE_HPP
