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

#include "stcpdg/output.hpp"

#include "stcpdg/stc.hpp"

#include "json.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace stcpdg {

namespace {

// Shortest representation that parses back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void state_header(std::ostream& os) {
  os << "m,r1,r2,r3,v1,v2,v3,q0,q1,q2,q3,w1,w2,w3,T1,T2,T3";
}

void state_row(std::ostream& os, const StateVector& x, const Vec3& u) {
  for (int i = 0; i < kStateDim; ++i) os << (i ? "," : "") << num(x[i]);
  for (int i = 0; i < kControlDim; ++i) os << ',' << num(u[i]);
}

std::string column_suffix(std::size_t i, std::size_t n) { return n > 1 ? "_" + std::to_string(i) : ""; }

nlohmann::json vector_json(const StateVector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw OutputError("write failed for " + path.string());
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const SolutionVariable& s, const ScenarioConfig& config) {
  const auto stcs = enabled_stcs(config);
  os << "k,tau,t,";
  state_header(os);
  os << ",speed,alpha_deg";
  for (const auto& stc : stcs) {
    for (std::size_t i = 0; i < stc.triggers.size(); ++i) os << ",g_" << stc.name << column_suffix(i, stc.triggers.size());
    const std::size_t nh = eval_compound(stc, StateVector::Zero()).h.size();
    for (std::size_t j = 0; j < nh; ++j) os << ",h_" << stc.name << column_suffix(j, nh);
  }
  os << '\n';
  for (int k = 0; k < s.K(); ++k) {
    const StateVector x = s.X.col(k);
    os << k << ',' << num(s.tau(k)) << ',' << num(s.t_c + s.tau(k) * s.t_b) << ',';
    state_row(os, x, s.U.col(k));
    os << ',' << num(x.segment<3>(idx::v).norm()) << ',' << num(rad2deg(angle_of_attack(x)));
    for (const auto& stc : stcs) {
      for (const auto& g : stc.triggers) os << ',' << num(g.value(x));
      for (double h : eval_compound(stc, x).h) os << ',' << num(h);
    }
    os << '\n';
  }
}

void write_history_csv(std::ostream& os, const ScvxResult& result) {
  os << "iteration,solve_status,converged,sigma,t_c,nu_l1,trust_deviation,objective,reference_defect,"
        "solver_iterations,stc_rows,discretize_time,solve_time\n";
  for (const auto& it : result.history) {
    const auto& m = it.metrics;
    os << it.iteration << ',' << to_string(it.solve_status) << ',' << (it.converged ? 1 : 0) << ',' << num(m.sigma)
       << ',' << num(it.solution.t_c) << ',' << num(m.nu_l1) << ',' << num(m.trust_deviation) << ','
       << num(m.objective) << ',' << num(m.reference_defect) << ',' << m.solver_iterations << ',' << m.stc_rows << ','
       << num(m.discretize_time) << ',' << num(m.solve_time) << '\n';
  }
}

void write_fine_csv(std::ostream& os, const FineTrajectory& fine) {
  os << "j,tau,t,";
  state_header(os);
  os << ",speed,alpha_deg\n";
  for (Eigen::Index j = 0; j < fine.tau.size(); ++j) {
    const StateVector x = fine.X.col(j);
    os << j << ',' << num(fine.tau[j]) << ',' << num(fine.time[j]) << ',';
    state_row(os, x, fine.U.col(j));
    os << ',' << num(x.segment<3>(idx::v).norm()) << ',' << num(rad2deg(angle_of_attack(x))) << '\n';
  }
}

std::string summary_json(const RunArtifacts& run) {
  if (!run.config || !run.result || !run.report) throw OutputError("summary needs config, result and report");
  const auto& cfg = *run.config;
  const auto& res = *run.result;
  const auto& rep = *run.report;
  nlohmann::json j;
  j["format_version"] = kOutputFormatVersion;
  j["scenario"] = cfg.name;
  j["status"] = to_string(res.status);
  j["converged"] = res.status == ScvxStatus::converged;
  j["message"] = res.message;
  j["iterations"] = res.history.size();
  j["t_c"] = res.solution.t_c;
  j["t_b"] = res.solution.t_b;
  j["K"] = res.solution.K();
  if (!res.history.empty()) {
    const auto& m = res.history.back().metrics;
    j["metrics"] = {{"nu_l1", m.nu_l1},
                    {"trust_deviation", m.trust_deviation},
                    {"sigma", m.sigma},
                    {"objective", m.objective},
                    {"solver_iterations", m.solver_iterations},
                    {"stc_rows", m.stc_rows}};
  }
  nlohmann::json v;
  v["passed"] = run.verification_passed;
  v["defect_tolerance"] = run.verify_tolerance;
  v["max_defect"] = rep.max_defect;
  v["worst_interval"] = rep.worst_interval;
  v["max_defect_per_component"] = vector_json(rep.max_defect_per_component);
  v["propagation_error"] = rep.propagation_error;
  v["ignition_residual"] = rep.ignition_residual;
  v["terminal"] = {{"position", rep.terminal_position},
                   {"velocity", rep.terminal_velocity},
                   {"rate", rep.terminal_rate},
                   {"attitude", rep.terminal_attitude}};
  v["worst_constraint"] = rep.worst_constraint;
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : rep.constraints) cons.push_back({{"name", c.name}, {"worst", c.worst}, {"node", c.node}});
  v["constraints"] = cons;
  nlohmann::json stcs = nlohmann::json::array();
  for (const auto& s : rep.stcs) {
    nlohmann::json triggered = nlohmann::json::array(), violated = nlohmann::json::array();
    for (std::size_t k = 0; k < s.satisfied.size(); ++k) {
      if (s.triggered[k]) triggered.push_back(k);
      if (!s.satisfied[k]) violated.push_back(k);
    }
    stcs.push_back({{"name", s.name}, {"satisfied", s.all_satisfied()}, {"triggered_nodes", triggered},
                    {"violated_nodes", violated}});
  }
  v["stcs"] = stcs;
  j["verification"] = v;
  // Wall-clock values are kept apart so the rest of the document is reproducible.
  nlohmann::json timing;
  timing["total"] = res.total_time;
  double disc = 0.0, solve = 0.0;
  for (const auto& it : res.history) {
    disc += it.metrics.discretize_time;
    solve += it.metrics.solve_time;
  }
  timing["discretize"] = disc;
  timing["solve"] = solve;
  j["timing"] = timing;
  return j.dump(2) + "\n";
}

void emit_outputs(const RunArtifacts& run, const std::filesystem::path& out_dir) {
  if (!run.config || !run.result || !run.report || !run.fine) throw OutputError("incomplete run artifacts");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw OutputError("cannot create " + out_dir.string() + ": " + ec.message());
  std::ostringstream traj, hist, fine;
  write_trajectory_csv(traj, run.result->solution, *run.config);
  write_history_csv(hist, *run.result);
  write_fine_csv(fine, *run.fine);
  write_file(out_dir / "trajectory.csv", traj.str());
  write_file(out_dir / "history.csv", hist.str());
  write_file(out_dir / "fine.csv", fine.str());
  write_file(out_dir / "summary.json", summary_json(run));
}

}  // namespace stcpdg
