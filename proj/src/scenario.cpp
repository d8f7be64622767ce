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

#include "stcpdg/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace stcpdg {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
    std::ostringstream os;
    os << source_ << ':';
    if (mark.line >= 0) os << mark.line + 1 << ':' << mark.column + 1 << ':';
    os << ' ' << message;
    throw ConfigError(os.str());
  }
  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const { fail(node.Mark(), message); }

  // Rejects keys outside `allowed` and returns the map itself.
  const YAML::Node& map(const YAML::Node& node, const std::string& what, std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
    std::set<std::string> seen;
    for (const auto& kv : node) {
      const std::string key = kv.first.Scalar();
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) fail(kv.first, "unknown key '" + key + "' in " + what);
      if (!seen.insert(key).second) fail(kv.first, "duplicate key '" + key + "' in " + what);
    }
    return node;
  }

  double number(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    double value = 0.0;
    try {
      value = node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, what + " must be a number, got '" + node.Scalar() + "'");
    }
    if (!std::isfinite(value)) fail(node, what + " must be finite");
    return value;
  }

  int integer(const YAML::Node& node, const std::string& what) const {
    const double value = number(node, what);
    if (value != std::floor(value) || std::abs(value) > 1e9) fail(node, what + " must be an integer");
    return static_cast<int>(value);
  }

  bool boolean(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be true or false");
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, what + " must be true or false, got '" + node.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a string");
    return node.Scalar();
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vector(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence() || node.size() != static_cast<std::size_t>(N))
      fail(node, what + " must be a list of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) out[i] = number(node[i], what + "[" + std::to_string(i) + "]");
    return out;
  }

  Mat3 matrix3(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence() || node.size() != 3) fail(node, what + " must be a list of 3 rows");
    Mat3 out;
    for (int i = 0; i < 3; ++i) out.row(i) = vector<3>(node[i], what + " row " + std::to_string(i)).transpose();
    return out;
  }

  // Assigns `out` when `key` is present in the map.
  template <typename F>
  void optional(const YAML::Node& map, const char* key, F&& read) const {
    if (const YAML::Node child = map[key]) read(child);
  }

 private:
  std::string source_;
};

void read_units(const Reader& rd, const YAML::Node& node, Units& u) {
  rd.map(node, "units", {"mass", "length", "time"});
  rd.optional(node, "mass", [&](const YAML::Node& n) { u.mass = rd.number(n, "units.mass"); });
  rd.optional(node, "length", [&](const YAML::Node& n) { u.length = rd.number(n, "units.length"); });
  rd.optional(node, "time", [&](const YAML::Node& n) { u.time = rd.number(n, "units.time"); });
}

void read_vehicle(const Reader& rd, const YAML::Node& node, ScenarioConfig& c) {
  rd.map(node, "vehicle", {"m_ig", "m_dry", "r_T_B", "r_cp_B", "J_B", "alpha_mdot", "beta_mdot", "rho_Sa_Ca"});
  rd.optional(node, "m_ig", [&](const YAML::Node& n) { c.m_ig = rd.number(n, "vehicle.m_ig"); });
  rd.optional(node, "m_dry", [&](const YAML::Node& n) { c.m_dry = rd.number(n, "vehicle.m_dry"); });
  rd.optional(node, "r_T_B", [&](const YAML::Node& n) { c.r_T_B = rd.vector<3>(n, "vehicle.r_T_B"); });
  rd.optional(node, "r_cp_B", [&](const YAML::Node& n) { c.r_cp_B = rd.vector<3>(n, "vehicle.r_cp_B"); });
  rd.optional(node, "J_B", [&](const YAML::Node& n) { c.J_B = rd.matrix3(n, "vehicle.J_B"); });
  rd.optional(node, "alpha_mdot", [&](const YAML::Node& n) { c.alpha_mdot = rd.number(n, "vehicle.alpha_mdot"); });
  rd.optional(node, "beta_mdot", [&](const YAML::Node& n) { c.beta_mdot = rd.number(n, "vehicle.beta_mdot"); });
  rd.optional(node, "rho_Sa_Ca", [&](const YAML::Node& n) { c.rho_Sa_Ca = rd.number(n, "vehicle.rho_Sa_Ca"); });
}

void read_bounds(const Reader& rd, const YAML::Node& node, ScenarioConfig& c) {
  rd.map(node, "bounds",
         {"glide_slope_deg", "tilt_max_deg", "rate_max_deg", "gimbal_max_deg", "thrust_min", "thrust_max"});
  auto angle = [&](const char* key, double& out) {
    rd.optional(node, key, [&](const YAML::Node& n) { out = deg2rad(rd.number(n, std::string("bounds.") + key)); });
  };
  angle("glide_slope_deg", c.gamma_gs);
  angle("tilt_max_deg", c.theta_max);
  angle("rate_max_deg", c.omega_max);
  angle("gimbal_max_deg", c.delta_max);
  rd.optional(node, "thrust_min", [&](const YAML::Node& n) { c.T_min = rd.number(n, "bounds.thrust_min"); });
  rd.optional(node, "thrust_max", [&](const YAML::Node& n) { c.T_max = rd.number(n, "bounds.thrust_max"); });
}

void read_boundary(const Reader& rd, const YAML::Node& node, ScenarioConfig& c) {
  rd.map(node, "boundary", {"r_init", "v_init", "t_c_max"});
  rd.optional(node, "r_init", [&](const YAML::Node& n) { c.r_I_init = rd.vector<3>(n, "boundary.r_init"); });
  rd.optional(node, "v_init", [&](const YAML::Node& n) { c.v_I_init = rd.vector<3>(n, "boundary.v_init"); });
  rd.optional(node, "t_c_max", [&](const YAML::Node& n) { c.t_c_max = rd.number(n, "boundary.t_c_max"); });
}

KeepOutWall read_wall(const Reader& rd, const YAML::Node& node) {
  rd.map(node, "keep-out wall", {"axis", "side", "bound"});
  for (const char* key : {"axis", "side", "bound"})
    if (!node[key]) rd.fail(node, std::string("keep-out wall needs '") + key + "'");
  KeepOutWall w;
  w.axis = rd.integer(node["axis"], "wall axis");
  if (w.axis < 0 || w.axis > 2) rd.fail(node["axis"], "wall axis must be 0, 1 or 2");
  const std::string side = rd.text(node["side"], "wall side");
  if (side == "above") {
    w.side = WallSide::above;
  } else if (side == "below") {
    w.side = WallSide::below;
  } else {
    rd.fail(node["side"], "wall side must be 'above' or 'below', got '" + side + "'");
  }
  w.bound = rd.number(node["bound"], "wall bound");
  return w;
}

void read_stcs(const Reader& rd, const YAML::Node& node, ScenarioConfig& c) {
  if (!node.IsSequence()) rd.fail(node, "stcs must be a list");
  std::set<std::string> seen;
  for (const auto& entry : node) {
    if (!entry.IsMap() || !entry["type"]) rd.fail(entry, "each stcs entry needs a 'type'");
    const std::string type = rd.text(entry["type"], "stc type");
    if (!seen.insert(type).second) rd.fail(entry["type"], "duplicate stc type '" + type + "'");
    if (type == "aoa") {
      rd.map(entry, "aoa stc", {"type", "enabled", "alpha_max_deg", "V_alpha"});
      c.aoa_enabled = true;
      rd.optional(entry, "enabled", [&](const YAML::Node& n) { c.aoa_enabled = rd.boolean(n, "aoa.enabled"); });
      rd.optional(entry, "alpha_max_deg",
                  [&](const YAML::Node& n) { c.alpha_max = deg2rad(rd.number(n, "aoa.alpha_max_deg")); });
      rd.optional(entry, "V_alpha", [&](const YAML::Node& n) { c.V_alpha = rd.number(n, "aoa.V_alpha"); });
    } else if (type == "keepout") {
      rd.map(entry, "keepout stc", {"type", "enabled", "height", "walls"});
      c.keepout_enabled = true;
      rd.optional(entry, "enabled", [&](const YAML::Node& n) { c.keepout_enabled = rd.boolean(n, "keepout.enabled"); });
      rd.optional(entry, "height", [&](const YAML::Node& n) { c.keepout_height = rd.number(n, "keepout.height"); });
      rd.optional(entry, "walls", [&](const YAML::Node& n) {
        if (!n.IsSequence() || n.size() == 0) rd.fail(n, "keepout.walls must be a non-empty list");
        c.keepout_walls.clear();
        for (const auto& w : n) c.keepout_walls.push_back(read_wall(rd, w));
      });
    } else {
      rd.fail(entry["type"], "unknown stc type '" + type + "' (expected aoa or keepout)");
    }
  }
}

void read_algorithm(const Reader& rd, const YAML::Node& node, ScenarioConfig& c) {
  rd.map(node, "algorithm",
         {"K", "w_nu", "W_tr", "trust_region_scale", "stc_trigger_margin", "stc_constraint_margin", "eps_vc", "eps_tr", "sigma_0", "sigma_min",
          "max_iterations"});
  rd.optional(node, "K", [&](const YAML::Node& n) { c.K = rd.integer(n, "algorithm.K"); });
  rd.optional(node, "w_nu", [&](const YAML::Node& n) { c.w_nu = rd.number(n, "algorithm.w_nu"); });
  rd.optional(node, "W_tr", [&](const YAML::Node& n) { c.W_tr = rd.vector<kNodeDim>(n, "algorithm.W_tr"); });
  rd.optional(node, "trust_region_scale",
              [&](const YAML::Node& n) { c.trust_region_scale = rd.number(n, "algorithm.trust_region_scale"); });
  rd.optional(node, "stc_trigger_margin",
              [&](const YAML::Node& n) { c.stc_trigger_margin = rd.number(n, "algorithm.stc_trigger_margin"); });
  rd.optional(node, "stc_constraint_margin",
              [&](const YAML::Node& n) { c.stc_constraint_margin = rd.number(n, "algorithm.stc_constraint_margin"); });
  rd.optional(node, "eps_vc", [&](const YAML::Node& n) { c.eps_vc = rd.number(n, "algorithm.eps_vc"); });
  rd.optional(node, "eps_tr", [&](const YAML::Node& n) { c.eps_tr = rd.number(n, "algorithm.eps_tr"); });
  rd.optional(node, "sigma_0", [&](const YAML::Node& n) { c.sigma_0 = rd.number(n, "algorithm.sigma_0"); });
  rd.optional(node, "sigma_min", [&](const YAML::Node& n) { c.sigma_min = rd.number(n, "algorithm.sigma_min"); });
  rd.optional(node, "max_iterations",
              [&](const YAML::Node& n) { c.max_iterations = rd.integer(n, "algorithm.max_iterations"); });
}

// Shortest decimal that reads back to the same double.
std::string num(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), end);
  // Keep integers recognizably numeric for readers that care about type.
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos) s += ".0";
  return s;
}

// Degree value whose conversion back is bit-identical to `rad`.
double exact_degrees(double rad) {
  const double d = rad2deg(rad);
  double up = d, down = d;
  for (int i = 0; i < 16; ++i) {
    if (deg2rad(up) == rad) return up;
    if (deg2rad(down) == rad) return down;
    up = std::nextafter(up, HUGE_VAL);
    down = std::nextafter(down, -HUGE_VAL);
  }
  return d;
}

template <typename V>
std::string list(const V& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    rd.fail(e.mark, e.msg);
  }
  ScenarioConfig c;
  if (!root || root.IsNull()) return c;
  try {
    rd.map(root, "scenario",
           {"version", "name", "units", "environment", "vehicle", "bounds", "boundary", "stcs", "algorithm"});
    rd.optional(root, "version", [&](const YAML::Node& n) {
      const int v = rd.integer(n, "version");
      if (v != kScenarioFormatVersion) rd.fail(n, "unsupported scenario version " + std::to_string(v));
    });
    rd.optional(root, "name", [&](const YAML::Node& n) { c.name = rd.text(n, "name"); });
    rd.optional(root, "units", [&](const YAML::Node& n) { read_units(rd, n, c.units); });
    rd.optional(root, "environment", [&](const YAML::Node& n) {
      rd.map(n, "environment", {"g_I"});
      rd.optional(n, "g_I", [&](const YAML::Node& g) { c.g_I = rd.vector<3>(g, "environment.g_I"); });
    });
    rd.optional(root, "vehicle", [&](const YAML::Node& n) { read_vehicle(rd, n, c); });
    rd.optional(root, "bounds", [&](const YAML::Node& n) { read_bounds(rd, n, c); });
    rd.optional(root, "boundary", [&](const YAML::Node& n) { read_boundary(rd, n, c); });
    rd.optional(root, "stcs", [&](const YAML::Node& n) { read_stcs(rd, n, c); });
    rd.optional(root, "algorithm", [&](const YAML::Node& n) { read_algorithm(rd, n, c); });
  } catch (const YAML::Exception& e) {
    rd.fail(e.mark, e.msg);
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    rd.fail(root, e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string dump_scenario(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "version: " << kScenarioFormatVersion << "\n";
  os << "name: " << quoted(c.name) << "\n";
  os << "units:\n  mass: " << num(c.units.mass) << "\n  length: " << num(c.units.length)
     << "\n  time: " << num(c.units.time) << "\n";
  os << "environment:\n  g_I: " << list(c.g_I) << "\n";
  os << "vehicle:\n"
     << "  m_ig: " << num(c.m_ig) << "\n"
     << "  m_dry: " << num(c.m_dry) << "\n"
     << "  r_T_B: " << list(c.r_T_B) << "\n"
     << "  r_cp_B: " << list(c.r_cp_B) << "\n"
     << "  J_B:\n";
  for (int i = 0; i < 3; ++i) os << "    - " << list(Vec3(c.J_B.row(i).transpose())) << "\n";
  os << "  alpha_mdot: " << num(c.alpha_mdot) << "\n"
     << "  beta_mdot: " << num(c.beta_mdot) << "\n"
     << "  rho_Sa_Ca: " << num(c.rho_Sa_Ca) << "\n";
  os << "bounds:\n"
     << "  glide_slope_deg: " << num(exact_degrees(c.gamma_gs)) << "\n"
     << "  tilt_max_deg: " << num(exact_degrees(c.theta_max)) << "\n"
     << "  rate_max_deg: " << num(exact_degrees(c.omega_max)) << "\n"
     << "  gimbal_max_deg: " << num(exact_degrees(c.delta_max)) << "\n"
     << "  thrust_min: " << num(c.T_min) << "\n"
     << "  thrust_max: " << num(c.T_max) << "\n";
  os << "boundary:\n"
     << "  r_init: " << list(c.r_I_init) << "\n"
     << "  v_init: " << list(c.v_I_init) << "\n"
     << "  t_c_max: " << num(c.t_c_max) << "\n";
  os << "stcs:\n"
     << "  - type: aoa\n"
     << "    enabled: " << (c.aoa_enabled ? "true" : "false") << "\n"
     << "    alpha_max_deg: " << num(exact_degrees(c.alpha_max)) << "\n"
     << "    V_alpha: " << num(c.V_alpha) << "\n"
     << "  - type: keepout\n"
     << "    enabled: " << (c.keepout_enabled ? "true" : "false") << "\n"
     << "    height: " << num(c.keepout_height) << "\n"
     << "    walls:\n";
  for (const auto& w : c.keepout_walls)
    os << "      - {axis: " << w.axis << ", side: " << (w.side == WallSide::above ? "above" : "below")
       << ", bound: " << num(w.bound) << "}\n";
  os << "algorithm:\n"
     << "  K: " << c.K << "\n"
     << "  w_nu: " << num(c.w_nu) << "\n"
     << "  W_tr: " << list(c.W_tr) << "\n"
     << "  trust_region_scale: " << num(c.trust_region_scale) << "\n"
     << "  stc_trigger_margin: " << num(c.stc_trigger_margin) << "\n"
     << "  stc_constraint_margin: " << num(c.stc_constraint_margin) << "\n"
     << "  eps_vc: " << num(c.eps_vc) << "\n"
     << "  eps_tr: " << num(c.eps_tr) << "\n"
     << "  sigma_0: " << num(c.sigma_0) << "\n"
     << "  sigma_min: " << num(c.sigma_min) << "\n"
     << "  max_iterations: " << c.max_iterations << "\n";
  return os.str();
}

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot write scenario file");
  out << dump_scenario(config);
  if (!out) throw ConfigError(path.string() + ": write failed");
}

}  // namespace stcpdg
