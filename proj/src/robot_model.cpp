#include "robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "error.hpp"
#include "numfmt.hpp"

namespace vibrosheet {

double RobotConfig::body_length() const {
  double L = 0.0;
  for (const auto& a : actuators) L += a.length;
  return L;
}

int RobotConfig::cell_count() const {
  return static_cast<int>(std::lround(body_length() * 100.0));
}

int RobotConfig::link_count() const {
  int n = 0;
  for (const auto& a : actuators) n += a.links_per_actuator;
  return n - (static_cast<int>(actuators.size()) - 1);
}

std::vector<int> battery_cells(const RobotConfig& config) {
  if (config.battery_position == BatteryPosition::Custom)
    return config.custom_battery_cells;
  // Fractions of body length (from the left end) matching the qualitative
  // layouts: P1 over the right actuator, P2 over the junction, P3 near the
  // left end. For the default 20-cell body these give {13..16}, {9..12},
  // {2..5}.
  double lo = 0.0, hi = 0.0;
  switch (config.battery_position) {
    case BatteryPosition::P1: lo = 0.65; hi = 0.85; break;
    case BatteryPosition::P2: lo = 0.45; hi = 0.65; break;
    case BatteryPosition::P3: lo = 0.10; hi = 0.30; break;
    default: break;
  }
  int n = config.cell_count();
  int first = static_cast<int>(std::floor(lo * n + 1e-9));
  int last = static_cast<int>(std::floor(hi * n + 1e-9)) - 1;
  std::vector<int> cells;
  for (int i = std::max(0, first); i <= std::min(n - 1, last); ++i)
    cells.push_back(i);
  return cells;
}

std::vector<std::string> validate(const RobotConfig& config) {
  std::vector<std::string> v;
  const auto& m = config.materials;
  if (!(m.torsional_stiffness > 0.0))
    v.push_back("materials.torsional_stiffness > 0");
  if (m.joint_damping < 0.0) v.push_back("materials.joint_damping >= 0");
  if (!std::isfinite(m.voltage_torque_gain))
    v.push_back("materials.voltage_torque_gain must be finite");

  if (config.actuators.empty()) v.push_back("actuators must be non-empty");
  for (size_t i = 0; i < config.actuators.size(); ++i) {
    const auto& a = config.actuators[i];
    std::string tag = "actuators[" + std::to_string(i) + "].";
    if (a.links_per_actuator < 2) v.push_back(tag + "links_per_actuator >= 2");
    if (!(a.length > 0.0)) v.push_back(tag + "length > 0");
    if (!(a.width > 0.0)) v.push_back(tag + "width > 0");
    if (a.drive_voltage < 0.0) v.push_back(tag + "drive_voltage >= 0");
  }

  double body = config.body_length();
  const auto& feet = config.feet;
  if (feet.positions_along_body.size() != 2)
    v.push_back("feet.positions_along_body must list exactly two feet");
  for (size_t i = 0; i + 1 < feet.positions_along_body.size(); ++i)
    if (!(feet.positions_along_body[i] < feet.positions_along_body[i + 1]))
      v.push_back("feet.positions_along_body must be strictly increasing");
  for (double p : feet.positions_along_body)
    if (p < 0.0 || p > body) v.push_back("foot position exceeds body length");
  if (!(feet.height > 0.0)) v.push_back("feet.height > 0");
  if (feet.radius < 0.0 || feet.radius > feet.height)
    v.push_back("feet.radius must be in [0, height]");
  if (feet.mass < 0.0) v.push_back("feet.mass >= 0");

  const auto& w = config.weight;
  int n_cells = config.cell_count();
  double feet_mass = feet.mass * feet.positions_along_body.size();
  if (!(w.total_mass > 0.0)) v.push_back("weight_profile.total_mass > 0");
  if (w.battery_mass < 0.0) v.push_back("weight_profile.battery_mass >= 0");
  double base_budget = w.total_mass - w.battery_mass - feet_mass;
  if (base_budget < 0.0)
    v.push_back("weight_profile: battery + feet mass exceeds total mass");
  if (!w.base_cell_masses.empty()) {
    if (static_cast<int>(w.base_cell_masses.size()) != n_cells)
      v.push_back("weight_profile.base_cell_masses must have one entry per cell (" +
                  std::to_string(n_cells) + ")");
    double sum = 0.0;
    for (double c : w.base_cell_masses) {
      if (c < 0.0) v.push_back("weight_profile cell masses must be >= 0");
      sum += c;
    }
    if (std::abs(sum - base_budget) > 1e-9)
      v.push_back("weight_profile cell masses must sum to total minus battery and feet mass");
  }

  auto cells = battery_cells(config);
  if (config.battery_position == BatteryPosition::Custom && cells.empty())
    v.push_back("battery_position custom cell set must be non-empty");
  std::set<int> seen;
  for (int c : cells) {
    if (c < 0 || c >= n_cells)
      v.push_back("battery cell index out of range: " + std::to_string(c));
    if (!seen.insert(c).second)
      v.push_back("duplicate battery cell index: " + std::to_string(c));
  }
  return v;
}

ChainModel compile(const RobotConfig& config) {
  auto violations = validate(config);
  if (!violations.empty()) {
    std::string msg = "invalid robot config:";
    for (const auto& s : violations) msg += "\n  " + s;
    fail(ErrorCode::InvalidConfig, msg);
  }

  ChainModel chain;
  chain.materials = config.materials;
  chain.body_length = config.body_length();
  chain.foot_height = config.feet.height;

  int n_act = static_cast<int>(config.actuators.size());
  int n_links = config.link_count();
  chain.link_length = chain.body_length / n_links;

  // Cell masses, indexed from the left end.
  int n_cells = config.cell_count();
  double feet_mass = config.feet.mass * config.feet.positions_along_body.size();
  double base = (config.weight.total_mass - config.weight.battery_mass -
                 feet_mass) / n_cells;
  std::vector<double> cell_masses(n_cells, base);
  if (!config.weight.base_cell_masses.empty())
    cell_masses = config.weight.base_cell_masses;
  auto bat = battery_cells(config);
  if (!bat.empty()) {
    double per_cell = config.weight.battery_mass / bat.size();
    for (int c : bat) cell_masses[c] += per_cell;
  }

  // Apportion cells onto links by overlap length. World x runs leftward,
  // so cell i (from the left) occupies [L - (i+1)w, L - i*w].
  double cell_w = chain.body_length / n_cells;
  double ell = chain.link_length;
  std::vector<double> link_mass(n_links, 0.0);
  for (int i = 0; i < n_cells; ++i) {
    double lo = chain.body_length - (i + 1) * cell_w;
    double hi = chain.body_length - i * cell_w;
    int k_lo = std::clamp(static_cast<int>(std::floor(lo / ell)), 0, n_links - 1);
    int k_hi = std::clamp(static_cast<int>(std::floor((hi - 1e-15) / ell)), 0,
                          n_links - 1);
    for (int k = k_lo; k <= k_hi; ++k) {
      double overlap = std::min(hi, (k + 1) * ell) - std::max(lo, k * ell);
      if (overlap > 0.0)
        link_mass[k] += cell_masses[i] * (overlap / cell_w);
    }
  }

  chain.links.reserve(n_links);
  for (int k = 0; k < n_links; ++k)
    chain.links.push_back(
        {ell, link_mass[k], link_mass[k] * ell * ell / 12.0});

  // Joints. World actuator order runs right-to-left, i.e. reversed config
  // order; the shared junction links belong to both neighbours, the joints
  // inside each actuator to exactly one channel (= config actuator index).
  chain.joints.resize(n_links - 1);
  chain.channel_is_left.resize(n_act);
  int link_start = 0;
  for (int w = 0; w < n_act; ++w) {
    int cfg_idx = n_act - 1 - w;
    const auto& a = config.actuators[cfg_idx];
    for (int j = link_start; j < link_start + a.links_per_actuator - 1; ++j) {
      chain.joints[j] = {config.materials.torsional_stiffness,
                         config.materials.joint_damping,
                         config.materials.voltage_torque_gain, cfg_idx};
    }
    link_start += a.links_per_actuator - 1;
  }
  for (int a = 0; a < n_act; ++a)
    chain.channel_is_left[a] = a < (n_act + 1) / 2;

  // Feet, kept in config order (leftmost first).
  for (double pos : config.feet.positions_along_body) {
    CompiledFoot f;
    double world_x = chain.body_length - pos;
    f.host_link = std::clamp(static_cast<int>(std::floor(world_x / ell)), 0,
                             n_links - 1);
    f.local_x = world_x - f.host_link * ell;
    f.local_z = -(config.feet.height - config.feet.radius);
    f.radius = config.feet.radius;
    f.mass = config.feet.mass;
    f.rest_x = world_x;
    chain.feet.push_back(f);
  }

  double total = 0.0;
  for (const auto& l : chain.links) total += l.mass;
  for (const auto& f : chain.feet) total += f.mass;
  chain.total_mass = total;
  return chain;
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      fail(ErrorCode::ParseError,
           "unknown key '" + it.key() + "' in " + where);
}

double get_num(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    fail(ErrorCode::ParseError, "'" + key + "' must be a number");
  return obj[key].get<double>();
}

}  // namespace

RobotConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("robot config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ParseError, "robot config must be a JSON object");
  reject_unknown_keys(j, {"actuators", "materials", "weight_profile", "feet",
                          "battery_position"},
                      "robot config");

  RobotConfig c;
  if (j.contains("actuators")) {
    if (!j["actuators"].is_array())
      fail(ErrorCode::ParseError, "'actuators' must be an array");
    c.actuators.clear();
    for (const auto& ja : j["actuators"]) {
      reject_unknown_keys(ja, {"length", "links_per_actuator", "width",
                               "drive_voltage"},
                          "actuator");
      ActuatorSpec a;
      a.length = get_num(ja, "length", a.length);
      a.links_per_actuator = static_cast<int>(
          get_num(ja, "links_per_actuator", a.links_per_actuator));
      a.width = get_num(ja, "width", a.width);
      a.drive_voltage = get_num(ja, "drive_voltage", a.drive_voltage);
      c.actuators.push_back(a);
    }
  }
  if (j.contains("materials")) {
    const auto& jm = j["materials"];
    reject_unknown_keys(jm, {"torsional_stiffness", "joint_damping",
                             "voltage_torque_gain", "young_modulus_actuator",
                             "young_modulus_substrate"},
                        "materials");
    auto& m = c.materials;
    m.torsional_stiffness = get_num(jm, "torsional_stiffness", m.torsional_stiffness);
    m.joint_damping = get_num(jm, "joint_damping", m.joint_damping);
    m.voltage_torque_gain = get_num(jm, "voltage_torque_gain", m.voltage_torque_gain);
    m.young_modulus_actuator = get_num(jm, "young_modulus_actuator", m.young_modulus_actuator);
    m.young_modulus_substrate = get_num(jm, "young_modulus_substrate", m.young_modulus_substrate);
  }
  if (j.contains("weight_profile")) {
    const auto& jw = j["weight_profile"];
    reject_unknown_keys(jw, {"total_mass", "battery_mass", "base_cell_masses"},
                        "weight_profile");
    c.weight.total_mass = get_num(jw, "total_mass", c.weight.total_mass);
    c.weight.battery_mass = get_num(jw, "battery_mass", c.weight.battery_mass);
    if (jw.contains("base_cell_masses")) {
      if (!jw["base_cell_masses"].is_array())
        fail(ErrorCode::ParseError, "'base_cell_masses' must be an array");
      for (const auto& v : jw["base_cell_masses"])
        c.weight.base_cell_masses.push_back(v.get<double>());
    }
  }
  if (j.contains("feet")) {
    const auto& jf = j["feet"];
    reject_unknown_keys(jf, {"positions_along_body", "radius", "height", "mass"},
                        "feet");
    if (jf.contains("positions_along_body")) {
      if (!jf["positions_along_body"].is_array())
        fail(ErrorCode::ParseError, "'positions_along_body' must be an array");
      c.feet.positions_along_body.clear();
      for (const auto& v : jf["positions_along_body"])
        c.feet.positions_along_body.push_back(v.get<double>());
    }
    c.feet.radius = get_num(jf, "radius", c.feet.radius);
    c.feet.height = get_num(jf, "height", c.feet.height);
    c.feet.mass = get_num(jf, "mass", c.feet.mass);
  }
  if (j.contains("battery_position")) {
    const auto& jb = j["battery_position"];
    if (jb.is_string()) {
      std::string s = jb.get<std::string>();
      if (s == "P1") c.battery_position = BatteryPosition::P1;
      else if (s == "P2") c.battery_position = BatteryPosition::P2;
      else if (s == "P3") c.battery_position = BatteryPosition::P3;
      else fail(ErrorCode::ParseError, "battery_position must be P1, P2, P3 or {\"custom\": [...]}");
    } else if (jb.is_object()) {
      reject_unknown_keys(jb, {"custom"}, "battery_position");
      if (!jb.contains("custom") || !jb["custom"].is_array())
        fail(ErrorCode::ParseError, "battery_position object needs a 'custom' cell array");
      c.battery_position = BatteryPosition::Custom;
      for (const auto& v : jb["custom"])
        c.custom_battery_cells.push_back(v.get<int>());
    } else {
      fail(ErrorCode::ParseError, "battery_position must be a string or object");
    }
  }
  return c;
}

RobotConfig config_from_file(const std::string& path) {
  return config_from_json(read_file(path));
}

}  // namespace vibrosheet
