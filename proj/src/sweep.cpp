#include "sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "error.hpp"
#include "numfmt.hpp"
#include "version.hpp"

namespace vibrosheet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string battery_position_name(const RobotConfig& config) {
  switch (config.battery_position) {
    case BatteryPosition::P1: return "P1";
    case BatteryPosition::P2: return "P2";
    case BatteryPosition::P3: return "P3";
    case BatteryPosition::Custom: return "custom";
  }
  return "?";
}

namespace {

BatteryPosition battery_position_from_name(const std::string& name) {
  if (name == "P1") return BatteryPosition::P1;
  if (name == "P2") return BatteryPosition::P2;
  if (name == "P3") return BatteryPosition::P3;
  fail(ErrorCode::ParseError, "unknown battery position '" + name + "'");
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      fail(ErrorCode::ParseError, "unknown key '" + it.key() + "' in " + where);
}

std::vector<double> num_list(const json& j, const std::string& key) {
  if (!j[key].is_array() || j[key].empty())
    fail(ErrorCode::ParseError, "'" + key + "' must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : j[key]) out.push_back(v.get<double>());
  return out;
}

double maybe(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j[key].get<double>() : fallback;
}

}  // namespace

SweepSpec sweep_spec_from_json(const std::string& text,
                               const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("sweep spec: ") + e.what());
  }
  reject_unknown(j, {"robot", "robot_file", "freqs", "phases", "duties_left",
                     "duties_right", "battery_positions", "protocol",
                     "integrator", "contact", "power", "v_high", "rise_time",
                     "fall_time", "workers"},
                 "sweep spec");

  SweepSpec spec;
  if (j.contains("robot") && j.contains("robot_file"))
    fail(ErrorCode::ParseError, "give either 'robot' or 'robot_file', not both");
  if (j.contains("robot")) {
    spec.robot = config_from_json(j["robot"].dump());
  } else if (j.contains("robot_file")) {
    fs::path p = j["robot_file"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    spec.robot = config_from_file(p.string());
    // inline the robot so the canonical spec (and its hash) is self-contained
    j["robot"] = json::parse(read_file(p.string()));
    j.erase("robot_file");
  }
  if (j.contains("freqs")) spec.freqs = num_list(j, "freqs");
  if (j.contains("phases")) spec.phases = num_list(j, "phases");
  if (j.contains("duties_left")) spec.duties_left = num_list(j, "duties_left");
  if (j.contains("duties_right")) spec.duties_right = num_list(j, "duties_right");
  if (j.contains("battery_positions")) {
    if (!j["battery_positions"].is_array())
      fail(ErrorCode::ParseError, "'battery_positions' must be an array");
    for (const auto& v : j["battery_positions"]) {
      std::string name = v.get<std::string>();
      battery_position_from_name(name);
      spec.battery_positions.push_back(name);
    }
  }
  if (j.contains("protocol")) {
    const auto& jp = j["protocol"];
    reject_unknown(jp, {"transient_s", "measure_s", "sample_stride"}, "protocol");
    spec.protocol.transient_s = maybe(jp, "transient_s", spec.protocol.transient_s);
    spec.protocol.measure_s = maybe(jp, "measure_s", spec.protocol.measure_s);
    spec.protocol.sample_stride = static_cast<int>(
        maybe(jp, "sample_stride", spec.protocol.sample_stride));
  }
  if (j.contains("integrator")) {
    const auto& ji = j["integrator"];
    reject_unknown(ji, {"dt", "gravity"}, "integrator");
    spec.integrator.dt = maybe(ji, "dt", spec.integrator.dt);
    spec.integrator.gravity = maybe(ji, "gravity", spec.integrator.gravity);
  }
  if (j.contains("contact")) {
    const auto& jc = j["contact"];
    reject_unknown(jc, {"normal_stiffness", "normal_damping", "friction",
                        "stiction_velocity"},
                   "contact");
    spec.contact.normal_stiffness = maybe(jc, "normal_stiffness", spec.contact.normal_stiffness);
    spec.contact.normal_damping = maybe(jc, "normal_damping", spec.contact.normal_damping);
    spec.contact.friction = maybe(jc, "friction", spec.contact.friction);
    spec.contact.stiction_velocity = maybe(jc, "stiction_velocity", spec.contact.stiction_velocity);
  }
  if (j.contains("power")) {
    const auto& jq = j["power"];
    reject_unknown(jq, {"stage_quiescent", "per_duty_slope", "compute_power",
                        "battery_voltage"},
                   "power");
    spec.power.stage_quiescent = maybe(jq, "stage_quiescent", spec.power.stage_quiescent);
    spec.power.per_duty_slope = maybe(jq, "per_duty_slope", spec.power.per_duty_slope);
    spec.power.compute_power = maybe(jq, "compute_power", spec.power.compute_power);
    spec.power.battery_voltage = maybe(jq, "battery_voltage", spec.power.battery_voltage);
  }
  spec.v_high = maybe(j, "v_high", spec.v_high);
  spec.rise_time = maybe(j, "rise_time", spec.rise_time);
  spec.fall_time = maybe(j, "fall_time", spec.fall_time);
  spec.workers = static_cast<int>(maybe(j, "workers", spec.workers));
  spec.canonical_json = j.dump();

  double fmin = *std::min_element(spec.freqs.begin(), spec.freqs.end());
  if (spec.protocol.measure_s * fmin < 10.0 - 1e-9)
    fail(ErrorCode::InvalidConfig,
         "measurement window must hold >= 10 periods of the slowest frequency");
  return spec;
}

SweepSpec sweep_spec_from_file(const std::string& path) {
  return sweep_spec_from_json(read_file(path),
                              fs::path(path).parent_path().string());
}

std::string spec_hash(const SweepSpec& spec) {
  return fnv1a_hex(spec.canonical_json);
}

namespace {

std::string record_line(const SweepRecord& r) {
  std::string s;
  s += format_num(r.pattern.frequency);
  s += ',' + format_num(r.pattern.phase_deg);
  s += ',' + format_num(r.pattern.duty_left);
  s += ',' + format_num(r.pattern.duty_right);
  s += ',' + r.battery_pos;
  s += ',' + format_num(r.velocity_mps);
  s += ',' + format_num(r.power_w);
  s += ',' + format_num(r.eff_cmspw);
  s += ',' + format_num(r.cot);
  s += ',' + std::string(r.failed ? "1" : "0");
  return s;
}

SweepRecord record_from_fields(const std::vector<std::string>& f, int line_no) {
  if (f.size() != 10)
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line_no) + ": expected 10 fields");
  SweepRecord r;
  r.pattern.frequency = parse_double(f[0], line_no);
  r.pattern.phase_deg = parse_double(f[1], line_no);
  r.pattern.duty_left = parse_double(f[2], line_no);
  r.pattern.duty_right = parse_double(f[3], line_no);
  r.battery_pos = f[4];
  r.velocity_mps = parse_double(f[5], line_no);
  r.power_w = parse_double(f[6], line_no);
  r.eff_cmspw = parse_double(f[7], line_no);
  r.cot = parse_double(f[8], line_no);
  r.failed = f[9] == "1";
  return r;
}

constexpr const char* kResultHeader =
    "freq_hz,phase_deg,duty_left,duty_right,battery_pos,velocity_mps,power_w,"
    "eff_cmspw,cot,failed";

SweepRecord evaluate_point(const ChainModel& chain, const SweepSpec& spec,
                           const ActuationPattern& pattern,
                           const std::string& battery_name) {
  SweepRecord rec;
  rec.pattern = pattern;
  rec.battery_pos = battery_name;
  rec.power_w = stage_power(pattern, spec.power);
  try {
    Trajectory traj =
        simulate(chain, pattern, spec.protocol, spec.integrator, spec.contact);
    rec.velocity_mps = steady_state_velocity(traj, pattern);
    rec.eff_cmspw = rec.power_w > 0.0
                        ? efficiency(rec.velocity_mps, rec.power_w)
                        : std::nan("");
    rec.cot = rec.velocity_mps != 0.0
                  ? cost_of_transport(rec.power_w, chain.total_mass,
                                      rec.velocity_mps, spec.integrator.gravity)
                  : std::nan("");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NumericalBlowup) throw;
    rec.failed = true;
    rec.velocity_mps = std::nan("");
    rec.eff_cmspw = std::nan("");
    rec.cot = std::nan("");
  }
  return rec;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const std::string& out_dir,
                      bool resume) {
  auto t_begin = std::chrono::steady_clock::now();
  auto grid = pattern_grid(spec.freqs, spec.phases, spec.duties_left,
                           spec.duties_right, spec.v_high, spec.rise_time,
                           spec.fall_time);

  std::vector<std::string> battery_names = spec.battery_positions;
  if (battery_names.empty())
    battery_names.push_back(battery_position_name(spec.robot));

  // One immutable compiled chain per battery position, shared by workers.
  std::vector<ChainModel> chains;
  for (const auto& name : battery_names) {
    RobotConfig cfg = spec.robot;
    if (!spec.battery_positions.empty()) {
      cfg.battery_position = battery_position_from_name(name);
      cfg.custom_battery_cells.clear();
    }
    chains.push_back(compile(cfg));
  }

  size_t total = grid.size() * battery_names.size();
  SweepResult result;
  result.spec_hash = spec_hash(spec);
  result.engine_version = VIBROSHEET_VERSION;
  result.records.resize(total);
  std::vector<char> done(total, 0);

  std::string journal_path;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    journal_path = (fs::path(out_dir) / "journal.csv").string();
  }
  std::string hash_line = "# spec_hash=" + result.spec_hash;

  if (!journal_path.empty() && resume && fs::exists(journal_path)) {
    std::ifstream in(journal_path);
    std::string line;
    int line_no = 0;
    bool hash_ok = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (line_no == 1) {
        hash_ok = line == hash_line;
        if (!hash_ok) break;  // stale journal from a different spec
        continue;
      }
      auto f = split_csv_line(line);
      if (f.size() != 11) continue;  // torn write; recompute that record
      size_t idx = static_cast<size_t>(parse_double(f[0], line_no));
      if (idx >= total) continue;
      result.records[idx] =
          record_from_fields({f.begin() + 1, f.end()}, line_no);
      done[idx] = 1;
    }
  }

  std::ofstream journal;
  std::mutex journal_mu;
  if (!journal_path.empty()) {
    bool keep = resume && std::count(done.begin(), done.end(), 1) > 0;
    journal.open(journal_path, keep ? std::ios::app : std::ios::trunc);
    if (!journal) fail(ErrorCode::Io, "cannot open " + journal_path);
    if (!keep) journal << hash_line << '\n' << std::flush;
  }

  auto work_one = [&](size_t idx) {
    size_t b = idx / grid.size();
    size_t g = idx % grid.size();
    SweepRecord rec =
        evaluate_point(chains[b], spec, grid[g], battery_names[b]);
    result.records[idx] = rec;
    if (journal.is_open()) {
      std::lock_guard<std::mutex> lock(journal_mu);
      journal << idx << ',' << record_line(rec) << '\n' << std::flush;
    }
  };

  int workers = std::max(1, spec.workers);
  if (workers == 1) {
    for (size_t i = 0; i < total; ++i)
      if (!done[i]) work_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= total) return;
          if (!done[i]) work_one(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  if (!out_dir.empty()) {
    write_file_atomic((fs::path(out_dir) / "result.csv").string(),
                      result_csv(result));
    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_begin)
                      .count();
    json manifest = {
        {"command", "sweep"},
        {"spec_hash", result.spec_hash},
        {"engine_version", result.engine_version},
        {"wall_time_s", wall},
        {"outputs", {(fs::path(out_dir) / "result.csv").string()}},
    };
    write_file_atomic((fs::path(out_dir) / "manifest.json").string(),
                      manifest.dump(2) + "\n");
  }
  return result;
}

std::pair<SweepRecord, double> best(const SweepResult& result, Objective obj) {
  if (result.records.empty())
    fail(ErrorCode::EmptyResult, "best: empty sweep result");
  const SweepRecord* arg = nullptr;
  double best_val = 0.0;
  for (const auto& r : result.records) {
    if (r.failed) continue;
    double val;
    bool eligible = true;
    bool maximize = true;
    switch (obj) {
      case Objective::MaxVelocityLeft:
        val = r.velocity_mps;
        break;
      case Objective::MaxVelocityRight:
        val = r.velocity_mps;
        maximize = false;
        break;
      case Objective::MaxEfficiency:
        val = r.eff_cmspw;
        eligible = std::isfinite(r.eff_cmspw);
        break;
      case Objective::MinCot:
        val = r.cot;
        maximize = false;
        eligible = std::isfinite(r.cot) && r.velocity_mps != 0.0;
        break;
    }
    if (!eligible || !std::isfinite(val)) continue;
    if (!arg || (maximize ? val > best_val : val < best_val)) {
      arg = &r;
      best_val = val;
    }
  }
  if (!arg) fail(ErrorCode::AllFailed, "best: no eligible records");
  return {*arg, best_val};
}

namespace {

double axis_value(const SweepRecord& r, GridAxis a) {
  switch (a) {
    case GridAxis::Freq: return r.pattern.frequency;
    case GridAxis::Phase: return r.pattern.phase_deg;
    case GridAxis::DutyLeft: return r.pattern.duty_left;
    case GridAxis::DutyRight: return r.pattern.duty_right;
  }
  return 0.0;
}

const char* axis_name(GridAxis a) {
  switch (a) {
    case GridAxis::Freq: return "freq_hz";
    case GridAxis::Phase: return "phase_deg";
    case GridAxis::DutyLeft: return "duty_left";
    case GridAxis::DutyRight: return "duty_right";
  }
  return "?";
}

double metric_value(const SweepRecord& r, GridMetric m) {
  switch (m) {
    case GridMetric::Velocity: return r.velocity_mps;
    case GridMetric::Power: return r.power_w;
    case GridMetric::Efficiency: return r.eff_cmspw;
    case GridMetric::Cot: return r.cot;
  }
  return 0.0;
}

}  // namespace

std::string export_grid(const SweepResult& result, GridAxis x_axis,
                        GridAxis y_axis,
                        const std::map<GridAxis, double>& slice,
                        const std::string& battery_pos, GridMetric metric) {
  if (x_axis == y_axis)
    fail(ErrorCode::SliceMismatch, "x and y axes must differ");
  for (GridAxis a : {GridAxis::Freq, GridAxis::Phase, GridAxis::DutyLeft,
                     GridAxis::DutyRight}) {
    bool is_axis = a == x_axis || a == y_axis;
    if (!is_axis && !slice.count(a))
      fail(ErrorCode::SliceMismatch,
           std::string("slice must fix ") + axis_name(a));
    if (is_axis && slice.count(a))
      fail(ErrorCode::SliceMismatch,
           std::string("slice must not fix the table axis ") + axis_name(a));
  }

  auto match_slice = [&](const SweepRecord& r) {
    if (r.battery_pos != battery_pos) return false;
    for (const auto& [a, val] : slice)
      if (axis_value(r, a) != val) return false;
    return true;
  };

  std::vector<double> xs, ys;
  for (const auto& r : result.records) {
    if (!match_slice(r)) continue;
    double x = axis_value(r, x_axis), y = axis_value(r, y_axis);
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    if (std::find(ys.begin(), ys.end(), y) == ys.end()) ys.push_back(y);
  }
  if (xs.empty() || ys.empty())
    fail(ErrorCode::SliceMismatch, "no records match the requested slice");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  std::string out = std::string(axis_name(y_axis)) + "\\" + axis_name(x_axis);
  for (double x : xs) out += ',' + format_num(x);
  out += '\n';
  for (double y : ys) {
    out += format_num(y);
    for (double x : xs) {
      const SweepRecord* hit = nullptr;
      for (const auto& r : result.records)
        if (match_slice(r) && axis_value(r, x_axis) == x &&
            axis_value(r, y_axis) == y) {
          hit = &r;
          break;
        }
      if (!hit)
        fail(ErrorCode::SliceMismatch, "grid cell missing from results");
      out += ',' + format_num(metric_value(*hit, metric));
    }
    out += '\n';
  }
  return out;
}

std::string result_csv(const SweepResult& result) {
  std::string out = kResultHeader;
  out += '\n';
  for (const auto& r : result.records) {
    out += record_line(r);
    out += '\n';
  }
  return out;
}

SweepResult load_result_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  SweepResult result;
  result.engine_version = VIBROSHEET_VERSION;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kResultHeader)
        fail(ErrorCode::ParseError, "line 1: unexpected result CSV header");
      continue;
    }
    result.records.push_back(record_from_fields(split_csv_line(line), line_no));
  }
  if (result.records.empty())
    fail(ErrorCode::ParseError, "result CSV has no records");
  return result;
}

}  // namespace vibrosheet
