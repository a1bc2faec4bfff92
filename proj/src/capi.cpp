#include "vibrosheet/vibrosheet.h"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "compare.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "numfmt.hpp"
#include "robot_model.hpp"
#include "sweep.hpp"
#include "version.hpp"

using namespace vibrosheet;

namespace {

thread_local std::string g_last_error;

vs_status status_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NumericalBlowup:
      return VS_ERR_NUMERIC;
    case ErrorCode::Io:
      return VS_ERR_IO;
    default:
      return VS_ERR_INVALID;
  }
}

template <typename Fn>
vs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return VS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_for(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VS_ERR_INTERNAL;
  }
}

ActuationPattern to_pattern(const vs_pattern& p) {
  ActuationPattern out;
  out.frequency = p.freq_hz;
  out.phase_deg = p.phase_deg;
  out.duty_left = p.duty_left;
  out.duty_right = p.duty_right;
  out.v_high = p.v_high;
  out.rise_time = p.rise_time_s;
  out.fall_time = p.fall_time_s;
  return out;
}

vs_pattern from_pattern(const ActuationPattern& p) {
  vs_pattern out;
  out.freq_hz = p.frequency;
  out.phase_deg = p.phase_deg;
  out.duty_left = p.duty_left;
  out.duty_right = p.duty_right;
  out.v_high = p.v_high;
  out.rise_time_s = p.rise_time;
  out.fall_time_s = p.fall_time;
  return out;
}

}  // namespace

struct vs_robot {
  RobotConfig config;
  ChainModel chain;
};

struct vs_trajectory {
  Trajectory traj;
  ChainModel chain;  // needed for CSV export (link angles)
};

extern "C" {

const char* vs_version(void) { return VIBROSHEET_VERSION; }

const char* vs_last_error(void) { return g_last_error.c_str(); }

vs_status vs_robot_load_file(const char* path, vs_robot** out) {
  return guarded([&] {
    if (!path || !out) fail(ErrorCode::InvalidConfig, "null argument");
    auto config = config_from_file(path);
    *out = new vs_robot{config, compile(config)};
  });
}

vs_status vs_robot_load_json(const char* json_text, vs_robot** out) {
  return guarded([&] {
    if (!json_text || !out) fail(ErrorCode::InvalidConfig, "null argument");
    auto config = config_from_json(json_text);
    *out = new vs_robot{config, compile(config)};
  });
}

void vs_robot_free(vs_robot* robot) { delete robot; }

int vs_robot_link_count(const vs_robot* robot) {
  return robot ? static_cast<int>(robot->chain.links.size()) : 0;
}

int vs_robot_joint_count(const vs_robot* robot) {
  return robot ? static_cast<int>(robot->chain.joints.size()) : 0;
}

double vs_robot_total_mass(const vs_robot* robot) {
  return robot ? robot->chain.total_mass : 0.0;
}

int vs_validate_file(const char* path, char* buf, size_t buflen) {
  if (buf && buflen) buf[0] = '\0';
  std::vector<std::string> violations;
  try {
    violations = validate(config_from_file(path));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    if (buf && buflen) {
      std::strncpy(buf, e.what(), buflen - 1);
      buf[buflen - 1] = '\0';
    }
    return -1;
  }
  if (buf && buflen) {
    std::string joined;
    for (const auto& v : violations) {
      if (!joined.empty()) joined += '\n';
      joined += v;
    }
    std::strncpy(buf, joined.c_str(), buflen - 1);
    buf[buflen - 1] = '\0';
  }
  return static_cast<int>(violations.size());
}

void vs_pattern_init(vs_pattern* pattern) {
  if (!pattern) return;
  *pattern = from_pattern(ActuationPattern{});
}

void vs_sim_options_init(vs_sim_options* options) {
  if (!options) return;
  IntegratorParams integ;
  SimProtocol protocol;
  ContactParams contact;
  PowerModel power;
  options->dt = integ.dt;
  options->gravity = integ.gravity;
  options->transient_s = protocol.transient_s;
  options->measure_s = protocol.measure_s;
  options->sample_stride = protocol.sample_stride;
  options->contact_stiffness = contact.normal_stiffness;
  options->contact_damping = contact.normal_damping;
  options->friction = contact.friction;
  options->stiction_velocity = contact.stiction_velocity;
  options->power_quiescent_w = power.stage_quiescent;
  options->power_per_duty_w = power.per_duty_slope;
}

vs_status vs_pattern_voltage(const vs_pattern* pattern, int channel, double t,
                             double* out) {
  return guarded([&] {
    if (!pattern || !out) fail(ErrorCode::InvalidConfig, "null argument");
    if (channel != 0 && channel != 1)
      fail(ErrorCode::InvalidRange, "channel must be 0 (left) or 1 (right)");
    auto p = to_pattern(*pattern);
    check_pattern(p);
    *out = voltage_at(p, channel == 0 ? Channel::Left : Channel::Right, t);
  });
}

vs_status vs_simulate(const vs_robot* robot, const vs_pattern* pattern,
                      const vs_sim_options* options, vs_trajectory** out) {
  return guarded([&] {
    if (!robot || !pattern || !options || !out)
      fail(ErrorCode::InvalidConfig, "null argument");
    ActuationPattern p = to_pattern(*pattern);
    check_pattern(p);
    IntegratorParams integ{options->dt, options->gravity};
    SimProtocol protocol{options->transient_s, options->measure_s,
                         options->sample_stride};
    ContactParams contact{options->contact_stiffness, options->contact_damping,
                          options->friction, options->stiction_velocity};
    Trajectory traj = simulate(robot->chain, p, protocol, integ, contact);
    *out = new vs_trajectory{std::move(traj), robot->chain};
  });
}

vs_status vs_trajectory_summary(const vs_trajectory* traj,
                                const vs_pattern* pattern,
                                const vs_sim_options* options,
                                double robot_mass, vs_summary* out) {
  return guarded([&] {
    if (!traj || !pattern || !options || !out)
      fail(ErrorCode::InvalidConfig, "null argument");
    ActuationPattern p = to_pattern(*pattern);
    PowerModel pm;
    pm.stage_quiescent = options->power_quiescent_w;
    pm.per_duty_slope = options->power_per_duty_w;
    out->velocity_mps = steady_state_velocity(traj->traj, p);
    out->power_w = stage_power(p, pm);
    out->efficiency_cmspw = out->power_w > 0.0
                                ? efficiency(out->velocity_mps, out->power_w)
                                : std::nan("");
    out->cot = out->velocity_mps != 0.0
                   ? cost_of_transport(out->power_w, robot_mass,
                                       out->velocity_mps, options->gravity)
                   : std::nan("");
  });
}

vs_status vs_trajectory_save_csv(const vs_trajectory* traj, const char* path) {
  return guarded([&] {
    if (!traj || !path) fail(ErrorCode::InvalidConfig, "null argument");
    write_trajectory_csv(traj->traj, traj->chain, path);
  });
}

void vs_trajectory_free(vs_trajectory* traj) { delete traj; }

vs_status vs_sweep_run(const char* spec_path, const char* out_dir, int workers,
                       int resume, vs_sweep_report* report) {
  return guarded([&] {
    if (!spec_path || !out_dir || !report)
      fail(ErrorCode::InvalidConfig, "null argument");
    SweepSpec spec = sweep_spec_from_file(spec_path);
    if (workers > 0) spec.workers = workers;
    SweepResult result = run_sweep(spec, out_dir, resume != 0);

    std::memset(report, 0, sizeof(*report));
    report->n_records = static_cast<int>(result.records.size());
    for (const auto& r : result.records)
      if (r.failed) report->n_failed++;
    auto fill = [&](vs_optimum& opt, Objective obj) {
      try {
        auto [rec, value] = best(result, obj);
        opt.pattern = from_pattern(rec.pattern);
        std::strncpy(opt.battery_pos, rec.battery_pos.c_str(),
                     sizeof(opt.battery_pos) - 1);
        opt.value = value;
        opt.valid = 1;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AllFailed &&
            e.code() != ErrorCode::EmptyResult)
          throw;
        opt.valid = 0;
      }
    };
    fill(report->max_velocity_left, Objective::MaxVelocityLeft);
    fill(report->max_velocity_right, Objective::MaxVelocityRight);
    fill(report->max_efficiency, Objective::MaxEfficiency);
    fill(report->min_cot, Objective::MinCot);
  });
}

vs_status vs_compare_run(const char* sim_csv, const char* exp_csv,
                         const char* out_dir, double hist_bin_width_cms,
                         int* n_groups) {
  return guarded([&] {
    if (!sim_csv || !exp_csv || !out_dir)
      fail(ErrorCode::InvalidConfig, "null argument");
    auto t_begin = std::chrono::steady_clock::now();
    SweepResult sim = load_result_csv(sim_csv);
    ExperimentGrid exp = load_experiment(exp_csv);
    auto maps = error_maps(sim, exp);
    std::vector<double> rmses;
    for (const auto& c : maps) rmses.push_back(c.rmse_cms);
    double width = hist_bin_width_cms > 0.0 ? hist_bin_width_cms : 0.1;
    auto bins = histogram(rmses, width);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::string map_path = (fs::path(out_dir) / "error_map.csv").string();
    std::string hist_path = (fs::path(out_dir) / "rmse_histogram.csv").string();
    write_file_atomic(map_path, error_map_csv(maps));
    write_file_atomic(hist_path, histogram_csv(bins));
    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_begin)
                      .count();
    nlohmann::json manifest = {
        {"command", "compare"},
        {"spec_hash", fnv1a_hex(read_file(sim_csv) + read_file(exp_csv))},
        {"engine_version", VIBROSHEET_VERSION},
        {"wall_time_s", wall},
        {"outputs", {map_path, hist_path}},
    };
    write_file_atomic((fs::path(out_dir) / "manifest.json").string(),
                      manifest.dump(2) + "\n");
    if (n_groups) *n_groups = static_cast<int>(maps.size());
  });
}

}  // extern "C"
