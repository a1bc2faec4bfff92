#pragma once

#include <map>
#include <string>
#include <vector>

#include "actuation.hpp"
#include "dynamics.hpp"
#include "metrics.hpp"
#include "robot_model.hpp"

namespace vibrosheet {

struct SweepSpec {
  RobotConfig robot;
  std::vector<double> freqs{16.0};
  std::vector<double> phases{0.0};
  std::vector<double> duties_left{0.0};
  std::vector<double> duties_right{0.0};
  // Battery placements to sweep; empty means "use the robot config's own".
  std::vector<std::string> battery_positions;
  SimProtocol protocol;
  IntegratorParams integrator;
  ContactParams contact;
  PowerModel power;
  double v_high = 300.0;
  double rise_time = 0.002;
  double fall_time = 0.002;
  int workers = 1;
  // Canonical JSON of the spec as loaded; hashed for resume bookkeeping.
  std::string canonical_json;
};

struct SweepRecord {
  ActuationPattern pattern;
  std::string battery_pos;
  double velocity_mps = 0.0;
  double power_w = 0.0;
  double eff_cmspw = 0.0;
  double cot = 0.0;
  bool failed = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // battery-position blocks, grid order within
  std::string spec_hash;
  std::string engine_version;
};

enum class Objective {
  MaxVelocityLeft,
  MaxVelocityRight,
  MaxEfficiency,
  MinCot,
};

enum class GridAxis { Freq, Phase, DutyLeft, DutyRight };
enum class GridMetric { Velocity, Power, Efficiency, Cot };

SweepSpec sweep_spec_from_json(const std::string& text,
                               const std::string& base_dir = "");
SweepSpec sweep_spec_from_file(const std::string& path);
std::string spec_hash(const SweepSpec& spec);

// Runs every grid point x battery position. Results are deterministic and
// independent of the worker count. When out_dir is non-empty, records are
// journaled there as they complete and `resume` skips records already in
// the journal (same spec hash only); result.csv and manifest.json are
// written at the end.
SweepResult run_sweep(const SweepSpec& spec, const std::string& out_dir = "",
                      bool resume = false);

// Argmax/argmin with first-in-grid-order tie-break. Throws EmptyResult /
// AllFailed when nothing is eligible.
std::pair<SweepRecord, double> best(const SweepResult& result, Objective obj);

// Rectangular metric table over two axes with the remaining axes fixed.
std::string export_grid(const SweepResult& result, GridAxis x_axis,
                        GridAxis y_axis,
                        const std::map<GridAxis, double>& slice,
                        const std::string& battery_pos, GridMetric metric);

std::string result_csv(const SweepResult& result);
SweepResult load_result_csv(const std::string& path);

std::string battery_position_name(const RobotConfig& config);

}  // namespace vibrosheet
