#pragma once

#include <string>
#include <vector>

namespace vibrosheet {

// World convention used throughout: the x axis points to the robot's LEFT,
// z points up, and the body is laid out with its right end at x = 0.
// Positive center-of-mass velocity therefore means leftward travel, the
// sign convention used for all reported velocities. Positions given "from
// the left end" in configs are flipped into world x at compile time.

struct MaterialParams {
  double torsional_stiffness = 0.32;       // N*m/rad per joint
  double joint_damping = 0.005;            // N*m*s/rad per joint
  double voltage_torque_gain = 1.0667e-4;  // N*m per volt
  // Layer moduli are carried as metadata only; the joint stiffness above is
  // the measured lumped constant actually used by the dynamics.
  double young_modulus_actuator = 30e9;    // Pa
  double young_modulus_substrate = 190e9;  // Pa
};

struct ActuatorSpec {
  double length = 0.100;       // m
  int links_per_actuator = 6;  // links discretizing one actuator
  double width = 0.020;        // m
  double drive_voltage = 300.0;
};

// Mass budget per 1-cm cell along the body. When base_cell_masses is empty
// the non-battery, non-feet mass is spread uniformly; batteries are added on
// top at the cells given by the battery position.
struct WeightProfile {
  double total_mass = 0.0445;    // kg, robot including batteries and feet
  double battery_mass = 0.0124;  // kg, both batteries together
  std::vector<double> base_cell_masses;  // kg per cell, indexed from left end
};

struct FootSpec {
  std::vector<double> positions_along_body = {0.020, 0.180};  // m from left end
  double radius = 0.005;  // m
  double height = 0.010;  // m, body line to cylinder bottom
  double mass = 0.001;    // kg per foot
};

enum class BatteryPosition { P1, P2, P3, Custom };

struct RobotConfig {
  std::vector<ActuatorSpec> actuators{ActuatorSpec{}, ActuatorSpec{}};
  MaterialParams materials;
  WeightProfile weight;
  FootSpec feet;
  BatteryPosition battery_position = BatteryPosition::P1;
  std::vector<int> custom_battery_cells;

  double body_length() const;
  int cell_count() const;  // number of 1-cm cells
  int link_count() const;  // after junction sharing
};

struct LinkParams {
  double length;   // m
  double mass;     // kg, rod share (feet carried separately)
  double inertia;  // kg*m^2 about the rod center
};

struct JointParams {
  double stiffness;
  double damping;
  double voltage_gain;
  int channel;  // actuator channel id owning this joint
};

struct CompiledFoot {
  int host_link;
  double local_x;  // m along the host link from its low-x end
  double local_z;  // m, cylinder center below the body line (negative)
  double radius;
  double mass;
  double rest_x;  // world x of the contact point in the flat pose
};

// Immutable after compile(); safe to share across concurrent runs.
struct ChainModel {
  std::vector<LinkParams> links;
  std::vector<JointParams> joints;
  std::vector<CompiledFoot> feet;      // config order (leftmost foot first)
  std::vector<bool> channel_is_left;   // per actuator channel
  double total_mass = 0.0;
  double link_length = 0.0;
  double body_length = 0.0;
  double foot_height = 0.0;
  MaterialParams materials;
};

// Empty list iff the config satisfies every invariant; each entry names the
// offending field and rule.
std::vector<std::string> validate(const RobotConfig& config);

// Throws InvalidConfig when validate() is non-empty.
ChainModel compile(const RobotConfig& config);

// Cell indices (from the left end) where the battery mass is placed.
std::vector<int> battery_cells(const RobotConfig& config);

// Strict JSON parsing: unknown keys are rejected (ParseError).
RobotConfig config_from_json(const std::string& text);
RobotConfig config_from_file(const std::string& path);

}  // namespace vibrosheet
