#pragma once

#include <vector>

namespace vibrosheet {

enum class Channel { Left, Right };

// Square-wave drive specification for the two actuator channels.
// The right channel is the left one delayed by phase_deg/360 of a period,
// with its own duty ratio. Edges carry linear ramps of rise_time/fall_time;
// a ramp is clipped at the opposite edge, so very short pulses degrade to
// triangles.
struct ActuationPattern {
  double frequency = 16.0;  // Hz
  double phase_deg = 0.0;   // right channel lags left, rising edge to rising edge
  double duty_left = 0.0;   // fraction of the period at v_high
  double duty_right = 0.0;
  double v_high = 300.0;  // V
  double rise_time = 0.002;  // s
  double fall_time = 0.002;  // s

  double period() const { return 1.0 / frequency; }
};

// Throws InvalidRange unless 0 < f <= 30 Hz, duties in [0,1],
// phase in [0,360).
void check_pattern(const ActuationPattern& p);

double voltage_at(const ActuationPattern& p, Channel channel, double t);

// Cartesian product in lexicographic (f, phase, duty_left, duty_right) order.
std::vector<ActuationPattern> pattern_grid(
    const std::vector<double>& freqs, const std::vector<double>& phases,
    const std::vector<double>& duties_left,
    const std::vector<double>& duties_right, double v_high = 300.0,
    double rise_time = 0.002, double fall_time = 0.002);

}  // namespace vibrosheet
