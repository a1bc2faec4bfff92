#pragma once

#include <vector>

#include "actuation.hpp"

namespace vibrosheet {

// Stage power (drive electronics + actuators) is modeled, not simulated:
// the measured behavior is affine in the summed duty ratio. Computation
// power is accounted separately and excluded from stage power.
struct PowerModel {
  double stage_quiescent = 0.0;   // W
  double per_duty_slope = 0.5111; // W per unit of D_L + D_R
  double compute_power = 0.740;   // W, informational
  double battery_voltage = 7.4;   // V, informational
};

double stage_power(const ActuationPattern& pattern, const PowerModel& pm);

// 100*|v|/P in cm/s/W. Throws ZeroPower for P <= 0.
double efficiency(double velocity_mps, double power_w);

// P/(m*g*|v|). Throws ZeroVelocity for v == 0.
double cost_of_transport(double power_w, double mass_kg, double velocity_mps,
                         double gravity);

double rmse(const std::vector<double>& x, const std::vector<double>& y);

// Pearson correlation; throws DegenerateSeries when either input has zero
// variance.
double pcc(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vibrosheet
