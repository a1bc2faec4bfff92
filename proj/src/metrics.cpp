#include "metrics.hpp"

#include <cmath>

#include "error.hpp"

namespace vibrosheet {

double stage_power(const ActuationPattern& pattern, const PowerModel& pm) {
  return pm.stage_quiescent +
         pm.per_duty_slope * (pattern.duty_left + pattern.duty_right);
}

double efficiency(double velocity_mps, double power_w) {
  if (!(power_w > 0.0)) fail(ErrorCode::ZeroPower, "efficiency requires P > 0");
  return 100.0 * std::abs(velocity_mps) / power_w;
}

double cost_of_transport(double power_w, double mass_kg, double velocity_mps,
                         double gravity) {
  if (!(mass_kg > 0.0)) fail(ErrorCode::InvalidRange, "mass must be > 0");
  if (!(gravity > 0.0)) fail(ErrorCode::InvalidRange, "gravity must be > 0");
  if (velocity_mps == 0.0)
    fail(ErrorCode::ZeroVelocity, "COT undefined at zero velocity");
  return power_w / (mass_kg * gravity * std::abs(velocity_mps));
}

double rmse(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    fail(ErrorCode::LengthMismatch, "rmse: series lengths differ");
  if (x.empty()) fail(ErrorCode::EmptySeries, "rmse: empty series");
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - y[i];
    acc += d * d;
  }
  return std::sqrt(acc / x.size());
}

double pcc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    fail(ErrorCode::LengthMismatch, "pcc: series lengths differ");
  if (x.size() < 2) fail(ErrorCode::EmptySeries, "pcc: need >= 2 points");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(ErrorCode::DegenerateSeries, "pcc: constant series");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace vibrosheet
