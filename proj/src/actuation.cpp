#include "actuation.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace vibrosheet {

void check_pattern(const ActuationPattern& p) {
  if (!(p.frequency > 0.0) || p.frequency > 30.0)
    fail(ErrorCode::InvalidRange,
         "frequency must be in (0, 30] Hz, got " + std::to_string(p.frequency));
  if (p.duty_left < 0.0 || p.duty_left > 1.0)
    fail(ErrorCode::InvalidRange, "duty_left must be in [0, 1]");
  if (p.duty_right < 0.0 || p.duty_right > 1.0)
    fail(ErrorCode::InvalidRange, "duty_right must be in [0, 1]");
  if (p.phase_deg < 0.0 || p.phase_deg >= 360.0)
    fail(ErrorCode::InvalidRange, "phase_deg must be in [0, 360)");
  if (p.v_high < 0.0) fail(ErrorCode::InvalidRange, "v_high must be >= 0");
  if (p.rise_time < 0.0 || p.fall_time < 0.0)
    fail(ErrorCode::InvalidRange, "rise/fall times must be >= 0");
}

namespace {

// One period of the ramped square wave, s in [0, T).
double envelope(double s, double T, double duty, double rise, double fall,
                double v_high) {
  if (duty <= 0.0) return 0.0;
  if (duty >= 1.0) return v_high;
  double high_end = duty * T;
  double up = rise > 0.0 ? std::clamp(s / rise, 0.0, 1.0) : 1.0;
  double down = 1.0;
  if (s >= high_end)
    down = fall > 0.0 ? std::clamp(1.0 - (s - high_end) / fall, 0.0, 1.0) : 0.0;
  return v_high * std::min(up, down);
}

}  // namespace

double voltage_at(const ActuationPattern& p, Channel channel, double t) {
  double T = p.period();
  double duty = channel == Channel::Left ? p.duty_left : p.duty_right;
  double shift = channel == Channel::Left ? 0.0 : (p.phase_deg / 360.0) * T;
  double s = std::fmod(t - shift, T);
  if (s < 0.0) s += T;
  return envelope(s, T, duty, p.rise_time, p.fall_time, p.v_high);
}

std::vector<ActuationPattern> pattern_grid(
    const std::vector<double>& freqs, const std::vector<double>& phases,
    const std::vector<double>& duties_left,
    const std::vector<double>& duties_right, double v_high, double rise_time,
    double fall_time) {
  if (freqs.empty() || phases.empty() || duties_left.empty() ||
      duties_right.empty())
    fail(ErrorCode::InvalidRange, "pattern grid axes must be non-empty");
  std::vector<ActuationPattern> grid;
  grid.reserve(freqs.size() * phases.size() * duties_left.size() *
               duties_right.size());
  for (double f : freqs)
    for (double ph : phases)
      for (double dl : duties_left)
        for (double dr : duties_right) {
          ActuationPattern p;
          p.frequency = f;
          p.phase_deg = ph;
          p.duty_left = dl;
          p.duty_right = dr;
          p.v_high = v_high;
          p.rise_time = rise_time;
          p.fall_time = fall_time;
          check_pattern(p);
          grid.push_back(p);
        }
  return grid;
}

}  // namespace vibrosheet
