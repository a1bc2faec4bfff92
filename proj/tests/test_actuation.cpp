#include <doctest.h>

#include <cmath>

#include "actuation.hpp"
#include "error.hpp"

using namespace vibrosheet;

namespace {

ActuationPattern make(double f, double phase, double dl, double dr,
                      double rise = 0.0, double fall = 0.0) {
  ActuationPattern p;
  p.frequency = f;
  p.phase_deg = phase;
  p.duty_left = dl;
  p.duty_right = dr;
  p.rise_time = rise;
  p.fall_time = fall;
  return p;
}

}  // namespace

TEST_CASE("square wave levels inside and past the high interval") {
  // 10 Hz, 60% duty: high on [0, 0.06) each period.
  auto p = make(10.0, 0.0, 0.6, 0.0);
  CHECK(voltage_at(p, Channel::Left, 0.05) == doctest::Approx(300.0));
  CHECK(voltage_at(p, Channel::Left, 0.07) == doctest::Approx(0.0));
  // Default 2 ms ramps do not move these two sample points.
  auto pr = make(10.0, 0.0, 0.6, 0.0, 0.002, 0.002);
  CHECK(voltage_at(pr, Channel::Left, 0.05) == doctest::Approx(300.0));
  CHECK(voltage_at(pr, Channel::Left, 0.07) == doctest::Approx(0.0));
}

TEST_CASE("right channel rising edge is delayed by phase/360 of a period") {
  // 16 Hz, 72 degrees: edge at (72/360)/16 = 0.0125 s.
  auto p = make(16.0, 72.0, 0.6, 0.3, 0.002, 0.002);
  CHECK(voltage_at(p, Channel::Right, 0.0124) == doctest::Approx(0.0));
  // 1 ms into the 2 ms rise ramp.
  CHECK(voltage_at(p, Channel::Right, 0.0135) == doctest::Approx(150.0));
  CHECK(voltage_at(p, Channel::Right, 0.0125 + 0.002) ==
        doctest::Approx(300.0));
}

TEST_CASE("degenerate duties") {
  auto p = make(16.0, 0.0, 0.0, 1.0);
  for (double t : {0.0, 0.01, 0.05, 0.33, 1.0}) {
    CHECK(voltage_at(p, Channel::Left, t) == 0.0);
    CHECK(voltage_at(p, Channel::Right, t) == 300.0);
  }
}

TEST_CASE("periodicity is exact") {
  // T = 1/16 = 0.0625 is exactly representable, as are the k/1024 offsets
  // and the 90-degree shift (T/4); exact equality is testable here.
  auto p = make(16.0, 90.0, 0.6, 0.3, 0.002, 0.002);
  for (int k = 0; k < 64; ++k) {
    double t = 0.0625 + k / 1024.0;
    CHECK(voltage_at(p, Channel::Left, t) ==
          voltage_at(p, Channel::Left, t + 0.0625));
    CHECK(voltage_at(p, Channel::Right, t) ==
          voltage_at(p, Channel::Right, t + 0.0625));
  }
}

TEST_CASE("zero phase and equal duties make the channels identical") {
  auto p = make(12.0, 0.0, 0.45, 0.45, 0.002, 0.001);
  for (int k = 0; k < 500; ++k) {
    double t = k * 0.00037;
    CHECK(voltage_at(p, Channel::Left, t) == voltage_at(p, Channel::Right, t));
  }
}

TEST_CASE("mean of the zero-ramp waveform over one period is duty * v_high") {
  auto p = make(16.0, 0.0, 0.6, 0.0);
  double T = p.period();
  const int n = 1000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    sum += voltage_at(p, Channel::Left, (k + 0.5) / n * T);
  CHECK(sum / n == doctest::Approx(0.6 * 300.0).epsilon(1e-12));
}

TEST_CASE("pattern grid is the lexicographic cartesian product") {
  std::vector<double> freqs, phases, dls, drs;
  for (int i = 0; i < 10; ++i) {
    freqs.push_back(8.0 + 2.0 * i);
    phases.push_back(36.0 * i);
    dls.push_back(0.1 * i);
    drs.push_back(0.1 * i);
  }
  auto grid = pattern_grid(freqs, phases, dls, drs);
  REQUIRE(grid.size() == 10000);
  // Lexicographic (f, phase, duty_left, duty_right).
  CHECK(grid[0].frequency == 8.0);
  CHECK(grid[0].duty_right == 0.0);
  CHECK(grid[1].duty_right == doctest::Approx(0.1));
  CHECK(grid[10].duty_left == doctest::Approx(0.1));
  CHECK(grid[100].phase_deg == doctest::Approx(36.0));
  CHECK(grid[1000].frequency == doctest::Approx(10.0));
  CHECK(grid.back().frequency == doctest::Approx(26.0));
  CHECK(grid.back().duty_right == doctest::Approx(0.9));
}

TEST_CASE("pattern grid singleton and two-frequency ordering") {
  auto one = pattern_grid({16.0}, {0.0}, {0.5}, {0.0});
  REQUIRE(one.size() == 1);
  auto two = pattern_grid({8.0, 26.0}, {0.0}, {0.5}, {0.0});
  REQUIRE(two.size() == 2);
  CHECK(two[0].frequency == 8.0);
  CHECK(two[1].frequency == 26.0);
}

TEST_CASE("out-of-range values are rejected") {
  CHECK_THROWS_AS(pattern_grid({31.0}, {0.0}, {0.5}, {0.0}), Error);
  CHECK_THROWS_AS(pattern_grid({16.0}, {360.0}, {0.5}, {0.0}), Error);
  CHECK_THROWS_AS(pattern_grid({16.0}, {0.0}, {1.5}, {0.0}), Error);
  CHECK_THROWS_AS(pattern_grid({16.0}, {0.0}, {0.5}, {-0.1}), Error);
  CHECK_THROWS_AS(pattern_grid({}, {0.0}, {0.5}, {0.0}), Error);
  try {
    pattern_grid({0.0}, {0.0}, {0.5}, {0.0});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidRange);
  }
}
