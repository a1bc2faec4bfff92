#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "error.hpp"
#include "metrics.hpp"

using namespace vibrosheet;

namespace {

ActuationPattern duties(double dl, double dr) {
  ActuationPattern p;
  p.duty_left = dl;
  p.duty_right = dr;
  return p;
}

}  // namespace

TEST_CASE("stage power is affine in summed duty") {
  PowerModel pm;
  CHECK(stage_power(duties(0.0, 0.0), pm) == 0.0);
  CHECK(stage_power(duties(0.6, 0.3), pm) == doctest::Approx(0.46).epsilon(1e-3));
  CHECK(stage_power(duties(0.9, 0.9), pm) == doctest::Approx(0.92).epsilon(1e-3));
  pm.stage_quiescent = 0.1;
  CHECK(stage_power(duties(0.0, 0.0), pm) == doctest::Approx(0.1));
}

TEST_CASE("efficiency in cm/s per watt") {
  CHECK(efficiency(0.029, 0.46) == doctest::Approx(6.3043).epsilon(1e-4));
  CHECK(efficiency(0.095, 1.0) == doctest::Approx(9.5));
  CHECK(efficiency(0.0, 0.46) == 0.0);
  CHECK(efficiency(-0.029, 0.46) == doctest::Approx(6.3043).epsilon(1e-4));
  try {
    efficiency(0.01, 0.0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroPower);
  }
}

TEST_CASE("cost of transport") {
  CHECK(cost_of_transport(0.46, 0.0445, 0.029, 9.8) ==
        doctest::Approx(36.4).epsilon(0.1 / 36.4));
  // P = mgv exactly gives 1.
  double m = 0.05, v = 0.02, g = 9.8;
  CHECK(cost_of_transport(m * g * v, m, v, g) == doctest::Approx(1.0).epsilon(1e-12));
  // Doubling speed halves it; both directions cost the same.
  double c1 = cost_of_transport(0.46, m, v, g);
  CHECK(cost_of_transport(0.46, m, 2 * v, g) == doctest::Approx(c1 / 2).epsilon(1e-12));
  CHECK(cost_of_transport(0.46, m, -v, g) == doctest::Approx(c1).epsilon(1e-12));
  // Scale laws in power and mass.
  CHECK(cost_of_transport(3 * 0.46, m, v, g) == doctest::Approx(3 * c1).epsilon(1e-12));
  CHECK(cost_of_transport(0.46, 2 * m, v, g) == doctest::Approx(c1 / 2).epsilon(1e-12));
  try {
    cost_of_transport(0.46, m, 0.0, g);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVelocity);
  }
}

TEST_CASE("rmse basics") {
  std::vector<double> x{1.0, 2.0, 3.0};
  CHECK(rmse(x, x) == 0.0);
  CHECK(rmse({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(3.53553).epsilon(1e-5));
  CHECK(rmse({3.0, 4.0}, {0.0, 0.0}) == rmse({0.0, 0.0}, {3.0, 4.0}));
  CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), Error);
  try {
    rmse({}, {});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySeries);
  }
}

TEST_CASE("pcc basics") {
  CHECK(pcc({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pcc({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  try {
    pcc({2, 2, 2}, {1, 2, 3});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSeries);
  }
  CHECK_THROWS_AS(pcc({1, 2, 3}, {5, 5, 5}), Error);
  CHECK_THROWS_AS(pcc({1, 2}, {1, 2, 3}), Error);
}

TEST_CASE("pcc is invariant under positive affine transforms") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(30), y(30), xt(30);
    for (int i = 0; i < 30; ++i) {
      x[i] = uni(rng);
      y[i] = uni(rng);
    }
    double a = 0.1 + std::abs(uni(rng));
    double b = uni(rng);
    for (int i = 0; i < 30; ++i) xt[i] = a * x[i] + b;
    CHECK(std::abs(pcc(xt, y) - pcc(x, y)) < 1e-12);
    CHECK(std::abs(pcc(x, y) - pcc(y, x)) < 1e-12);
  }
}

TEST_CASE("rmse and pcc match a direct evaluation on random pairs") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(-10.0, 10.0);
  std::uniform_int_distribution<int> len(2, 100);
  for (int trial = 0; trial < 200; ++trial) {
    int n = len(rng);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = uni(rng);
      y[i] = uni(rng);
    }
    double se = 0.0, sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
      se += (x[i] - y[i]) * (x[i] - y[i]);
      sx += x[i];
      sy += y[i];
    }
    double ref_rmse = std::sqrt(se / n);
    double mx = sx / n, my = sy / n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (int i = 0; i < n; ++i) {
      cov += (x[i] - mx) * (y[i] - my);
      vx += (x[i] - mx) * (x[i] - mx);
      vy += (y[i] - my) * (y[i] - my);
    }
    double ref_pcc = cov / std::sqrt(vx * vy);
    CHECK(rmse(x, y) == doctest::Approx(ref_rmse).epsilon(1e-10));
    CHECK(pcc(x, y) == doctest::Approx(ref_pcc).epsilon(1e-10));
  }
}
