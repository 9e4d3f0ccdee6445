#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "edsr/dynamics.hpp"

using namespace edsr;

namespace {
const VehicleParams kPar{2.7, 0.6, 0.1};
}

TEST_CASE("cav derivative matches the input-affine model at a frozen point") {
  const VehicleState s{12.0, 3.0, 0.3, 20.0};
  const ControlInput in{1.5, 0.1};
  const Vec4 d = cav_derivative(s, in, kPar);
  CHECK(d[kIdxX] == doctest::Approx(18.515689369189438).epsilon(1e-12));
  CHECK(d[kIdxY] == doctest::Approx(7.821077111478003).epsilon(1e-12));
  CHECK(d[kIdxTheta] == doctest::Approx(0.7407407407407407).epsilon(1e-12));
  CHECK(d[kIdxV] == 1.5);
}

TEST_CASE("cav derivative is affine in the input") {
  const VehicleState s{0.0, 1.0, -0.2, 27.0};
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const ControlInput p{u(gen) * 7.0, u(gen) * 0.7};
    const ControlInput q{u(gen) * 7.0, u(gen) * 0.7};
    const double a = 0.5 * (1.0 + u(gen));
    const ControlInput mix{a * p.u + (1 - a) * q.u, a * p.phi + (1 - a) * q.phi};
    const Vec4 dp = cav_derivative(s, p, kPar);
    const Vec4 dq = cav_derivative(s, q, kPar);
    const Vec4 dm = cav_derivative(s, mix, kPar);
    for (int k = 0; k < 4; ++k) {
      CHECK(dm[k] == doctest::Approx(a * dp[k] + (1 - a) * dq[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("non-finite state or input throws") {
  const VehicleState ok{0, 0, 0, 20};
  CHECK_THROWS_AS(cav_derivative({0, 0, std::nan(""), 20}, {0, 0}, kPar),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      cav_derivative(ok, {std::numeric_limits<double>::infinity(), 0}, kPar),
      std::invalid_argument);
}

TEST_CASE("hdv truth adds the disturbance componentwise") {
  const VehicleState s{5.0, 4.0, 0.1, 28.0};
  const ControlInput in{0.5, -0.05};
  const Vec4 dist{0.7, -0.5, 0.25, -0.7};
  const Vec4 base = cav_derivative(s, in, kPar);
  const Vec4 d = hdv_true_derivative(s, in, dist, kPar);
  for (int k = 0; k < 4; ++k) {
    CHECK(d[k] == doctest::Approx(base[k] + dist[k]).epsilon(1e-12));
  }
}

TEST_CASE("slow vehicle keeps lane, heading and speed frozen") {
  const Vec4 d = slow_vehicle_derivative({60.0, 0.0, 0.0, 20.0});
  CHECK(d[kIdxX] == 20.0);
  CHECK(d[kIdxY] == 0.0);
  CHECK(d[kIdxTheta] == 0.0);
  CHECK(d[kIdxV] == 0.0);
}

TEST_CASE("attack injection is additive and unsaturated") {
  CHECK(apply_attack(1.0, 2.5) == 3.5);
  CHECK(apply_attack(-7.0, -100.0) == -107.0);
}

TEST_CASE("input clamp projects onto the actuator box") {
  const InputLimits lim;
  const ControlInput c = clamp_input({-20.0, 3.0}, lim);
  CHECK(c.u == lim.u_min);
  CHECK(c.phi == lim.phi_max);
  const ControlInput inside = clamp_input({1.0, -0.3}, lim);
  CHECK(inside.u == 1.0);
  CHECK(inside.phi == -0.3);
}

TEST_CASE("integration error shrinks with substeps") {
  // Constant acceleration in a straight line has the closed form
  // x(t) = x0 + v0 t + u t^2 / 2, so the Euler error is measurable exactly.
  const VehicleState s0{0.0, 0.0, 0.0, 20.0};
  const double u = 2.0, dt = 0.5;
  const auto fn = [&](const VehicleState& s) {
    return cav_derivative(s, {u, 0.0}, kPar);
  };
  const double x_exact = s0.x + s0.v * dt + 0.5 * u * dt * dt;
  const double e1 = std::abs(integrate_step(s0, fn, dt, 1).state.x - x_exact);
  const double e10 = std::abs(integrate_step(s0, fn, dt, 10).state.x - x_exact);
  const double e100 =
      std::abs(integrate_step(s0, fn, dt, 100).state.x - x_exact);
  CHECK(e10 < e1 / 5.0);
  CHECK(e100 < e10 / 5.0);
  CHECK(integrate_step(s0, fn, dt, 1).state.v == doctest::Approx(21.0));
}

TEST_CASE("speed floor clamps from below and reports the hit") {
  const VehicleState s0{0.0, 0.0, 0.0, 8.0};
  const auto fn = [&](const VehicleState& s) {
    return cav_derivative(s, {-10.0, 0.0}, kPar);
  };
  const auto r = integrate_step(s0, fn, 0.2, 4, 7.5);
  CHECK(r.speed_floor_hit);
  CHECK(r.state.v == 7.5);
  // No floor configured: the speed keeps falling.
  const auto r2 = integrate_step(s0, fn, 0.2, 4);
  CHECK_FALSE(r2.speed_floor_hit);
  CHECK(r2.state.v == doctest::Approx(6.0));
}
