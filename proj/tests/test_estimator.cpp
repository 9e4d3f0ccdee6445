#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "edsr/dynamics.hpp"
#include "edsr/estimator.hpp"

using namespace edsr;

namespace {
const VehicleParams kPar{2.7, 0.6, 0.1};
}

TEST_CASE("estimator field at a frozen point") {
  HdvEstimate est;
  est.xbar = {10.0, 4.0, 0.0, 28.0};
  const Vec4 d = estimate_derivative(est, kPar);
  CHECK(d[kIdxX] == doctest::Approx(28.0).epsilon(1e-12));
  CHECK(d[kIdxY] == doctest::Approx(0.0));
  CHECK(d[kIdxTheta] == doctest::Approx(10.37037037037037).epsilon(1e-12));
  CHECK(d[kIdxV] == 0.0);
}

TEST_CASE("adaptive offsets shift the field componentwise") {
  HdvEstimate est;
  est.xbar = {0.0, 0.0, 0.5, 20.0};
  est.h = {0.3, -0.2, 0.1, 0.7};
  const Vec4 base = estimate_derivative(HdvEstimate{est.xbar, {}, {}, {}}, kPar);
  const Vec4 d = estimate_derivative(est, kPar);
  for (int k = 0; k < 4; ++k) {
    CHECK(d[k] == doctest::Approx(base[k] + est.h[k]).epsilon(1e-12));
  }
}

TEST_CASE("zero-base heading model drops the kinematic term") {
  HdvEstimate est;
  est.xbar = {0.0, 0.0, 0.0, 28.0};
  est.h = {0.0, 0.0, 0.25, 0.0};
  const Vec4 d = estimate_derivative(est, kPar, HdvHeadingModel::Zero);
  CHECK(d[kIdxTheta] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("measured error is truth minus estimate") {
  HdvEstimate est;
  est.xbar = {10.0, 4.0, 0.1, 28.0};
  const VehicleState truth{10.5, 3.8, 0.05, 28.6};
  const Vec4 e = measure_error(truth, est);
  CHECK(e[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(e[2] == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(e[3] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("error rate is a backward difference, zero right after reset") {
  const Vec4 e_now{0.2, 0.0, -0.1, 0.4};
  const Vec4 e_prev{0.1, 0.0, 0.1, 0.0};
  const Vec4 r = error_rate(e_now, e_prev, 0.05, false);
  CHECK(r[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r[2] == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(r[3] == doctest::Approx(8.0).epsilon(1e-12));
  const Vec4 z = error_rate(e_now, e_prev, 0.05, true);
  for (double v : z) CHECK(v == 0.0);
  CHECK_THROWS_AS(error_rate(e_now, e_prev, 0.0, false),
                  std::invalid_argument);
}

TEST_CASE("event update folds the rate, re-anchors and clears bookkeeping") {
  HdvEstimate est;
  est.xbar = {9.0, 4.2, 0.0, 27.0};
  est.h = {1.0, 0.0, 0.0, -0.5};
  est.e = {0.5, 0.1, 0.0, 0.2};
  est.e_dot = {0.1, 0.0, 0.0, 0.0};
  const VehicleState truth{9.6, 4.0, 0.02, 27.8};
  reset_and_adapt(est, truth, {0.25, -0.1, 0.0, 0.4});
  CHECK(est.h[0] == doctest::Approx(1.25));
  CHECK(est.h[1] == doctest::Approx(-0.1));
  CHECK(est.h[3] == doctest::Approx(-0.1));
  CHECK(est.xbar.x == truth.x);
  CHECK(est.xbar.v == truth.v);
  for (double v : est.e) CHECK(v == 0.0);
  for (double v : est.e_dot) CHECK(v == 0.0);
}

TEST_CASE("adaptation drives the estimator toward a constant-rate deviation") {
  // If the true vehicle follows the nominal field plus a constant offset on
  // each channel, one reset-and-adapt with the measured rate makes the
  // estimator field match the truth's rate exactly; the inter-event error
  // then stays at the integration-error level. The backward-difference rate
  // is exact only up to the divergence of the two states over the interval,
  // so the window is kept short and the heading channel static.
  const Vec4 offset{0.6, -0.3, 0.05, 0.4};
  const double dt = 0.002;
  HdvEstimate est;
  est.xbar = {0.0, 4.0, 0.0, 28.0};
  VehicleState truth = est.xbar;

  const auto truth_fn = [&](const VehicleState& s) {
    HdvEstimate ghost;
    ghost.xbar = s;
    Vec4 d = estimate_derivative(ghost, kPar, HdvHeadingModel::Zero);
    for (int k = 0; k < 4; ++k) d[k] += offset[k];
    return d;
  };
  const auto est_fn = [&](const VehicleState& s) {
    HdvEstimate ghost;
    ghost.xbar = s;
    ghost.h = est.h;
    return estimate_derivative(ghost, kPar, HdvHeadingModel::Zero);
  };

  // One inter-event interval: drift apart, measure the rate, adapt.
  Vec4 e_prev{0, 0, 0, 0};
  Vec4 rate{0, 0, 0, 0};
  for (int i = 0; i < 10; ++i) {
    truth = integrate_step(truth, truth_fn, dt, 8).state;
    est.xbar = integrate_step(est.xbar, est_fn, dt, 8).state;
    const Vec4 e = measure_error(truth, est);
    rate = error_rate(e, e_prev, dt, i == 0);
    e_prev = e;
  }
  reset_and_adapt(est, truth, rate);
  for (int k = 0; k < 4; ++k) {
    CHECK(est.h[k] == doctest::Approx(offset[k]).epsilon(0.05));
  }

  // Second interval: the adapted field now tracks the truth closely.
  for (int i = 0; i < 10; ++i) {
    truth = integrate_step(truth, truth_fn, dt, 8).state;
    est.xbar = integrate_step(est.xbar, est_fn, dt, 8).state;
  }
  const Vec4 e2 = measure_error(truth, est);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(e2[k]) < 5e-3);
}

TEST_CASE("non-finite estimate is rejected") {
  HdvEstimate est;
  est.xbar = {0.0, 0.0, 0.0, std::nan("")};
  CHECK_THROWS_AS(estimate_derivative(est, kPar), std::invalid_argument);
}
