#pragma once

namespace edsr {

// Adaptive compensation of the acceleration-channel injection. Runs at every
// sample (not event-driven): the speed tracking error drives a nondecreasing
// log-gain rho_hat, and the compensation term is subtracted from the nominal
// QP acceleration before actuation.
struct CompensatorState {
  double rho_hat = 0.0;
  bool cap_hit = false;
};

double speed_error(double v, double v_desired);

// gamma_hat = eps / (|eps| + exp(-c t^2)) * exp(rho_hat).
// The first factor is a smooth sign of eps whose dead-zone width shrinks with
// time; |gamma_hat| < exp(rho_hat) always.
double compensation(double eps, double rho_hat, double t, double c_decay);

// Forward-Euler adaptation rho_hat' = alpha * |eps|; nondecreasing, clamped at
// rho_cap (exp of the cap still fits comfortably in a double). cap_hit is
// latched when the clamp engages so the run can report the anomaly.
double adapt_step(double rho_hat, double eps, double alpha_gain, double dt,
                  double rho_cap, bool* cap_hit);

// Commanded acceleration after compensation: u = u_nominal - gamma_hat.
double resilient_input(double u_nominal, double gamma_hat);

}  // namespace edsr
