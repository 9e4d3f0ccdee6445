#include "edsr/resilient.hpp"

#include <cmath>
#include <stdexcept>

namespace edsr {

double speed_error(double v, double v_desired) { return v - v_desired; }

double compensation(double eps, double rho_hat, double t, double c_decay) {
  if (!std::isfinite(eps) || !std::isfinite(rho_hat)) {
    throw std::invalid_argument("compensation: non-finite argument");
  }
  const double dead_zone = std::exp(-c_decay * t * t);
  return eps / (std::abs(eps) + dead_zone) * std::exp(rho_hat);
}

double adapt_step(double rho_hat, double eps, double alpha_gain, double dt,
                  double rho_cap, bool* cap_hit) {
  if (!(dt > 0.0) || alpha_gain < 0.0) {
    throw std::invalid_argument("adapt_step: need dt > 0 and alpha >= 0");
  }
  double next = rho_hat + alpha_gain * std::abs(eps) * dt;
  if (next > rho_cap) {
    next = rho_cap;
    if (cap_hit != nullptr) *cap_hit = true;
  }
  return next;
}

double resilient_input(double u_nominal, double gamma_hat) {
  return u_nominal - gamma_hat;
}

}  // namespace edsr
