#include "edsr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edsr {

const char* to_string(VehicleId id) {
  switch (id) {
    case VehicleId::A: return "A";
    case VehicleId::B: return "B";
    case VehicleId::H: return "H";
    case VehicleId::U: return "U";
  }
  return "?";
}

namespace {

void require_finite(const VehicleState& s, const ControlInput& in,
                    const char* who) {
  if (!all_finite(s) || !std::isfinite(in.u) || !std::isfinite(in.phi)) {
    throw std::invalid_argument(std::string(who) +
                                ": non-finite state or input");
  }
}

}  // namespace

Vec4 cav_derivative(const VehicleState& s, const ControlInput& in,
                    const VehicleParams& p) {
  require_finite(s, in, "cav_derivative");
  if (p.wheelbase <= 0.0) {
    throw std::invalid_argument("cav_derivative: wheelbase must be positive");
  }
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  return {
      s.v * c - s.v * sn * in.phi,
      s.v * sn + s.v * c * in.phi,
      (s.v / p.wheelbase) * in.phi,
      in.u,
  };
}

Vec4 hdv_true_derivative(const VehicleState& s, const ControlInput& in,
                         const Vec4& disturbance, const VehicleParams& p) {
  if (!all_finite(disturbance)) {
    throw std::invalid_argument("hdv_true_derivative: non-finite disturbance");
  }
  Vec4 d = cav_derivative(s, in, p);
  for (int k = 0; k < 4; ++k) d[k] += disturbance[k];
  return d;
}

Vec4 slow_vehicle_derivative(const VehicleState& s) {
  if (!all_finite(s)) {
    throw std::invalid_argument("slow_vehicle_derivative: non-finite state");
  }
  return {s.v, 0.0, 0.0, 0.0};
}

double apply_attack(double u_commanded, double gamma) {
  return u_commanded + gamma;
}

ControlInput clamp_input(const ControlInput& in, const InputLimits& lim) {
  return {
      std::clamp(in.u, lim.u_min, lim.u_max),
      std::clamp(in.phi, lim.phi_min, lim.phi_max),
  };
}

IntegrationResult integrate_step(const VehicleState& s, const DerivativeFn& fn,
                                 double dt, int substeps, double speed_floor) {
  if (!(dt > 0.0) || substeps < 1) {
    throw std::invalid_argument("integrate_step: dt must be > 0, substeps >= 1");
  }
  const double h = dt / substeps;
  IntegrationResult out{s, false};
  for (int k = 0; k < substeps; ++k) {
    const Vec4 d = fn(out.state);
    out.state.x += h * d[kIdxX];
    out.state.y += h * d[kIdxY];
    out.state.theta += h * d[kIdxTheta];
    out.state.v += h * d[kIdxV];
    if (speed_floor > 0.0 && out.state.v < speed_floor) {
      out.state.v = speed_floor;
      out.speed_floor_hit = true;
    }
  }
  return out;
}

}  // namespace edsr
