#pragma once

#include <functional>

#include "edsr/types.hpp"

namespace edsr {

// Right-hand side of the CAV kinematic model, affine in the input:
//   xdot     = v cos(theta) - v sin(theta) * phi
//   ydot     = v sin(theta) + v cos(theta) * phi
//   thetadot = (v / L_w) * phi
//   vdot     = u
// Throws std::invalid_argument on non-finite state or input.
Vec4 cav_derivative(const VehicleState& s, const ControlInput& in,
                    const VehicleParams& p);

// True human-driven-vehicle motion: the same model driven by the human's
// (u_H, phi_H) plus an additive process disturbance on each channel.
Vec4 hdv_true_derivative(const VehicleState& s, const ControlInput& in,
                         const Vec4& disturbance, const VehicleParams& p);

// Uncontrolled slow vehicle: constant forward speed, frozen lane and heading.
Vec4 slow_vehicle_derivative(const VehicleState& s);

// Acceleration-channel corruption. Deliberately not saturated: the injection
// acts downstream of the actuator limiter, so clamp the command first and add
// the signal afterwards.
double apply_attack(double u_commanded, double gamma);

// Componentwise projection of the commanded input onto the actuator box.
ControlInput clamp_input(const ControlInput& in, const InputLimits& lim);

using DerivativeFn = std::function<Vec4(const VehicleState&)>;

struct IntegrationResult {
  VehicleState state;
  bool speed_floor_hit = false;
};

// Forward Euler over `substeps` equal sub-intervals with zero-order-held
// inputs (the derivative function closes over them). If speed_floor > 0 the
// speed is clamped from below after every substep; a clamp is reported so the
// caller can flag the anomaly. The floor keeps the speed-scaled ellipsoid
// barriers well defined when an attacked run diverges.
IntegrationResult integrate_step(const VehicleState& s, const DerivativeFn& fn,
                                 double dt, int substeps,
                                 double speed_floor = 0.0);

}  // namespace edsr
