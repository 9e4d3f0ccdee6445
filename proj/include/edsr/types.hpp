#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace edsr {

// Planar kinematic state shared by every vehicle: longitudinal position x [m],
// lateral position y [m], heading theta [rad], forward speed v [m/s].
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
};

// CAV actuation: longitudinal acceleration u [m/s^2] and steering angle
// phi [rad].
struct ControlInput {
  double u = 0.0;
  double phi = 0.0;
};

// Actuator boxes and the speed envelope the controller must respect.
struct InputLimits {
  double u_min = -7.0;
  double u_max = 3.3;
  double phi_min = -std::numbers::pi / 4.0;
  double phi_max = std::numbers::pi / 4.0;
  double v_min = 15.0;
  double v_max = 35.0;
};

// Geometry of one vehicle: wheelbase L_w plus the speed-scaled ellipsoid
// semi-axis factors (a*v longitudinal, b*v lateral) used by pair barriers.
struct VehicleParams {
  double wheelbase = 2.7;
  double safety_a = 0.6;
  double safety_b = 0.1;
};

// Generic 4-vector indexed like a state: (x, y, theta, v).
using Vec4 = std::array<double, 4>;

inline constexpr int kIdxX = 0;
inline constexpr int kIdxY = 1;
inline constexpr int kIdxTheta = 2;
inline constexpr int kIdxV = 3;

enum class VehicleId { A, B, H, U };

const char* to_string(VehicleId id);

inline Vec4 to_vec(const VehicleState& s) { return {s.x, s.y, s.theta, s.v}; }

inline VehicleState from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

inline bool all_finite(const Vec4& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]) &&
         std::isfinite(v[3]);
}

inline bool all_finite(const VehicleState& s) { return all_finite(to_vec(s)); }

// Decision vector of the controller QP, fixed layout:
//   [u_A, phi_A, u_B, phi_B, delta_1, delta_2, delta_3, delta_4]
inline constexpr int kNumVars = 8;
inline constexpr int kVarUA = 0;
inline constexpr int kVarPhiA = 1;
inline constexpr int kVarUB = 2;
inline constexpr int kVarPhiB = 3;
inline constexpr int kVarDelta1 = 4;
inline constexpr int kVarDelta2 = 5;
inline constexpr int kVarDelta3 = 6;
inline constexpr int kVarDelta4 = 7;

}  // namespace edsr
