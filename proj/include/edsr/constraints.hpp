#pragma once

#include <string>
#include <vector>

#include "edsr/estimator.hpp"
#include "edsr/types.hpp"

namespace edsr {

// Barriers b(x) >= 0 kept forward-invariant by the controller:
//  - PairEllipsoid: speed-scaled ellipsoidal separation between the ego CAV
//    and another vehicle,
//      b = (x_j - x_i)^2 / (a_i v_i)^2 + (y_j - y_i)^2 / (b_i v_i)^2 - 1
//  - LateralLower / LateralUpper: road edges y_i + l/2 and 3l/2 - y_i
//  - SpeedLower / SpeedUpper: v_i - v_min and v_max - v_i
enum class BarrierKind {
  PairEllipsoid,
  LateralLower,
  LateralUpper,
  SpeedLower,
  SpeedUpper,
};

struct BarrierSpec {
  BarrierKind kind = BarrierKind::SpeedLower;
  VehicleId ego = VehicleId::B;    // must be a CAV; its inputs enter the row
  VehicleId other = VehicleId::U;  // pair barriers only
  double classk_gain = 1.0;        // slope of the linear class-K term k * b
};

// Scene snapshot at a control instant. `hdv` is the measured true HDV state
// (estimate plus measured error); `hdv_rate` is the rate vector the
// controller attributes to the HDV when differentiating pair barriers
// (estimator vector field plus measured error rate).
struct Scene {
  VehicleState cav_a, cav_b, hdv, slow;
  Vec4 hdv_rate{0.0, 0.0, 0.0, 0.0};
  VehicleParams par_a, par_b;
  InputLimits limits;
  double lane_width = 4.0;
  double v_desired = 30.0;
};

const VehicleState& state_of(const Scene& scene, VehicleId id);
VehicleState& state_of(Scene& scene, VehicleId id);
const VehicleParams& params_of(const Scene& scene, VehicleId id);

enum class RowSense { Ge, Le };

// Affine row over the fixed 8-var decision vector: coeffs . z (>=|<=) rhs.
struct ConstraintRow {
  std::array<double, kNumVars> coeffs{};
  double rhs = 0.0;
  RowSense sense = RowSense::Ge;
  std::string label;
  int corner = -1;  // corner index of a robustified row; -1 = nominal
};

struct BarrierGradient {
  Vec4 d_ego{0.0, 0.0, 0.0, 0.0};
  Vec4 d_other{0.0, 0.0, 0.0, 0.0};  // zero for single-vehicle barriers
};

double barrier_value(const BarrierSpec& spec, const Scene& scene);
BarrierGradient barrier_gradient(const BarrierSpec& spec, const Scene& scene);

// Nominal control-barrier row at the scene:
//   L_f b + L_g b . z + k b >= 0    rearranged to    coeffs . z >= rhs.
// Pair rows against the HDV use the estimator-provided hdv_rate for the
// drift, so with zero measured error they collapse to the estimator-only
// form evaluated at the event state.
ConstraintRow cbf_row(const BarrierSpec& spec, const Scene& scene);

// Inter-event uncertainty model: w bounds the HDV estimation error, nu its
// rate (trigger only), s_* bound each vehicle's state drift since the last
// event, s_est the drift of the estimate itself (trigger only).
struct UncertaintyBounds {
  Vec4 w{0.0, 0.0, 0.0, 0.0};
  Vec4 nu{0.0, 0.0, 0.0, 0.0};
  Vec4 s_a{0.0, 0.0, 0.0, 0.0};
  Vec4 s_b{0.0, 0.0, 0.0, 0.0};
  Vec4 s_u{0.0, 0.0, 0.0, 0.0};
  Vec4 s_est{0.0, 0.0, 0.0, 0.0};
};

enum class RobustMode { Corners, Collapsed };

// Robustified rows: one cbf_row per corner of the uncertainty hyperrectangle.
// Only the coordinates a barrier actually depends on are perturbed -- at most
// (x_i, y_i, v_i) of the ego by its drift bound and (x_j, y_j) of the other
// vehicle (w for the HDV, its drift bound otherwise) -- capping a pair
// constraint at 2^5 = 32 rows. Coordinates with a zero bound do not branch,
// so all-zero bounds return exactly the nominal row. Collapsed mode folds the
// corners into a single conservative row via interval arithmetic on the
// coefficients, using the actuator box to bound the coefficient spread.
std::vector<ConstraintRow> robust_cbf_rows(const BarrierSpec& spec,
                                           const Scene& scene,
                                           const UncertaintyBounds& bounds,
                                           RobustMode mode = RobustMode::Corners);

// Relaxed Lyapunov rows driving the maneuver, one per certificate:
//   1: CAV B speed tracking   (v_B - v_d)^2, longitudinal channel
//   2: CAV A speed tracking   (v_A - v_d)^2, longitudinal channel
//   3: CAV B lane tracking    (y_B - l)^2, lateral channel
//   4: CAV A lane tracking    (y_A - l)^2, lateral channel
// Longitudinal: 2 eps u_i + c3 V <= delta_j. Lateral: 2 d v sin(theta) +
// 2 d v cos(theta) phi_i + c3 V <= delta_j. The -1 coefficient on delta_j is
// folded into the row.
struct ClfSpec {
  int index = 1;
  double c3 = 1.0;
};

double clf_value(const ClfSpec& spec, const Scene& scene);
ConstraintRow clf_row(const ClfSpec& spec, const Scene& scene);

// All controller rows for one instant: robustified rows for every barrier,
// then the relaxed CLF rows, in deterministic order.
std::vector<ConstraintRow> build_constraint_rows(
    const std::vector<BarrierSpec>& barriers, const std::vector<ClfSpec>& clfs,
    const Scene& scene, const UncertaintyBounds& bounds, RobustMode mode);

// The scenario's standing barrier set: six ordered ellipsoid pairs (A-B, A-H,
// A-U, B-A, B-H, B-U) plus lane edges and speed envelope for each CAV.
std::vector<BarrierSpec> scenario_barriers(double classk_pair,
                                           double classk_lateral,
                                           double classk_speed);

const char* barrier_label(const BarrierSpec& spec);

}  // namespace edsr
