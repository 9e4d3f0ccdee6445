#include "edsr/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edsr {

const VehicleState& state_of(const Scene& scene, VehicleId id) {
  switch (id) {
    case VehicleId::A: return scene.cav_a;
    case VehicleId::B: return scene.cav_b;
    case VehicleId::H: return scene.hdv;
    case VehicleId::U: return scene.slow;
  }
  throw std::invalid_argument("state_of: bad vehicle id");
}

VehicleState& state_of(Scene& scene, VehicleId id) {
  return const_cast<VehicleState&>(
      state_of(static_cast<const Scene&>(scene), id));
}

const VehicleParams& params_of(const Scene& scene, VehicleId id) {
  switch (id) {
    case VehicleId::A: return scene.par_a;
    case VehicleId::B: return scene.par_b;
    default:
      throw std::invalid_argument("params_of: only CAVs carry control params");
  }
}

namespace {

bool is_cav(VehicleId id) { return id == VehicleId::A || id == VehicleId::B; }

void validate_spec(const BarrierSpec& spec) {
  if (!is_cav(spec.ego)) {
    throw std::invalid_argument("barrier ego must be a CAV");
  }
  if (spec.kind == BarrierKind::PairEllipsoid && spec.other == spec.ego) {
    throw std::invalid_argument("pair barrier needs two distinct vehicles");
  }
}

// Input-coefficient slots of a CAV in the decision vector.
int u_var_of(VehicleId id) { return id == VehicleId::A ? kVarUA : kVarUB; }
int phi_var_of(VehicleId id) { return id == VehicleId::A ? kVarPhiA : kVarPhiB; }

}  // namespace

double barrier_value(const BarrierSpec& spec, const Scene& scene) {
  validate_spec(spec);
  const VehicleState& ego = state_of(scene, spec.ego);
  switch (spec.kind) {
    case BarrierKind::PairEllipsoid: {
      const VehicleState& other = state_of(scene, spec.other);
      const VehicleParams& par = params_of(scene, spec.ego);
      const double ax = par.safety_a * ego.v;
      const double by = par.safety_b * ego.v;
      if (ax == 0.0 || by == 0.0) {
        throw std::invalid_argument(
            "pair barrier undefined at zero ego speed");
      }
      const double dx = other.x - ego.x;
      const double dy = other.y - ego.y;
      return dx * dx / (ax * ax) + dy * dy / (by * by) - 1.0;
    }
    case BarrierKind::LateralLower: return ego.y + scene.lane_width / 2.0;
    case BarrierKind::LateralUpper:
      return 1.5 * scene.lane_width - ego.y;
    case BarrierKind::SpeedLower: return ego.v - scene.limits.v_min;
    case BarrierKind::SpeedUpper: return scene.limits.v_max - ego.v;
  }
  throw std::invalid_argument("barrier_value: bad kind");
}

BarrierGradient barrier_gradient(const BarrierSpec& spec, const Scene& scene) {
  validate_spec(spec);
  BarrierGradient g;
  const VehicleState& ego = state_of(scene, spec.ego);
  switch (spec.kind) {
    case BarrierKind::PairEllipsoid: {
      const VehicleState& other = state_of(scene, spec.other);
      const VehicleParams& par = params_of(scene, spec.ego);
      const double a2 = par.safety_a * par.safety_a;
      const double b2 = par.safety_b * par.safety_b;
      const double v2 = ego.v * ego.v;
      const double v3 = v2 * ego.v;
      if (v2 == 0.0) {
        throw std::invalid_argument(
            "pair barrier gradient undefined at zero ego speed");
      }
      const double dx = other.x - ego.x;
      const double dy = other.y - ego.y;
      g.d_ego[kIdxX] = -2.0 * dx / (a2 * v2);
      g.d_ego[kIdxY] = -2.0 * dy / (b2 * v2);
      g.d_ego[kIdxV] = -2.0 * (dx * dx / (a2 * v3) + dy * dy / (b2 * v3));
      g.d_other[kIdxX] = 2.0 * dx / (a2 * v2);
      g.d_other[kIdxY] = 2.0 * dy / (b2 * v2);
      break;
    }
    case BarrierKind::LateralLower: g.d_ego[kIdxY] = 1.0; break;
    case BarrierKind::LateralUpper: g.d_ego[kIdxY] = -1.0; break;
    case BarrierKind::SpeedLower: g.d_ego[kIdxV] = 1.0; break;
    case BarrierKind::SpeedUpper: g.d_ego[kIdxV] = -1.0; break;
  }
  return g;
}

ConstraintRow cbf_row(const BarrierSpec& spec, const Scene& scene) {
  const double b = barrier_value(spec, scene);
  const BarrierGradient g = barrier_gradient(spec, scene);

  ConstraintRow row;
  row.sense = RowSense::Ge;
  row.label = barrier_label(spec);

  double drift = 0.0;

  // Ego CAV: drift through f, input coefficients through the two columns of g
  // (acceleration feeds vdot, steering feeds xdot/ydot/thetadot).
  {
    const VehicleState& ego = state_of(scene, spec.ego);
    const VehicleParams& par = params_of(scene, spec.ego);
    const double c = std::cos(ego.theta);
    const double sn = std::sin(ego.theta);
    drift += g.d_ego[kIdxX] * ego.v * c + g.d_ego[kIdxY] * ego.v * sn;
    row.coeffs[u_var_of(spec.ego)] += g.d_ego[kIdxV];
    row.coeffs[phi_var_of(spec.ego)] +=
        -g.d_ego[kIdxX] * ego.v * sn + g.d_ego[kIdxY] * ego.v * c +
        g.d_ego[kIdxTheta] * ego.v / par.wheelbase;
  }

  if (spec.kind == BarrierKind::PairEllipsoid) {
    if (is_cav(spec.other)) {
      const VehicleState& oth = state_of(scene, spec.other);
      const VehicleParams& par = params_of(scene, spec.other);
      const double c = std::cos(oth.theta);
      const double sn = std::sin(oth.theta);
      drift += g.d_other[kIdxX] * oth.v * c + g.d_other[kIdxY] * oth.v * sn;
      row.coeffs[u_var_of(spec.other)] += g.d_other[kIdxV];
      row.coeffs[phi_var_of(spec.other)] +=
          -g.d_other[kIdxX] * oth.v * sn + g.d_other[kIdxY] * oth.v * c +
          g.d_other[kIdxTheta] * oth.v / par.wheelbase;
    } else if (spec.other == VehicleId::U) {
      drift += g.d_other[kIdxX] * scene.slow.v;
    } else {
      // HDV: the controller only knows the estimator rate plus the measured
      // error rate, both folded into hdv_rate by the caller.
      for (int k = 0; k < 4; ++k) drift += g.d_other[k] * scene.hdv_rate[k];
    }
  }

  row.rhs = -(drift + spec.classk_gain * b);
  return row;
}

namespace {

struct Axis {
  VehicleId vehicle;
  int idx;
  double halfwidth;
};

// Perturbation axes of a barrier: only the coordinates its row actually
// depends on, each with that vehicle's drift bound (w for the HDV).
std::vector<Axis> perturbation_axes(const BarrierSpec& spec,
                                    const UncertaintyBounds& bounds) {
  const auto drift_of = [&bounds](VehicleId id) -> const Vec4& {
    switch (id) {
      case VehicleId::A: return bounds.s_a;
      case VehicleId::B: return bounds.s_b;
      case VehicleId::H: return bounds.w;
      case VehicleId::U: return bounds.s_u;
    }
    throw std::invalid_argument("perturbation_axes: bad vehicle id");
  };
  const Vec4& ego_s = drift_of(spec.ego);
  std::vector<Axis> axes;
  switch (spec.kind) {
    case BarrierKind::PairEllipsoid: {
      const Vec4& oth_s = drift_of(spec.other);
      axes = {{spec.ego, kIdxX, ego_s[kIdxX]},
              {spec.ego, kIdxY, ego_s[kIdxY]},
              {spec.ego, kIdxV, ego_s[kIdxV]},
              {spec.other, kIdxX, oth_s[kIdxX]},
              {spec.other, kIdxY, oth_s[kIdxY]}};
      break;
    }
    case BarrierKind::LateralLower:
    case BarrierKind::LateralUpper:
      axes = {{spec.ego, kIdxY, ego_s[kIdxY]}};
      break;
    case BarrierKind::SpeedLower:
    case BarrierKind::SpeedUpper:
      axes = {{spec.ego, kIdxV, ego_s[kIdxV]}};
      break;
  }
  std::erase_if(axes, [](const Axis& a) { return a.halfwidth == 0.0; });
  return axes;
}

void apply_shift(Scene& scene, const Axis& axis, double direction) {
  VehicleState& st = state_of(scene, axis.vehicle);
  const double shift = direction * axis.halfwidth;
  switch (axis.idx) {
    case kIdxX: st.x += shift; break;
    case kIdxY: st.y += shift; break;
    case kIdxTheta: st.theta += shift; break;
    case kIdxV: st.v += shift; break;
  }
}

std::vector<ConstraintRow> corner_rows(const BarrierSpec& spec,
                                       const Scene& scene,
                                       const UncertaintyBounds& bounds) {
  const std::vector<Axis> axes = perturbation_axes(spec, bounds);
  const int corners = 1 << axes.size();
  std::vector<ConstraintRow> rows;
  rows.reserve(corners);
  for (int mask = 0; mask < corners; ++mask) {
    Scene shifted = scene;
    for (size_t k = 0; k < axes.size(); ++k) {
      apply_shift(shifted, axes[k], (mask >> k) & 1 ? 1.0 : -1.0);
    }
    ConstraintRow row = cbf_row(spec, shifted);
    row.corner = axes.empty() ? -1 : mask;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<ConstraintRow> robust_cbf_rows(const BarrierSpec& spec,
                                           const Scene& scene,
                                           const UncertaintyBounds& bounds,
                                           RobustMode mode) {
  std::vector<ConstraintRow> rows = corner_rows(spec, scene, bounds);
  if (mode == RobustMode::Corners || rows.size() == 1) return rows;

  // Collapsed: one row that implies every corner row for any input inside the
  // actuator box. Midpoint coefficients plus a slack covering the coefficient
  // spread times the largest admissible |input|.
  ConstraintRow out = rows.front();
  out.corner = -1;
  double worst_rhs = rows.front().rhs;
  std::array<double, kNumVars> lo = rows.front().coeffs;
  std::array<double, kNumVars> hi = rows.front().coeffs;
  for (const ConstraintRow& r : rows) {
    worst_rhs = std::max(worst_rhs, r.rhs);
    for (int k = 0; k < kNumVars; ++k) {
      lo[k] = std::min(lo[k], r.coeffs[k]);
      hi[k] = std::max(hi[k], r.coeffs[k]);
    }
  }
  const std::array<double, kNumVars> input_mag = {
      std::max(std::abs(scene.limits.u_min), std::abs(scene.limits.u_max)),
      std::max(std::abs(scene.limits.phi_min), std::abs(scene.limits.phi_max)),
      std::max(std::abs(scene.limits.u_min), std::abs(scene.limits.u_max)),
      std::max(std::abs(scene.limits.phi_min), std::abs(scene.limits.phi_max)),
      0.0, 0.0, 0.0, 0.0};
  double slack = 0.0;
  for (int k = 0; k < kNumVars; ++k) {
    out.coeffs[k] = 0.5 * (lo[k] + hi[k]);
    slack += 0.5 * (hi[k] - lo[k]) * input_mag[k];
  }
  out.rhs = worst_rhs + slack;
  return {out};
}

double clf_value(const ClfSpec& spec, const Scene& scene) {
  switch (spec.index) {
    case 1: {
      const double e = scene.cav_b.v - scene.v_desired;
      return e * e;
    }
    case 2: {
      const double e = scene.cav_a.v - scene.v_desired;
      return e * e;
    }
    case 3: {
      const double d = scene.cav_b.y - scene.lane_width;
      return d * d;
    }
    case 4: {
      const double d = scene.cav_a.y - scene.lane_width;
      return d * d;
    }
  }
  throw std::invalid_argument("clf index must be 1..4");
}

ConstraintRow clf_row(const ClfSpec& spec, const Scene& scene) {
  const double value = clf_value(spec, scene);
  ConstraintRow row;
  row.sense = RowSense::Le;
  row.label = "clf_" + std::to_string(spec.index);
  row.coeffs[kVarDelta1 + (spec.index - 1)] = -1.0;
  switch (spec.index) {
    case 1:
      row.coeffs[kVarUB] = 2.0 * (scene.cav_b.v - scene.v_desired);
      row.rhs = -spec.c3 * value;
      break;
    case 2:
      row.coeffs[kVarUA] = 2.0 * (scene.cav_a.v - scene.v_desired);
      row.rhs = -spec.c3 * value;
      break;
    case 3: {
      const VehicleState& st = scene.cav_b;
      const double d = st.y - scene.lane_width;
      row.coeffs[kVarPhiB] = 2.0 * d * st.v * std::cos(st.theta);
      row.rhs = -spec.c3 * value - 2.0 * d * st.v * std::sin(st.theta);
      break;
    }
    case 4: {
      const VehicleState& st = scene.cav_a;
      const double d = st.y - scene.lane_width;
      row.coeffs[kVarPhiA] = 2.0 * d * st.v * std::cos(st.theta);
      row.rhs = -spec.c3 * value - 2.0 * d * st.v * std::sin(st.theta);
      break;
    }
    default:
      throw std::invalid_argument("clf index must be 1..4");
  }
  return row;
}

std::vector<ConstraintRow> build_constraint_rows(
    const std::vector<BarrierSpec>& barriers, const std::vector<ClfSpec>& clfs,
    const Scene& scene, const UncertaintyBounds& bounds, RobustMode mode) {
  std::vector<ConstraintRow> rows;
  for (const BarrierSpec& spec : barriers) {
    std::vector<ConstraintRow> r = robust_cbf_rows(spec, scene, bounds, mode);
    rows.insert(rows.end(), std::make_move_iterator(r.begin()),
                std::make_move_iterator(r.end()));
  }
  for (const ClfSpec& spec : clfs) rows.push_back(clf_row(spec, scene));
  return rows;
}

std::vector<BarrierSpec> scenario_barriers(double classk_pair,
                                           double classk_lateral,
                                           double classk_speed) {
  using K = BarrierKind;
  using V = VehicleId;
  std::vector<BarrierSpec> specs;
  const std::array<std::pair<V, V>, 6> pairs = {{{V::A, V::B},
                                                 {V::A, V::H},
                                                 {V::A, V::U},
                                                 {V::B, V::A},
                                                 {V::B, V::H},
                                                 {V::B, V::U}}};
  for (auto [ego, other] : pairs) {
    specs.push_back({K::PairEllipsoid, ego, other, classk_pair});
  }
  for (V ego : {V::A, V::B}) {
    specs.push_back({K::LateralLower, ego, ego, classk_lateral});
    specs.push_back({K::LateralUpper, ego, ego, classk_lateral});
    specs.push_back({K::SpeedLower, ego, ego, classk_speed});
    specs.push_back({K::SpeedUpper, ego, ego, classk_speed});
  }
  return specs;
}

const char* barrier_label(const BarrierSpec& spec) {
  const bool ego_a = spec.ego == VehicleId::A;
  switch (spec.kind) {
    case BarrierKind::PairEllipsoid:
      switch (spec.other) {
        case VehicleId::A: return "b_BA";
        case VehicleId::B: return "b_AB";
        case VehicleId::H: return ego_a ? "b_AH" : "b_BH";
        case VehicleId::U: return ego_a ? "b_AU" : "b_BU";
      }
      break;
    case BarrierKind::LateralLower: return ego_a ? "b_ylo_A" : "b_ylo_B";
    case BarrierKind::LateralUpper: return ego_a ? "b_yhi_A" : "b_yhi_B";
    case BarrierKind::SpeedLower: return ego_a ? "b_vlo_A" : "b_vlo_B";
    case BarrierKind::SpeedUpper: return ego_a ? "b_vhi_A" : "b_vhi_B";
  }
  return "b";
}

}  // namespace edsr
