#pragma once

#include <array>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "edsr/attack.hpp"
#include "edsr/constraints.hpp"
#include "edsr/estimator.hpp"
#include "edsr/qp.hpp"
#include "edsr/types.hpp"

namespace edsr {

enum class Mode { Edsr, Baseline, Nominal };
enum class InfeasibleFallback { HoldPrevious, Brake };

struct VehicleConfig {
  VehicleState initial;
  VehicleParams params;
};

struct TimeConfig {
  double t_s = 0.05;
  double t_f = 15.0;
  int substeps = 1;
};

struct TerminationConfig {
  double sigma = 0.3;        // lateral window around the target lane center
  double heading_tol = 0.05; // |theta_B| gate [rad]
};

// Random human-driver policy, resampled every sample and held constant
// within it. LaneKeeping (default) draws uniform noise and adds weak
// stabilizing feedback toward the HDV's initial lane and speed -- a driving
// human -- then clamps into the stated input ranges. Uniform draws the inputs
// i.i.d. over the full ranges; note that at highway speed this integrates
// into an unbounded heading random walk (sigma_y tens of meters within
// seconds), so it destroys any lane-bound scenario and exists for stress
// experiments only.
enum class HdvPolicy { LaneKeeping, Uniform };

struct HdvPolicyConfig {
  HdvPolicy policy = HdvPolicy::LaneKeeping;
  double accel_range = 1.7;
  double steer_range = 0.2 * std::numbers::pi;
  // Lane-keeping feedback: phi = -heading_gain*theta + lateral_gain*(y_ref-y)
  // + noise, u = speed_gain*(v_ref-v) + noise, clamped into the ranges above;
  // the references are the HDV's initial lane and speed.
  double heading_gain = 0.25;
  double lateral_gain = 0.008;
  double speed_gain = 0.4;
  double steer_noise = 0.005;  // uniform half-width (rad), lane-keeping only
  double accel_noise = 0.2;   // uniform half-width (m/s^2), lane-keeping only
  Vec4 disturbance{0.7, 0.5, 0.5, 0.7};
  HdvHeadingModel heading_model = HdvHeadingModel::SpeedOverWheelbase;
};

struct AttackConfig {
  double eta_bar = 10.0;
  double kappa_bar = 1.0;
  AttackParams cav_a;
  AttackParams cav_b;
};

struct CompensatorConfig {
  double alpha_gain = 2.0;
  double c_decay = 1.0;
  double rho_cap = 50.0;
  // Initial adaptive gain exponent. The compensation term acts as a relay of
  // amplitude exp(rho_hat); starting the exponent near log of the expected
  // injection magnitude lets the compensator bite immediately instead of
  // spending the critical early maneuver window ramping up from amplitude 1.
  double rho0 = 2.33;
  // Adaptation deadzone [m/s]: the gain rho_hat only grows while the speed
  // deviation exceeds this band. Without it the sampled compensator's own
  // switching ripple (amplitude ~ exp(rho_hat) * dt) keeps feeding the
  // nondecreasing adaptation law until the gain saturates, turning the
  // compensator into a full-authority relay. The band lets the gain settle
  // near the magnitude of the injection it actually has to cancel. The
  // compensation term itself always sees the raw deviation.
  double deadzone = 0.35;
};

struct QpConfig {
  QpWeights weights;
  double tolerance = 1e-8;
  int max_iterations = 200;
  InfeasibleFallback fallback = InfeasibleFallback::HoldPrevious;
};

struct CbfConfig {
  double classk_pair = 1.0;
  double classk_lateral = 1.0;
  double classk_speed = 1.0;
  RobustMode robust_mode = RobustMode::Corners;
};

struct ScenarioConfig {
  VehicleConfig veh_a, veh_b, veh_h, veh_u;
  double lane_width = 4.0;
  double v_desired = 30.0;
  TimeConfig time;
  TerminationConfig termination;
  InputLimits limits;
  HdvPolicyConfig hdv;
  UncertaintyBounds uncertainty;
  QpConfig qp;
  // Exponential decay demanded of the tracking certificates. The lateral
  // (lane-convergence) rows use c3; the speed rows use c_speed. A stiffer
  // speed gain keeps the yield phase shallow: the ego slows only as much as
  // the pair barriers genuinely require instead of trading speed away to buy
  // steering headroom.
  double clf_c3 = 2.0;
  double clf_c_speed = 1.0;
  CbfConfig cbf;
  AttackConfig attacks;
  CompensatorConfig compensator;
  Mode mode = Mode::Edsr;
  bool saturate_corrupted_input = false;
  // Weights of the underlying maneuver cost (acceleration effort, lane
  // deviation, speed deviation). Documentation-only: the pointwise controller
  // encodes them through the CLF/QP weights above.
  std::array<double, 3> objective_weights{1.0, 1.0, 1.0};
};

// The shipped lane-change scenario with every default.
ScenarioConfig default_config();

nlohmann::json to_json(const ScenarioConfig& cfg);

// Strict parse: unknown or missing keys, type mismatches and semantic
// violations are all collected and reported in one itemized diagnostic.
ScenarioConfig config_from_json(const nlohmann::json& j);

// Semantic checks only (envelope positivity, attack bounds, weight
// positivity, ...). Throws std::runtime_error with itemized diagnostics.
void validate_config(const ScenarioConfig& cfg);

ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& cfg, const std::string& path);

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

}  // namespace edsr
