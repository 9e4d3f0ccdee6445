#include "edsr/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace edsr {

using nlohmann::json;

namespace {

// Collects every structural and semantic problem so a bad config is reported
// in one pass instead of failing on the first key.
struct Diagnostics {
  std::vector<std::string> issues;

  void add(const std::string& msg) { issues.push_back(msg); }

  void check_keys(const json& obj, const std::string& path,
                  const std::vector<std::string>& expected) {
    if (!obj.is_object()) {
      add(path + ": expected an object");
      return;
    }
    for (const std::string& key : expected) {
      if (!obj.contains(key)) add(path + ": missing key '" + key + "'");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const std::string& key : expected) {
        if (it.key() == key) { known = true; break; }
      }
      if (!known) add(path + ": unexpected key '" + it.key() + "'");
    }
  }

  double num(const json& obj, const std::string& path, const char* key,
             double fallback = 0.0) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      add(path + "." + key + ": expected a number");
      return fallback;
    }
    return v.get<double>();
  }

  int integer(const json& obj, const std::string& path, const char* key,
              int fallback = 0) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      add(path + "." + key + ": expected an integer");
      return fallback;
    }
    return v.get<int>();
  }

  bool boolean(const json& obj, const std::string& path, const char* key,
               bool fallback = false) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      add(path + "." + key + ": expected a boolean");
      return fallback;
    }
    return v.get<bool>();
  }

  std::string text(const json& obj, const std::string& path, const char* key,
                   const std::string& fallback = "") {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      add(path + "." + key + ": expected a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  Vec4 vec4(const json& obj, const std::string& path, const char* key) {
    Vec4 out{0.0, 0.0, 0.0, 0.0};
    if (!obj.is_object() || !obj.contains(key)) return out;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 4) {
      add(path + "." + key + ": expected an array of 4 numbers");
      return out;
    }
    for (int k = 0; k < 4; ++k) {
      if (!v[k].is_number()) {
        add(path + "." + key + ": expected an array of 4 numbers");
        return out;
      }
      out[k] = v[k].get<double>();
    }
    return out;
  }

  void throw_if_any(const std::string& what) const {
    if (issues.empty()) return;
    std::ostringstream os;
    os << what << ":";
    for (const std::string& s : issues) os << "\n  - " << s;
    throw std::runtime_error(os.str());
  }
};

json vehicle_to_json(const VehicleConfig& v, bool with_params) {
  json j;
  j["initial"] = {v.initial.x, v.initial.y, v.initial.theta, v.initial.v};
  if (with_params) {
    j["wheelbase"] = v.params.wheelbase;
    j["safety_a"] = v.params.safety_a;
    j["safety_b"] = v.params.safety_b;
  }
  return j;
}

VehicleConfig vehicle_from_json(const json& j, const std::string& path,
                                bool with_params, Diagnostics& diag) {
  VehicleConfig out;
  if (with_params) {
    diag.check_keys(j, path, {"initial", "wheelbase", "safety_a", "safety_b"});
  } else {
    diag.check_keys(j, path, {"initial"});
  }
  const Vec4 init = diag.vec4(j, path, "initial");
  out.initial = from_vec(init);
  if (with_params) {
    out.params.wheelbase = diag.num(j, path, "wheelbase", 2.7);
    out.params.safety_a = diag.num(j, path, "safety_a", 0.6);
    out.params.safety_b = diag.num(j, path, "safety_b", 0.1);
  }
  return out;
}

json attack_to_json(const AttackParams& p) {
  return json{{"eta", p.eta},
              {"kappa", p.kappa},
              {"carrier", to_string(p.carrier)},
              {"carrier_freq", p.carrier_freq},
              {"enabled", p.enabled},
              {"start_time", p.start_time}};
}

AttackParams attack_from_json(const json& j, const std::string& path,
                              Diagnostics& diag) {
  AttackParams p;
  diag.check_keys(j, path,
                  {"eta", "kappa", "carrier", "carrier_freq", "enabled",
                   "start_time"});
  p.eta = diag.num(j, path, "eta");
  p.kappa = diag.num(j, path, "kappa");
  const std::string carrier = diag.text(j, path, "carrier", "none");
  try {
    p.carrier = carrier_from_string(carrier);
  } catch (const std::exception& e) {
    diag.add(path + ".carrier: " + e.what());
  }
  p.carrier_freq = diag.num(j, path, "carrier_freq");
  p.enabled = diag.boolean(j, path, "enabled");
  p.start_time = diag.num(j, path, "start_time");
  return p;
}

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig cfg;
  cfg.veh_a.initial = {50.0, 4.0, 0.0, 29.0};
  cfg.veh_b.initial = {20.0, 0.0, 0.0, 25.0};
  cfg.veh_h.initial = {10.0, 4.0, 0.0, 28.0};
  cfg.veh_u.initial = {60.0, 0.0, 0.0, 20.0};
  cfg.veh_a.params = {2.7, 0.6, 0.1};
  cfg.veh_b.params = {2.7, 0.6, 0.1};
  cfg.veh_h.params = {2.7, 0.6, 0.1};
  cfg.veh_u.params = {2.7, 0.6, 0.1};
  cfg.uncertainty.w = {0.2, 0.1, 0.1, 1.0};
  cfg.uncertainty.nu = {0.5, 0.2, 0.1, 1.0};
  cfg.uncertainty.s_a = {0.01, 0.005, 0.01, 1.0};
  cfg.uncertainty.s_b = {0.01, 0.005, 0.01, 1.0};
  cfg.uncertainty.s_u = {0.01, 0.005, 0.01, 1.0};
  cfg.uncertainty.s_est = {0.01, 0.005, 0.01, 1.0};
  cfg.attacks.cav_a = {2.0, 0.45, Carrier::Sin, 5.0, true, 0.0};
  cfg.attacks.cav_b = {5.0, 0.45, Carrier::Cos, 5.0, true, 0.0};
  return cfg;
}

json to_json(const ScenarioConfig& cfg) {
  json j;
  j["vehicles"] = {{"A", vehicle_to_json(cfg.veh_a, true)},
                   {"B", vehicle_to_json(cfg.veh_b, true)},
                   {"H", vehicle_to_json(cfg.veh_h, true)},
                   {"U", vehicle_to_json(cfg.veh_u, false)}};
  j["road"] = {{"lane_width", cfg.lane_width}};
  j["targets"] = {{"v_desired", cfg.v_desired}};
  j["time"] = {{"t_s", cfg.time.t_s},
               {"t_f", cfg.time.t_f},
               {"substeps", cfg.time.substeps}};
  j["termination"] = {{"sigma", cfg.termination.sigma},
                      {"heading_tol", cfg.termination.heading_tol}};
  j["limits"] = {{"u_min", cfg.limits.u_min},     {"u_max", cfg.limits.u_max},
                 {"phi_min", cfg.limits.phi_min}, {"phi_max", cfg.limits.phi_max},
                 {"v_min", cfg.limits.v_min},     {"v_max", cfg.limits.v_max}};
  j["hdv"] = {{"policy",
               cfg.hdv.policy == HdvPolicy::LaneKeeping ? "lane_keeping"
                                                        : "uniform"},
              {"accel_range", cfg.hdv.accel_range},
              {"steer_range", cfg.hdv.steer_range},
              {"heading_gain", cfg.hdv.heading_gain},
              {"lateral_gain", cfg.hdv.lateral_gain},
              {"speed_gain", cfg.hdv.speed_gain},
              {"steer_noise", cfg.hdv.steer_noise},
              {"accel_noise", cfg.hdv.accel_noise},
              {"disturbance", cfg.hdv.disturbance},
              {"heading_model",
               cfg.hdv.heading_model == HdvHeadingModel::SpeedOverWheelbase
                   ? "as_written"
                   : "zero_base"}};
  j["uncertainty"] = {{"w", cfg.uncertainty.w},   {"nu", cfg.uncertainty.nu},
                      {"s_A", cfg.uncertainty.s_a}, {"s_B", cfg.uncertainty.s_b},
                      {"s_U", cfg.uncertainty.s_u},
                      {"s_H", cfg.uncertainty.s_est}};
  j["qp"] = {{"accel_weight_A", cfg.qp.weights.accel_a},
             {"accel_weight_B", cfg.qp.weights.accel_b},
             {"steer_reg", cfg.qp.weights.steer_reg},
             {"relax_weights", cfg.qp.weights.relax},
             {"tolerance", cfg.qp.tolerance},
             {"max_iterations", cfg.qp.max_iterations},
             {"infeasible_fallback",
              cfg.qp.fallback == InfeasibleFallback::HoldPrevious ? "hold"
                                                                  : "brake"}};
  j["clf"] = {{"c3", cfg.clf_c3}, {"c_speed", cfg.clf_c_speed}};
  j["cbf"] = {{"classk_pair", cfg.cbf.classk_pair},
              {"classk_lateral", cfg.cbf.classk_lateral},
              {"classk_speed", cfg.cbf.classk_speed},
              {"robust_mode",
               cfg.cbf.robust_mode == RobustMode::Corners ? "corners"
                                                          : "collapsed"}};
  j["attacks"] = {{"eta_bar", cfg.attacks.eta_bar},
                  {"kappa_bar", cfg.attacks.kappa_bar},
                  {"A", attack_to_json(cfg.attacks.cav_a)},
                  {"B", attack_to_json(cfg.attacks.cav_b)}};
  j["compensator"] = {{"alpha_gain", cfg.compensator.alpha_gain},
                      {"c_decay", cfg.compensator.c_decay},
                      {"rho_cap", cfg.compensator.rho_cap},
                      {"rho0", cfg.compensator.rho0},
                      {"deadzone", cfg.compensator.deadzone}};
  j["mode"] = to_string(cfg.mode);
  j["saturate_corrupted_input"] = cfg.saturate_corrupted_input;
  j["objective_weights"] = cfg.objective_weights;
  return j;
}

ScenarioConfig config_from_json(const json& j) {
  Diagnostics diag;
  ScenarioConfig cfg;

  diag.check_keys(j, "config",
                  {"vehicles", "road", "targets", "time", "termination",
                   "limits", "hdv", "uncertainty", "qp", "clf", "cbf",
                   "attacks", "compensator", "mode",
                   "saturate_corrupted_input", "objective_weights"});

  if (j.contains("vehicles")) {
    const json& v = j.at("vehicles");
    diag.check_keys(v, "vehicles", {"A", "B", "H", "U"});
    if (v.contains("A")) cfg.veh_a = vehicle_from_json(v["A"], "vehicles.A", true, diag);
    if (v.contains("B")) cfg.veh_b = vehicle_from_json(v["B"], "vehicles.B", true, diag);
    if (v.contains("H")) cfg.veh_h = vehicle_from_json(v["H"], "vehicles.H", true, diag);
    if (v.contains("U")) cfg.veh_u = vehicle_from_json(v["U"], "vehicles.U", false, diag);
  }
  if (j.contains("road")) {
    diag.check_keys(j["road"], "road", {"lane_width"});
    cfg.lane_width = diag.num(j["road"], "road", "lane_width", 4.0);
  }
  if (j.contains("targets")) {
    diag.check_keys(j["targets"], "targets", {"v_desired"});
    cfg.v_desired = diag.num(j["targets"], "targets", "v_desired", 30.0);
  }
  if (j.contains("time")) {
    const json& t = j["time"];
    diag.check_keys(t, "time", {"t_s", "t_f", "substeps"});
    cfg.time.t_s = diag.num(t, "time", "t_s", 0.05);
    cfg.time.t_f = diag.num(t, "time", "t_f", 15.0);
    cfg.time.substeps = diag.integer(t, "time", "substeps", 1);
  }
  if (j.contains("termination")) {
    const json& t = j["termination"];
    diag.check_keys(t, "termination", {"sigma", "heading_tol"});
    cfg.termination.sigma = diag.num(t, "termination", "sigma", 0.3);
    cfg.termination.heading_tol = diag.num(t, "termination", "heading_tol", 0.05);
  }
  if (j.contains("limits")) {
    const json& l = j["limits"];
    diag.check_keys(l, "limits",
                    {"u_min", "u_max", "phi_min", "phi_max", "v_min", "v_max"});
    cfg.limits.u_min = diag.num(l, "limits", "u_min", -7.0);
    cfg.limits.u_max = diag.num(l, "limits", "u_max", 3.3);
    cfg.limits.phi_min = diag.num(l, "limits", "phi_min", -0.785);
    cfg.limits.phi_max = diag.num(l, "limits", "phi_max", 0.785);
    cfg.limits.v_min = diag.num(l, "limits", "v_min", 15.0);
    cfg.limits.v_max = diag.num(l, "limits", "v_max", 35.0);
  }
  if (j.contains("hdv")) {
    const json& h = j["hdv"];
    diag.check_keys(h, "hdv",
                    {"policy", "accel_range", "steer_range", "heading_gain",
                     "lateral_gain", "speed_gain", "steer_noise", "accel_noise",
                     "disturbance", "heading_model"});
    const std::string policy = diag.text(h, "hdv", "policy", "lane_keeping");
    if (policy == "lane_keeping") {
      cfg.hdv.policy = HdvPolicy::LaneKeeping;
    } else if (policy == "uniform") {
      cfg.hdv.policy = HdvPolicy::Uniform;
    } else {
      diag.add("hdv.policy: expected lane_keeping|uniform");
    }
    cfg.hdv.accel_range = diag.num(h, "hdv", "accel_range", 1.7);
    cfg.hdv.steer_range = diag.num(h, "hdv", "steer_range", 0.63);
    cfg.hdv.heading_gain = diag.num(h, "hdv", "heading_gain", 0.25);
    cfg.hdv.lateral_gain = diag.num(h, "hdv", "lateral_gain", 0.008);
    cfg.hdv.speed_gain = diag.num(h, "hdv", "speed_gain", 0.4);
    cfg.hdv.steer_noise = diag.num(h, "hdv", "steer_noise", 0.005);
    cfg.hdv.accel_noise = diag.num(h, "hdv", "accel_noise", 0.2);
    cfg.hdv.disturbance = diag.vec4(h, "hdv", "disturbance");
    const std::string model = diag.text(h, "hdv", "heading_model", "as_written");
    if (model == "as_written") {
      cfg.hdv.heading_model = HdvHeadingModel::SpeedOverWheelbase;
    } else if (model == "zero_base") {
      cfg.hdv.heading_model = HdvHeadingModel::Zero;
    } else {
      diag.add("hdv.heading_model: expected as_written|zero_base");
    }
  }
  if (j.contains("uncertainty")) {
    const json& u = j["uncertainty"];
    diag.check_keys(u, "uncertainty", {"w", "nu", "s_A", "s_B", "s_U", "s_H"});
    cfg.uncertainty.w = diag.vec4(u, "uncertainty", "w");
    cfg.uncertainty.nu = diag.vec4(u, "uncertainty", "nu");
    cfg.uncertainty.s_a = diag.vec4(u, "uncertainty", "s_A");
    cfg.uncertainty.s_b = diag.vec4(u, "uncertainty", "s_B");
    cfg.uncertainty.s_u = diag.vec4(u, "uncertainty", "s_U");
    cfg.uncertainty.s_est = diag.vec4(u, "uncertainty", "s_H");
  }
  if (j.contains("qp")) {
    const json& q = j["qp"];
    diag.check_keys(q, "qp",
                    {"accel_weight_A", "accel_weight_B", "steer_reg",
                     "relax_weights", "tolerance", "max_iterations",
                     "infeasible_fallback"});
    cfg.qp.weights.accel_a = diag.num(q, "qp", "accel_weight_A", 1.0);
    cfg.qp.weights.accel_b = diag.num(q, "qp", "accel_weight_B", 1.0);
    cfg.qp.weights.steer_reg = diag.num(q, "qp", "steer_reg", 0.01);
    const Vec4 relax = diag.vec4(q, "qp", "relax_weights");
    cfg.qp.weights.relax = {relax[0], relax[1], relax[2], relax[3]};
    cfg.qp.tolerance = diag.num(q, "qp", "tolerance", 1e-8);
    cfg.qp.max_iterations = diag.integer(q, "qp", "max_iterations", 200);
    const std::string fb = diag.text(q, "qp", "infeasible_fallback", "hold");
    if (fb == "hold") {
      cfg.qp.fallback = InfeasibleFallback::HoldPrevious;
    } else if (fb == "brake") {
      cfg.qp.fallback = InfeasibleFallback::Brake;
    } else {
      diag.add("qp.infeasible_fallback: expected hold|brake");
    }
  }
  if (j.contains("clf")) {
    diag.check_keys(j["clf"], "clf", {"c3", "c_speed"});
    cfg.clf_c3 = diag.num(j["clf"], "clf", "c3", 2.0);
    cfg.clf_c_speed = diag.num(j["clf"], "clf", "c_speed", 1.0);
  }
  if (j.contains("cbf")) {
    const json& c = j["cbf"];
    diag.check_keys(c, "cbf",
                    {"classk_pair", "classk_lateral", "classk_speed",
                     "robust_mode"});
    cfg.cbf.classk_pair = diag.num(c, "cbf", "classk_pair", 1.0);
    cfg.cbf.classk_lateral = diag.num(c, "cbf", "classk_lateral", 1.0);
    cfg.cbf.classk_speed = diag.num(c, "cbf", "classk_speed", 1.0);
    const std::string rm = diag.text(c, "cbf", "robust_mode", "corners");
    if (rm == "corners") {
      cfg.cbf.robust_mode = RobustMode::Corners;
    } else if (rm == "collapsed") {
      cfg.cbf.robust_mode = RobustMode::Collapsed;
    } else {
      diag.add("cbf.robust_mode: expected corners|collapsed");
    }
  }
  if (j.contains("attacks")) {
    const json& a = j["attacks"];
    diag.check_keys(a, "attacks", {"eta_bar", "kappa_bar", "A", "B"});
    cfg.attacks.eta_bar = diag.num(a, "attacks", "eta_bar", 10.0);
    cfg.attacks.kappa_bar = diag.num(a, "attacks", "kappa_bar", 1.0);
    if (a.contains("A")) cfg.attacks.cav_a = attack_from_json(a["A"], "attacks.A", diag);
    if (a.contains("B")) cfg.attacks.cav_b = attack_from_json(a["B"], "attacks.B", diag);
  }
  if (j.contains("compensator")) {
    const json& c = j["compensator"];
    diag.check_keys(c, "compensator",
                    {"alpha_gain", "c_decay", "rho_cap", "rho0", "deadzone"});
    cfg.compensator.alpha_gain = diag.num(c, "compensator", "alpha_gain", 2.0);
    cfg.compensator.c_decay = diag.num(c, "compensator", "c_decay", 1.0);
    cfg.compensator.rho_cap = diag.num(c, "compensator", "rho_cap", 50.0);
    cfg.compensator.rho0 = diag.num(c, "compensator", "rho0", 2.33);
    cfg.compensator.deadzone = diag.num(c, "compensator", "deadzone", 0.35);
  }
  if (j.contains("mode")) {
    try {
      cfg.mode = mode_from_string(diag.text(j, "config", "mode", "edsr"));
    } catch (const std::exception& e) {
      diag.add(std::string("mode: ") + e.what());
    }
  }
  cfg.saturate_corrupted_input =
      diag.boolean(j, "config", "saturate_corrupted_input", false);
  if (j.contains("objective_weights")) {
    const json& w = j["objective_weights"];
    if (!w.is_array() || w.size() != 3 || !w[0].is_number() ||
        !w[1].is_number() || !w[2].is_number()) {
      diag.add("objective_weights: expected an array of 3 numbers");
    } else {
      cfg.objective_weights = {w[0].get<double>(), w[1].get<double>(),
                               w[2].get<double>()};
    }
  }

  diag.throw_if_any("invalid config");
  validate_config(cfg);
  return cfg;
}

void validate_config(const ScenarioConfig& cfg) {
  Diagnostics diag;
  const auto finite = [&](double v, const char* what) {
    if (!std::isfinite(v)) diag.add(std::string(what) + ": must be finite");
  };

  for (const auto& [veh, name] :
       {std::pair{&cfg.veh_a, "A"}, {&cfg.veh_b, "B"}, {&cfg.veh_h, "H"},
        {&cfg.veh_u, "U"}}) {
    if (!all_finite(veh->initial)) {
      diag.add(std::string("vehicles.") + name + ".initial: must be finite");
    }
    if (veh->params.wheelbase <= 0.0) {
      diag.add(std::string("vehicles.") + name + ".wheelbase: must be > 0");
    }
  }
  for (const auto& [veh, name] :
       {std::pair{&cfg.veh_a, "A"}, {&cfg.veh_b, "B"}}) {
    if (veh->params.safety_a <= 0.0 || veh->params.safety_b <= 0.0) {
      diag.add(std::string("vehicles.") + name +
               ": safety_a and safety_b must be > 0");
    }
    if (veh->initial.v < cfg.limits.v_min || veh->initial.v > cfg.limits.v_max) {
      diag.add(std::string("vehicles.") + name +
               ".initial: speed outside [v_min, v_max]");
    }
  }

  if (!(cfg.lane_width > 0.0)) diag.add("road.lane_width: must be > 0");
  finite(cfg.v_desired, "targets.v_desired");
  if (!(cfg.time.t_s > 0.0)) diag.add("time.t_s: must be > 0");
  if (!(cfg.time.t_f > cfg.time.t_s)) diag.add("time.t_f: must exceed t_s");
  if (cfg.time.substeps < 1) diag.add("time.substeps: must be >= 1");
  if (!(cfg.termination.sigma > 0.0)) diag.add("termination.sigma: must be > 0");
  if (!(cfg.termination.heading_tol > 0.0)) {
    diag.add("termination.heading_tol: must be > 0");
  }
  if (!(cfg.limits.u_min < cfg.limits.u_max)) {
    diag.add("limits: u_min must be < u_max");
  }
  if (!(cfg.limits.phi_min < cfg.limits.phi_max)) {
    diag.add("limits: phi_min must be < phi_max");
  }
  if (!(cfg.limits.v_min > 0.0)) {
    diag.add("limits.v_min: must be > 0 (speed-scaled barriers degenerate)");
  }
  if (!(cfg.limits.v_min < cfg.limits.v_max)) {
    diag.add("limits: v_min must be < v_max");
  }
  if (cfg.hdv.accel_range < 0.0 || cfg.hdv.steer_range < 0.0) {
    diag.add("hdv: input ranges must be >= 0");
  }
  if (cfg.hdv.steer_noise < 0.0 || cfg.hdv.accel_noise < 0.0) {
    diag.add("hdv: noise half-widths must be >= 0");
  }
  if (cfg.hdv.heading_gain < 0.0 || cfg.hdv.lateral_gain < 0.0 ||
      cfg.hdv.speed_gain < 0.0) {
    diag.add("hdv: lane-keeping gains must be >= 0");
  }
  for (double d : cfg.hdv.disturbance) {
    if (d < 0.0 || !std::isfinite(d)) {
      diag.add("hdv.disturbance: entries must be finite and >= 0");
      break;
    }
  }
  for (const auto& [vec, name] :
       {std::pair{&cfg.uncertainty.w, "w"}, {&cfg.uncertainty.nu, "nu"},
        {&cfg.uncertainty.s_a, "s_A"}, {&cfg.uncertainty.s_b, "s_B"},
        {&cfg.uncertainty.s_u, "s_U"}, {&cfg.uncertainty.s_est, "s_H"}}) {
    for (double v : *vec) {
      if (v < 0.0) {
        diag.add(std::string("uncertainty.") + name + ": entries must be >= 0");
        break;
      }
    }
  }
  if (cfg.qp.weights.accel_a <= 0.0 || cfg.qp.weights.accel_b <= 0.0 ||
      cfg.qp.weights.steer_reg <= 0.0) {
    diag.add("qp: accel weights and steer_reg must be > 0 (strict convexity)");
  }
  for (double pw : cfg.qp.weights.relax) {
    if (pw <= 0.0) {
      diag.add("qp.relax_weights: must be > 0 (strict convexity)");
      break;
    }
  }
  if (!(cfg.qp.tolerance > 0.0)) diag.add("qp.tolerance: must be > 0");
  if (cfg.qp.max_iterations < 1) diag.add("qp.max_iterations: must be >= 1");
  if (!(cfg.clf_c3 > 0.0)) diag.add("clf.c3: must be > 0");
  if (!(cfg.clf_c_speed > 0.0)) diag.add("clf.c_speed: must be > 0");
  if (cfg.cbf.classk_pair <= 0.0 || cfg.cbf.classk_lateral <= 0.0 ||
      cfg.cbf.classk_speed <= 0.0) {
    diag.add("cbf: class-K gains must be > 0");
  }
  try {
    validate_attack(cfg.attacks.cav_a, cfg.attacks.eta_bar,
                    cfg.attacks.kappa_bar, "attacks.A");
    validate_attack(cfg.attacks.cav_b, cfg.attacks.eta_bar,
                    cfg.attacks.kappa_bar, "attacks.B");
  } catch (const std::exception& e) {
    diag.add(e.what());
  }
  if (cfg.compensator.alpha_gain < 0.0) {
    diag.add("compensator.alpha_gain: must be >= 0");
  }
  if (cfg.compensator.c_decay < 0.0) {
    diag.add("compensator.c_decay: must be >= 0");
  }
  if (cfg.compensator.deadzone < 0.0) {
    diag.add("compensator.deadzone: must be >= 0");
  }
  if (!(cfg.compensator.rho_cap > 0.0)) {
    diag.add("compensator.rho_cap: must be > 0");
  }
  if (cfg.compensator.rho0 < 0.0 ||
      cfg.compensator.rho0 > cfg.compensator.rho_cap) {
    diag.add("compensator.rho0: must lie in [0, rho_cap]");
  }

  diag.throw_if_any("invalid config");
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << to_json(cfg).dump(2) << "\n";
}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Edsr: return "edsr";
    case Mode::Baseline: return "baseline";
    case Mode::Nominal: return "nominal";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "edsr") return Mode::Edsr;
  if (s == "baseline") return Mode::Baseline;
  if (s == "nominal") return Mode::Nominal;
  throw std::invalid_argument("unknown mode '" + s +
                              "' (expected edsr|baseline|nominal)");
}

}  // namespace edsr
