#include "edsr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "edsr/attack.hpp"
#include "edsr/dynamics.hpp"
#include "edsr/estimator.hpp"
#include "edsr/resilient.hpp"

namespace edsr {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

void fmt_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

// Writes to a sibling temp file first so concurrent sweep runs and crashed
// runs never leave a half-written artifact at the target path.
void atomic_write(const std::string& path, const std::string& payload) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << payload;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t run_seed, std::string_view label) {
  return run_seed ^ fnv1a(label);
}

UniformStream::UniformStream(std::uint64_t run_seed, std::string_view label)
    : gen_(substream_seed(run_seed, label)) {}

double UniformStream::canonical() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double UniformStream::uniform(double lo, double hi) {
  return lo + canonical() * (hi - lo);
}

double UniformStream::symmetric(double half_width) {
  return uniform(-half_width, half_width);
}

const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::Completed: return "completed";
    case TerminationReason::Timeout: return "timeout";
    case TerminationReason::Aborted: return "aborted";
  }
  return "?";
}

TerminationStatus check_termination(const VehicleState& cav_b,
                                    const ScenarioConfig& cfg, double t) {
  const bool in_window =
      std::abs(cav_b.y - cfg.lane_width) <= cfg.termination.sigma &&
      std::abs(cav_b.theta) <= cfg.termination.heading_tol;
  if (in_window) return TerminationStatus::Completed;
  if (t >= cfg.time.t_f - 1e-12) return TerminationStatus::Timeout;
  return TerminationStatus::Running;
}

RunResult run_simulation(const ScenarioConfig& cfg, std::uint64_t seed,
                         const RunOptions& opts) {
  validate_config(cfg);

  RunResult result;
  TrajectoryLog& log = result.log;
  log.mode = cfg.mode;
  log.seed = seed;

  UniformStream input_stream(seed, "hdv-input");
  UniformStream disturbance_stream(seed, "hdv-disturbance");

  VehicleState a = cfg.veh_a.initial;
  VehicleState b = cfg.veh_b.initial;
  VehicleState h_truth = cfg.veh_h.initial;
  VehicleState u_slow = cfg.veh_u.initial;

  HdvEstimate est;
  est.xbar = cfg.veh_h.initial;
  Vec4 e_prev{0.0, 0.0, 0.0, 0.0};
  bool first_after_reset = true;

  TriggerState trig;
  CompensatorState comp_a, comp_b;
  comp_a.rho_hat = cfg.compensator.rho0;
  comp_b.rho_hat = cfg.compensator.rho0;
  // Speed each CAV would have if the held safe command were applied without
  // interference; the compensator senses deviations from this reference, so
  // it reacts only to injected acceleration and never fights the planned
  // maneuver (attack-free, measured speed matches it exactly).
  double plan_v_a = cfg.veh_a.initial.v;
  double plan_v_b = cfg.veh_b.initial.v;
  ControlInput held_a{0.0, 0.0}, held_b{0.0, 0.0};
  std::array<double, 4> held_delta{};
  QpStatus last_status = QpStatus::Optimal;
  int last_iterations = 0;
  int infeasible_solves = 0;

  AttackParams attack_a = cfg.attacks.cav_a;
  AttackParams attack_b = cfg.attacks.cav_b;
  if (cfg.mode == Mode::Nominal) {
    attack_a.enabled = false;
    attack_b.enabled = false;
  }
  const bool compensate = cfg.mode == Mode::Edsr;

  const std::vector<BarrierSpec> barriers = scenario_barriers(
      cfg.cbf.classk_pair, cfg.cbf.classk_lateral, cfg.cbf.classk_speed);
  const std::vector<ClfSpec> clfs{{1, cfg.clf_c_speed},
                                  {2, cfg.clf_c_speed},
                                  {3, cfg.clf_c3},
                                  {4, cfg.clf_c3}};

  const auto make_scene = [&](const VehicleState& hdv_for_rows,
                              const Vec4& hdv_rate) {
    Scene scene;
    scene.cav_a = a;
    scene.cav_b = b;
    scene.hdv = hdv_for_rows;
    scene.slow = u_slow;
    scene.hdv_rate = hdv_rate;
    scene.par_a = cfg.veh_a.params;
    scene.par_b = cfg.veh_b.params;
    scene.limits = cfg.limits;
    scene.lane_width = cfg.lane_width;
    scene.v_desired = cfg.v_desired;
    return scene;
  };

  const double dt = cfg.time.t_s;
  const double speed_floor = 0.5 * cfg.limits.v_min;
  bool stop = false;
  bool rho_cap_a_reported = false, rho_cap_b_reported = false;

  for (int k = 0;; ++k) {
    const double t = k * dt;

    // Measurement of the HDV estimation error and its backward-difference
    // rate; zero by contract on the first sample after a reset.
    const Vec4 e_now = measure_error(h_truth, est);
    const Vec4 edot_now = error_rate(e_now, e_prev, dt, first_after_reset);
    est.e = e_now;
    est.e_dot = edot_now;

    // Plan deviation is sampled before any replanning below re-anchors the
    // reference: it is the residue the plan in force could not explain
    // (injection minus compensation, plus actuator clamp loss) since the
    // last replan.
    const double comp_eps_a = speed_error(a.v, plan_v_a);
    const double comp_eps_b = speed_error(b.v, plan_v_b);

    TriggerDecision decision;
    if (!stop) {
      decision = should_trigger(est.e, est.e_dot, a, b, est.xbar, trig,
                                cfg.uncertainty, k == 0);
      if (decision.fire) {
        reset_and_adapt(est, h_truth, est.e_dot);
        record_event(trig, t, a, b, est.xbar);

        Vec4 measured = to_vec(est.xbar);
        for (int j = 0; j < 4; ++j) measured[j] += est.e[j];
        Vec4 rate = estimate_derivative(est, cfg.veh_h.params,
                                        cfg.hdv.heading_model);
        for (int j = 0; j < 4; ++j) rate[j] += est.e_dot[j];
        const Scene scene = make_scene(from_vec(measured), rate);

        const std::vector<ConstraintRow> rows = build_constraint_rows(
            barriers, clfs, scene, cfg.uncertainty, cfg.cbf.robust_mode);
        const QpProblem problem = build_qp(rows, cfg.qp.weights, cfg.limits);
        const QpSolution sol =
            solve_qp(problem, cfg.qp.tolerance, cfg.qp.max_iterations);

        last_status = sol.status;
        last_iterations = sol.iterations;
        if (sol.status == QpStatus::Optimal) {
          held_a = {sol.z[kVarUA], sol.z[kVarPhiA]};
          held_b = {sol.z[kVarUB], sol.z[kVarPhiB]};
          held_delta = {sol.z[kVarDelta1], sol.z[kVarDelta2],
                        sol.z[kVarDelta3], sol.z[kVarDelta4]};
          // The fresh plan starts from the speeds the solver was given, so
          // the plan reference re-anchors there. Without this, speed drift
          // accumulated while the injection exceeded actuator authority
          // would persist as a permanent offset in the compensator error,
          // making it fight every subsequent plan.
          plan_v_a = a.v;
          plan_v_b = b.v;
        } else {
          ++infeasible_solves;
          if (cfg.qp.fallback == InfeasibleFallback::Brake) {
            held_a = {cfg.limits.u_min, 0.0};
            held_b = {cfg.limits.u_min, 0.0};
          }
        }

        if (opts.verbose_qp) {
          QpTraceRow trace;
          trace.t = t;
          trace.rows = static_cast<int>(rows.size());
          trace.status = sol.status;
          trace.iterations = sol.iterations;
          trace.kkt = sol.status == QpStatus::Optimal
                          ? kkt_residual(problem, sol)
                          : std::numeric_limits<double>::quiet_NaN();
          trace.objective = sol.objective;
          result.qp_trace.push_back(trace);
        }

        e_prev = {0.0, 0.0, 0.0, 0.0};
        first_after_reset = true;
      } else {
        e_prev = e_now;
        first_after_reset = false;
      }
    }

    // Compensation runs every sample, independent of the event trigger; the
    // terminal row reports the current gain without adapting it further.
    // eps_a/eps_b (regulation error vs the desired speed) are the reported
    // tracking metric; the compensator itself is driven by the plan
    // deviation sampled above.
    const double eps_a = speed_error(a.v, cfg.v_desired);
    const double eps_b = speed_error(b.v, cfg.v_desired);
    double gamma_hat_a = 0.0, gamma_hat_b = 0.0;
    if (compensate) {
      gamma_hat_a =
          compensation(comp_eps_a, comp_a.rho_hat, t, cfg.compensator.c_decay);
      gamma_hat_b =
          compensation(comp_eps_b, comp_b.rho_hat, t, cfg.compensator.c_decay);
    }
    const double rho_a_used = comp_a.rho_hat;
    const double rho_b_used = comp_b.rho_hat;
    if (compensate && !stop) {
      // The gain only adapts to the part of the deviation outside the
      // deadzone band; otherwise the compensator's own switching ripple
      // (amplitude ~ exp(rho_hat)*dt) would ratchet the nondecreasing gain
      // up to the cap and turn it into a full-authority relay.
      const auto shaped = [&](double eps) {
        const double mag = std::abs(eps) - cfg.compensator.deadzone;
        return mag > 0.0 ? std::copysign(mag, eps) : 0.0;
      };
      comp_a.rho_hat = adapt_step(comp_a.rho_hat, shaped(comp_eps_a),
                                  cfg.compensator.alpha_gain, dt,
                                  cfg.compensator.rho_cap, &comp_a.cap_hit);
      comp_b.rho_hat = adapt_step(comp_b.rho_hat, shaped(comp_eps_b),
                                  cfg.compensator.alpha_gain, dt,
                                  cfg.compensator.rho_cap, &comp_b.cap_hit);
      if (comp_a.cap_hit && !rho_cap_a_reported) {
        log.anomalies.push_back("rho_cap_hit_A");
        rho_cap_a_reported = true;
      }
      if (comp_b.cap_hit && !rho_cap_b_reported) {
        log.anomalies.push_back("rho_cap_hit_B");
        rho_cap_b_reported = true;
      }
    }

    const ControlInput cmd_a = clamp_input(
        {resilient_input(held_a.u, gamma_hat_a), held_a.phi}, cfg.limits);
    const ControlInput cmd_b = clamp_input(
        {resilient_input(held_b.u, gamma_hat_b), held_b.phi}, cfg.limits);
    const double gamma_a = eu_fdi_signal(t, attack_a);
    const double gamma_b = eu_fdi_signal(t, attack_b);
    double u_act_a = apply_attack(cmd_a.u, gamma_a);
    double u_act_b = apply_attack(cmd_b.u, gamma_b);
    if (cfg.saturate_corrupted_input) {
      u_act_a = std::clamp(u_act_a, cfg.limits.u_min, cfg.limits.u_max);
      u_act_b = std::clamp(u_act_b, cfg.limits.u_min, cfg.limits.u_max);
    }

    SampleRow row;
    row.t = t;
    row.event = decision.fire;
    row.event_reasons = decision.reasons;
    row.events_cum = trig.event_count;
    row.a = a;
    row.b = b;
    row.h = h_truth;
    row.u = u_slow;
    row.est_xbar = est.xbar;
    row.est_h = est.h;
    row.e = est.e;
    row.e_dot = est.e_dot;
    row.qp_a = held_a;
    row.qp_b = held_b;
    row.cmd_a = cmd_a;
    row.cmd_b = cmd_b;
    row.u_act_a = u_act_a;
    row.u_act_b = u_act_b;
    row.gamma_a = gamma_a;
    row.gamma_b = gamma_b;
    row.gamma_hat_a = gamma_hat_a;
    row.gamma_hat_b = gamma_hat_b;
    row.rho_hat_a = rho_a_used;
    row.rho_hat_b = rho_b_used;
    row.eps_a = eps_a;
    row.eps_b = eps_b;
    row.delta = held_delta;
    row.qp_solved = decision.fire;
    row.qp_status = last_status;
    row.qp_iterations = last_iterations;
    {
      const Scene true_scene = make_scene(h_truth, Vec4{});
      for (int p = 0; p < 6; ++p) {
        row.pair_barriers[p] = barrier_value(barriers[p], true_scene);
      }
    }
    log.rows.push_back(row);

    if (stop) break;

    const ControlInput act_a{u_act_a, cmd_a.phi};
    const ControlInput act_b{u_act_b, cmd_b.phi};
    ControlInput hdv_in{};
    if (cfg.hdv.policy == HdvPolicy::Uniform) {
      hdv_in.u = input_stream.symmetric(cfg.hdv.accel_range);
      hdv_in.phi = input_stream.symmetric(cfg.hdv.steer_range);
    } else {
      // Noisy lane/speed-keeping around the HDV's initial lane and speed;
      // both channels stay inside the declared input ranges.
      const double eta_u = input_stream.symmetric(cfg.hdv.accel_noise);
      const double eta_phi = input_stream.symmetric(cfg.hdv.steer_noise);
      hdv_in.u = std::clamp(
          cfg.hdv.speed_gain * (cfg.veh_h.initial.v - h_truth.v) + eta_u,
          -cfg.hdv.accel_range, cfg.hdv.accel_range);
      hdv_in.phi = std::clamp(
          -cfg.hdv.heading_gain * h_truth.theta +
              cfg.hdv.lateral_gain * (cfg.veh_h.initial.y - h_truth.y) +
              eta_phi,
          -cfg.hdv.steer_range, cfg.hdv.steer_range);
    }
    Vec4 dist;
    for (int j = 0; j < 4; ++j) {
      dist[j] = disturbance_stream.symmetric(cfg.hdv.disturbance[j]);
    }

    bool floor_a = false, floor_b = false;
    try {
      const auto ra = integrate_step(
          a, [&](const VehicleState& s) { return cav_derivative(s, act_a, cfg.veh_a.params); },
          dt, cfg.time.substeps, speed_floor);
      const auto rb = integrate_step(
          b, [&](const VehicleState& s) { return cav_derivative(s, act_b, cfg.veh_b.params); },
          dt, cfg.time.substeps, speed_floor);
      const auto rh = integrate_step(
          h_truth,
          [&](const VehicleState& s) { return hdv_true_derivative(s, hdv_in, dist, cfg.veh_h.params); },
          dt, cfg.time.substeps);
      const auto ru = integrate_step(
          u_slow, [&](const VehicleState& s) { return slow_vehicle_derivative(s); },
          dt, cfg.time.substeps);
      const auto re = integrate_step(
          est.xbar,
          [&](const VehicleState& s) {
            HdvEstimate probe = est;
            probe.xbar = s;
            return estimate_derivative(probe, cfg.veh_h.params,
                                       cfg.hdv.heading_model);
          },
          dt, cfg.time.substeps);
      a = ra.state;
      b = rb.state;
      h_truth = rh.state;
      u_slow = ru.state;
      est.xbar = re.state;
      plan_v_a += held_a.u * dt;
      plan_v_b += held_b.u * dt;
      floor_a = ra.speed_floor_hit;
      floor_b = rb.speed_floor_hit;
    } catch (const std::invalid_argument&) {
      log.reason = TerminationReason::Aborted;
      log.anomalies.push_back("nonfinite_state");
      break;
    }

    const double t_next = (k + 1) * dt;
    const bool finite = all_finite(a) && all_finite(b) && all_finite(h_truth) &&
                        all_finite(u_slow) && all_finite(est.xbar);
    const TerminationStatus status = check_termination(b, cfg, t_next);
    if (status == TerminationStatus::Completed && !log.completion_time) {
      log.completion_time = t_next;
    }

    if (floor_a || floor_b || !finite) {
      log.reason = TerminationReason::Aborted;
      if (floor_a) log.anomalies.push_back("speed_floor_A");
      if (floor_b) log.anomalies.push_back("speed_floor_B");
      if (!finite) log.anomalies.push_back("nonfinite_state");
      stop = true;
    } else if (status == TerminationStatus::Completed && !opts.run_to_horizon) {
      log.reason = TerminationReason::Completed;
      stop = true;
    } else if (t_next >= cfg.time.t_f - 1e-12) {
      log.reason = log.completion_time ? TerminationReason::Completed
                                       : TerminationReason::Timeout;
      stop = true;
    }
  }

  result.summary = compute_metrics(log);
  // Keep the infeasible-solve tally authoritative even though the log scan
  // reconstructs it; they must agree.
  result.summary.qp_infeasible_count = infeasible_solves;
  return result;
}

RunSummary compute_metrics(const TrajectoryLog& log) {
  if (log.rows.empty()) throw std::invalid_argument("compute_metrics: empty log");
  RunSummary s;
  s.completion_time = log.completion_time;
  s.termination_reason = log.reason;
  s.min_barriers = log.rows.front().pair_barriers;
  for (const SampleRow& row : log.rows) {
    for (int p = 0; p < 6; ++p) {
      s.min_barriers[p] = std::min(s.min_barriers[p], row.pair_barriers[p]);
    }
    s.max_abs_eps_a = std::max(s.max_abs_eps_a, std::abs(row.eps_a));
    s.max_abs_eps_b = std::max(s.max_abs_eps_b, std::abs(row.eps_b));
    if (row.qp_solved && row.qp_status != QpStatus::Optimal) {
      ++s.qp_infeasible_count;
    }
  }
  s.event_count = log.rows.back().events_cum;
  return s;
}

std::string trajectory_csv_header() {
  return "t,event,event_reasons,events_cum,"
         "x_A,y_A,theta_A,v_A,x_B,y_B,theta_B,v_B,"
         "x_H,y_H,theta_H,v_H,x_U,y_U,theta_U,v_U,"
         "xbar_H,ybar_H,thetabar_H,vbar_H,h_x,h_y,h_theta,h_v,"
         "e_x,e_y,e_theta,e_v,edot_x,edot_y,edot_theta,edot_v,"
         "u_qp_A,phi_qp_A,u_qp_B,phi_qp_B,"
         "u_cmd_A,phi_cmd_A,u_cmd_B,phi_cmd_B,"
         "u_act_A,u_act_B,gamma_A,gamma_B,gamma_hat_A,gamma_hat_B,"
         "rho_hat_A,rho_hat_B,eps_A,eps_B,"
         "delta_1,delta_2,delta_3,delta_4,"
         "qp_solved,qp_status,qp_iterations,"
         "b_AB,b_AH,b_AU,b_BA,b_BH,b_BU";
}

void write_trajectory_csv(const TrajectoryLog& log, std::ostream& os) {
  std::string out = trajectory_csv_header();
  out += '\n';
  for (const SampleRow& r : log.rows) {
    fmt_double(out, r.t);
    out += ',';
    out += r.event ? '1' : '0';
    out += ',';
    out += std::to_string(r.event_reasons);
    out += ',';
    out += std::to_string(r.events_cum);
    const auto add_state = [&](const VehicleState& s) {
      for (double v : {s.x, s.y, s.theta, s.v}) {
        out += ',';
        fmt_double(out, v);
      }
    };
    add_state(r.a);
    add_state(r.b);
    add_state(r.h);
    add_state(r.u);
    add_state(r.est_xbar);
    const auto add_vec = [&](const Vec4& v) {
      for (double x : v) {
        out += ',';
        fmt_double(out, x);
      }
    };
    add_vec(r.est_h);
    add_vec(r.e);
    add_vec(r.e_dot);
    for (double v : {r.qp_a.u, r.qp_a.phi, r.qp_b.u, r.qp_b.phi, r.cmd_a.u,
                     r.cmd_a.phi, r.cmd_b.u, r.cmd_b.phi, r.u_act_a, r.u_act_b,
                     r.gamma_a, r.gamma_b, r.gamma_hat_a, r.gamma_hat_b,
                     r.rho_hat_a, r.rho_hat_b, r.eps_a, r.eps_b, r.delta[0],
                     r.delta[1], r.delta[2], r.delta[3]}) {
      out += ',';
      fmt_double(out, v);
    }
    out += ',';
    out += r.qp_solved ? '1' : '0';
    out += ',';
    out += std::to_string(static_cast<int>(r.qp_status));
    out += ',';
    out += std::to_string(r.qp_iterations);
    for (double v : r.pair_barriers) {
      out += ',';
      fmt_double(out, v);
    }
    out += '\n';
  }
  os << out;
}

void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
  std::ostringstream os;
  write_trajectory_csv(log, os);
  atomic_write(path, os.str());
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  if (s.completion_time) {
    j["completion_time"] = *s.completion_time;
  } else {
    j["completion_time"] = nullptr;
  }
  nlohmann::json mins;
  for (int p = 0; p < 6; ++p) mins[kPairBarrierNames[p]] = s.min_barriers[p];
  j["min_barriers"] = mins;
  j["max_abs_eps"] = {{"A", s.max_abs_eps_a}, {"B", s.max_abs_eps_b}};
  j["event_count"] = s.event_count;
  j["qp_infeasible_count"] = s.qp_infeasible_count;
  j["termination_reason"] = to_string(s.termination_reason);
  return j;
}

void write_summary_json(const RunSummary& s, const std::string& path) {
  atomic_write(path, summary_to_json(s).dump(2) + "\n");
}

std::string qp_trace_csv_header() {
  return "t,rows,status,iterations,kkt,objective";
}

void write_qp_trace_csv(const std::vector<QpTraceRow>& trace,
                        const std::string& path) {
  std::string out = qp_trace_csv_header();
  out += '\n';
  for (const QpTraceRow& r : trace) {
    fmt_double(out, r.t);
    out += ',';
    out += std::to_string(r.rows);
    out += ',';
    out += std::to_string(static_cast<int>(r.status));
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    fmt_double(out, r.kkt);
    out += ',';
    fmt_double(out, r.objective);
    out += '\n';
  }
  atomic_write(path, out);
}

}  // namespace edsr
