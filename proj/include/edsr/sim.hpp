#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edsr/events.hpp"
#include "edsr/qp.hpp"
#include "edsr/scenario.hpp"

namespace edsr {

// 64-bit FNV-1a of the role label, folded into the run seed. Each random role
// draws from its own generator so toggling one stream never shifts another.
std::uint64_t substream_seed(std::uint64_t run_seed, std::string_view label);

class UniformStream {
 public:
  UniformStream(std::uint64_t run_seed, std::string_view label);

  // Canonical double in [0, 1) built from the top 53 bits of the generator,
  // identical on every platform (distribution-free on purpose:
  // std::uniform_real_distribution is not pinned down by the standard).
  double canonical();
  double uniform(double lo, double hi);
  double symmetric(double half_width);  // uniform in [-half_width, half_width]

 private:
  std::mt19937_64 gen_;
};

enum class TerminationReason { Completed, Timeout, Aborted };
const char* to_string(TerminationReason r);

enum class TerminationStatus { Running, Completed, Timeout };

// Completed when CAV B sits within the lateral window around the target lane
// center with near-zero heading; timeout once t reaches the horizon.
TerminationStatus check_termination(const VehicleState& cav_b,
                                    const ScenarioConfig& cfg, double t);

// Pair-barrier column order used everywhere (log, summary, CSV).
inline constexpr std::array<const char*, 6> kPairBarrierNames{
    "b_AB", "b_AH", "b_AU", "b_BA", "b_BH", "b_BU"};

// One logged sample: states at time t and the inputs applied over [t, t+T_s).
struct SampleRow {
  double t = 0.0;
  bool event = false;
  unsigned event_reasons = 0;
  int events_cum = 0;
  VehicleState a, b, h, u;
  VehicleState est_xbar;
  Vec4 est_h{};
  Vec4 e{};
  Vec4 e_dot{};
  ControlInput qp_a, qp_b;          // zero-order-held QP solution
  ControlInput cmd_a, cmd_b;        // after compensation and clamping
  double u_act_a = 0.0, u_act_b = 0.0;  // corrupted acceleration (cmd + gamma)
  double gamma_a = 0.0, gamma_b = 0.0;
  double gamma_hat_a = 0.0, gamma_hat_b = 0.0;
  double rho_hat_a = 0.0, rho_hat_b = 0.0;
  double eps_a = 0.0, eps_b = 0.0;
  std::array<double, 4> delta{};    // held CLF relaxations
  bool qp_solved = false;           // a solve happened at this sample
  QpStatus qp_status = QpStatus::Optimal;
  int qp_iterations = 0;
  std::array<double, 6> pair_barriers{};  // evaluated on true states
};

struct TrajectoryLog {
  std::vector<SampleRow> rows;
  Mode mode = Mode::Edsr;
  std::uint64_t seed = 0;
  TerminationReason reason = TerminationReason::Timeout;
  std::optional<double> completion_time;  // first instant the gate held
  std::vector<std::string> anomalies;     // e.g. speed_floor_B, rho_cap_hit_A
};

struct RunSummary {
  std::optional<double> completion_time;
  std::array<double, 6> min_barriers{};  // per pair, order kPairBarrierNames
  double max_abs_eps_a = 0.0;
  double max_abs_eps_b = 0.0;
  int event_count = 0;
  int qp_infeasible_count = 0;
  TerminationReason termination_reason = TerminationReason::Timeout;
};

// Per-event solver diagnostics, emitted only when requested.
struct QpTraceRow {
  double t = 0.0;
  int rows = 0;
  QpStatus status = QpStatus::Optimal;
  int iterations = 0;
  double kkt = 0.0;
  double objective = 0.0;
};

struct RunOptions {
  bool run_to_horizon = false;  // keep logging past completion until T_f
  bool verbose_qp = false;      // populate qp_trace
};

struct RunResult {
  TrajectoryLog log;
  RunSummary summary;
  std::vector<QpTraceRow> qp_trace;
};

// Full closed-loop run. Per sample: draw the human inputs and disturbances,
// measure the estimation error and its rate, evaluate the trigger (the first
// sample always fires); on an event reset-and-adapt the estimator, rebuild
// the constraint rows and re-solve the QP (zero-order hold otherwise); update
// the compensator (edsr mode only) and form commands; clamp, inject the
// attack, integrate plant and estimator; log; check termination. Baseline
// mode disables compensation, nominal mode disables both attack and
// compensation. Strictly single-threaded and deterministic in (config, seed).
RunResult run_simulation(const ScenarioConfig& cfg, std::uint64_t seed,
                         const RunOptions& opts = {});

// Scan of a finished log: per-pair barrier minima, per-CAV worst speed error,
// event and failed-solve counts.
RunSummary compute_metrics(const TrajectoryLog& log);

std::string trajectory_csv_header();
void write_trajectory_csv(const TrajectoryLog& log, std::ostream& os);
void write_trajectory_csv(const TrajectoryLog& log, const std::string& path);

nlohmann::json summary_to_json(const RunSummary& s);
void write_summary_json(const RunSummary& s, const std::string& path);

std::string qp_trace_csv_header();
void write_qp_trace_csv(const std::vector<QpTraceRow>& trace,
                        const std::string& path);

}  // namespace edsr
