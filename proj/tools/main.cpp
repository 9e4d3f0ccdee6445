#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "edsr/scenario.hpp"
#include "edsr/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitAborted = 2;

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

edsr::ScenarioConfig load_with_mode(const std::string& path,
                                    const std::string& mode_override) {
  edsr::ScenarioConfig cfg = edsr::load_config(path);
  if (!mode_override.empty()) cfg.mode = edsr::mode_from_string(mode_override);
  return cfg;
}

void write_run_outputs(const edsr::RunResult& result, const fs::path& out_dir,
                       bool verbose_qp) {
  fs::create_directories(out_dir);
  edsr::write_trajectory_csv(result.log, (out_dir / "trajectory.csv").string());
  edsr::write_summary_json(result.summary, (out_dir / "summary.json").string());
  if (verbose_qp) {
    edsr::write_qp_trace_csv(result.qp_trace, (out_dir / "qp_log.csv").string());
  }
}

void print_run_summary(const edsr::RunResult& result) {
  const edsr::RunSummary& s = result.summary;
  std::cout << "termination: " << edsr::to_string(s.termination_reason);
  if (s.completion_time) {
    std::cout << "  (completed at " << fmt9(*s.completion_time) << " s)";
  }
  std::cout << "\nevents: " << s.event_count
            << "  failed QP solves: " << s.qp_infeasible_count << "\n";
  std::cout << "max |eps|: A " << fmt9(s.max_abs_eps_a) << "  B "
            << fmt9(s.max_abs_eps_b) << "\nmin barriers:";
  for (int p = 0; p < 6; ++p) {
    std::cout << "  " << edsr::kPairBarrierNames[p] << " "
              << fmt9(s.min_barriers[p]);
  }
  std::cout << "\n";
  if (!result.log.anomalies.empty()) {
    std::cout << "anomalies:";
    for (const std::string& a : result.log.anomalies) std::cout << " " << a;
    std::cout << "\n";
  }
}

int run_command(const std::string& config_path, const std::string& mode,
                std::uint64_t seed, const std::string& out,
                bool verbose_qp, bool run_to_horizon) {
  const edsr::ScenarioConfig cfg = load_with_mode(config_path, mode);
  edsr::RunOptions opts;
  opts.verbose_qp = verbose_qp;
  opts.run_to_horizon = run_to_horizon;
  const edsr::RunResult result = edsr::run_simulation(cfg, seed, opts);
  write_run_outputs(result, out, verbose_qp);
  print_run_summary(result);
  return result.summary.termination_reason == edsr::TerminationReason::Aborted
             ? kExitAborted
             : kExitOk;
}

int compare_command(const std::string& config_path, std::uint64_t seed,
                    const std::string& out) {
  edsr::ScenarioConfig cfg = edsr::load_config(config_path);

  cfg.mode = edsr::Mode::Edsr;
  const edsr::RunResult edsr_run = edsr::run_simulation(cfg, seed, {});
  write_run_outputs(edsr_run, fs::path(out) / "edsr", false);

  cfg.mode = edsr::Mode::Baseline;
  const edsr::RunResult base_run = edsr::run_simulation(cfg, seed, {});
  write_run_outputs(base_run, fs::path(out) / "baseline", false);

  const auto& se = edsr_run.summary;
  const auto& sb = base_run.summary;
  const auto row = [](const std::string& name, const std::string& a,
                      const std::string& b) {
    std::printf("%-18s %20s %20s\n", name.c_str(), a.c_str(), b.c_str());
  };
  const auto opt_time = [](const std::optional<double>& t) {
    return t ? fmt9(*t) + " s" : std::string("-");
  };
  row("metric", "edsr", "baseline");
  row("termination", edsr::to_string(se.termination_reason),
      edsr::to_string(sb.termination_reason));
  row("completion_time", opt_time(se.completion_time),
      opt_time(sb.completion_time));
  for (int p = 0; p < 6; ++p) {
    row(std::string("min ") + edsr::kPairBarrierNames[p],
        fmt9(se.min_barriers[p]), fmt9(sb.min_barriers[p]));
  }
  row("max |eps_A|", fmt9(se.max_abs_eps_a), fmt9(sb.max_abs_eps_a));
  row("max |eps_B|", fmt9(se.max_abs_eps_b), fmt9(sb.max_abs_eps_b));
  row("events", std::to_string(se.event_count), std::to_string(sb.event_count));
  row("failed QP solves", std::to_string(se.qp_infeasible_count),
      std::to_string(sb.qp_infeasible_count));
  // An aborted baseline is the expected demonstration, not a tool failure.
  return kExitOk;
}

json* navigate(json& root, const std::string& dotted) {
  json* node = &root;
  std::istringstream keys(dotted);
  std::string key;
  while (std::getline(keys, key, '.')) {
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
  }
  return node;
}

struct SweepCell {
  edsr::ScenarioConfig cfg;
  std::uint64_t seed = 0;
  std::vector<std::string> values;  // grid values, aligned with key order
};

int sweep_command(const std::string& spec_path, const std::string& out,
                  int jobs) {
  std::ifstream in(spec_path);
  if (!in) throw std::runtime_error("cannot open sweep spec: " + spec_path);
  json spec;
  in >> spec;
  if (!spec.is_object() || !spec.contains("config") ||
      !spec.contains("seeds") || !spec.contains("grid")) {
    throw std::runtime_error(
        "sweep spec needs keys: config (path), seeds (array), grid (object)");
  }

  // A relative config path counts from the sweep spec's own directory, so a
  // spec can ship next to the scenario it patches.
  fs::path cfg_path = spec.at("config").get<std::string>();
  if (cfg_path.is_relative()) {
    cfg_path = fs::path(spec_path).parent_path() / cfg_path;
  }
  std::ifstream cfg_in(cfg_path);
  if (!cfg_in) {
    throw std::runtime_error("cannot open config file: " + cfg_path.string());
  }
  json base;
  cfg_in >> base;

  const auto& seeds_json = spec.at("seeds");
  const auto& grid = spec.at("grid");
  if (!seeds_json.is_array() || !grid.is_object()) {
    throw std::runtime_error("sweep spec: seeds must be an array, grid an object");
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : seeds_json) seeds.push_back(s.get<std::uint64_t>());

  // Grid keys iterate in the JSON object's (sorted) key order; the cartesian
  // product is enumerated with the last key fastest, then seeds fastest of
  // all, so row order is deterministic.
  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  std::size_t cells = seeds.size();
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    if (!it.value().is_array()) {
      throw std::runtime_error("sweep grid values must be arrays: " + it.key());
    }
    keys.push_back(it.key());
    values.emplace_back(it.value().begin(), it.value().end());
    cells *= values.back().size();
  }
  if (cells == 0) {
    std::cerr << "sweep: empty grid (no seeds or an empty value list)\n";
    return kExitConfigError;
  }

  // Build and validate every cell before running anything.
  std::vector<SweepCell> plan;
  plan.reserve(cells);
  std::vector<std::size_t> idx(keys.size(), 0);
  while (true) {
    json patched = base;
    std::vector<std::string> cell_values;
    for (std::size_t g = 0; g < keys.size(); ++g) {
      json* node = navigate(patched, keys[g]);
      if (node == nullptr) {
        throw std::runtime_error("sweep grid key not found in config: " + keys[g]);
      }
      *node = values[g][idx[g]];
      const json& v = values[g][idx[g]];
      cell_values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    edsr::ScenarioConfig cfg = edsr::config_from_json(patched);
    for (std::uint64_t seed : seeds) {
      plan.push_back({cfg, seed, cell_values});
    }
    std::size_t g = keys.size();
    while (g > 0 && ++idx[g - 1] == values[g - 1].size()) idx[--g] = 0;
    if (g == 0) break;
  }

  std::vector<edsr::RunSummary> summaries(plan.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(plan.size())));
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < plan.size();
           i = next.fetch_add(1)) {
        try {
          summaries[i] =
              edsr::run_simulation(plan[i].cfg, plan[i].seed, {}).summary;
        } catch (const std::exception& e) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          failed = true;
          failure = e.what();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (failed) throw std::runtime_error("sweep run failed: " + failure);

  fs::create_directories(out);
  std::ostringstream csv;
  csv << "cell,seed";
  for (const std::string& k : keys) csv << "," << k;
  csv << ",termination_reason,completion_time";
  for (const char* name : edsr::kPairBarrierNames) csv << ",min_" << name;
  csv << ",max_abs_eps_A,max_abs_eps_B,event_count,qp_infeasible_count\n";
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const edsr::RunSummary& s = summaries[i];
    csv << i << "," << plan[i].seed;
    for (const std::string& v : plan[i].values) csv << "," << v;
    csv << "," << edsr::to_string(s.termination_reason) << ","
        << (s.completion_time ? fmt9(*s.completion_time) : "");
    for (int p = 0; p < 6; ++p) csv << "," << fmt9(s.min_barriers[p]);
    csv << "," << fmt9(s.max_abs_eps_a) << "," << fmt9(s.max_abs_eps_b) << ","
        << s.event_count << "," << s.qp_infeasible_count << "\n";
  }
  std::ofstream csv_out(fs::path(out) / "sweep.csv", std::ios::trunc);
  if (!csv_out) throw std::runtime_error("cannot write sweep.csv");
  csv_out << csv.str();
  std::cout << plan.size() << " runs -> " << (fs::path(out) / "sweep.csv").string()
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Event-driven safe and resilient lane-change controller: deterministic "
      "closed-loop simulation, mode comparison, and parameter sweeps."};
  app.require_subcommand(1);

  std::string config_path, mode, out = "out";
  std::uint64_t seed = 0;
  bool verbose_qp = false, run_to_horizon = false;

  CLI::App* run = app.add_subcommand("run", "Simulate one run and write trajectory.csv + summary.json");
  run->add_option("--config", config_path, "Scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "Override the config's mode")
      ->check(CLI::IsMember({"edsr", "baseline", "nominal"}));
  run->add_option("--seed", seed, "Run seed (all randomness derives from it)");
  run->add_option("--out", out, "Output directory (default: out)");
  run->add_flag("--verbose-qp", verbose_qp, "Also write per-event solver diagnostics (qp_log.csv)");
  run->add_flag("--run-to-horizon", run_to_horizon, "Keep logging past completion until the horizon");

  CLI::App* compare = app.add_subcommand("compare", "Run edsr and baseline on the same seed and print a side-by-side table");
  compare->add_option("--config", config_path, "Scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--seed", seed, "Run seed shared by both modes");
  compare->add_option("--out", out, "Output directory (default: out)");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter grid in parallel and write sweep.csv");
  std::string sweep_spec;
  int jobs = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--spec", sweep_spec, "Sweep spec (JSON: config, seeds, grid)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Output directory (default: out)");
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* validate = app.add_subcommand("validate-config", "Parse and validate a config, reporting every problem");
  validate->add_option("--config", config_path, "Scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed()) {
      return run_command(config_path, mode, seed, out, verbose_qp, run_to_horizon);
    }
    if (compare->parsed()) return compare_command(config_path, seed, out);
    if (sweep->parsed()) return sweep_command(sweep_spec, out, jobs);
    if (validate->parsed()) {
      edsr::load_config(config_path);
      std::cout << "config OK: " << config_path << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
