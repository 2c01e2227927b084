#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "zzsim/zzsim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitTolerance = 3;

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw RuntimeFailure("cannot create output directory " + dir.string());
  const auto probe = dir / ".zzsim-write-test";
  {
    std::ofstream p(probe);
    if (!p) throw RuntimeFailure("output directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

zzsim::TraceLevel parse_trace_level(const std::string& s) {
  if (s == "none") return zzsim::TraceLevel::None;
  if (s == "losses") return zzsim::TraceLevel::LossesOnly;
  return zzsim::TraceLevel::Full;
}

void write_run_artifacts(const fs::path& dir, const std::string& prefix, const zzsim::RunResult& run) {
  const auto seed = run.scenario.seed;
  {
    auto out = open_output(dir / (prefix + "timeseries.csv"));
    zzsim::write_time_series(out, zzsim::throughput_series(run.deliveries, run.scenario.flow_count,
                                                           run.scenario.duration_s),
                             seed);
  }
  {
    auto out = open_output(dir / (prefix + "controller_trace.csv"));
    zzsim::write_controller_trace(out, run.controller_trace, seed);
  }
  {
    auto out = open_output(dir / (prefix + "deliveries.csv"));
    zzsim::write_delivery_trace(out, run.deliveries, seed);
  }
  {
    auto out = open_output(dir / (prefix + "drops.csv"));
    zzsim::write_drop_trace(out, run.drops, seed);
  }
}

zzsim::ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw zzsim::ConfigError("config", "cannot read " + path);
  return zzsim::parse_scenario(in);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool paired_flag,
            const std::string& trace, const std::string& event_log_path) {
  auto cfg = load_scenario(config_path);
  const fs::path dir(out_dir);
  ensure_dir(dir);

  std::unique_ptr<std::ofstream> event_log;
  zzsim::RunOptions opts;
  opts.trace = parse_trace_level(trace);
  if (!event_log_path.empty()) {
    event_log = std::make_unique<std::ofstream>(open_output(event_log_path));
    opts.event_log = event_log.get();
  }

  auto summary = open_output(dir / "summary.csv");
  zzsim::write_summary_header(summary);
  if (paired_flag || cfg.paired) {
    auto pair = zzsim::run_pair(cfg.scenario, opts);
    write_run_artifacts(dir, "baseline_", pair.baseline);
    write_run_artifacts(dir, "zigzag_", pair.zigzag);
    zzsim::write_summary_row(summary, pair.row);
    std::cout << "baseline " << pair.row.baseline.mean_throughput_bps << " b/s, zigzag "
              << pair.row.zigzag.mean_throughput_bps << " b/s, increase " << pair.row.throughput_increase_pct
              << "%\n";
  } else {
    auto run = zzsim::run_flow_set(cfg.scenario, opts);
    write_run_artifacts(dir, "", run);
    const auto r = zzsim::summarize_run(run);
    const bool base = cfg.scenario.policy == zzsim::Policy::Baseline;
    zzsim::write_summary_row(summary, cfg.scenario, base ? &r : nullptr, base ? nullptr : &r, std::nullopt);
    std::cout << zzsim::to_string(cfg.scenario.policy) << ' ' << r.mean_throughput_bps << " b/s, utilization "
              << r.bw_utilization_pct << "%\n";
  }
  if (!summary) throw RuntimeFailure("write failed: " + (dir / "summary.csv").string());
  return kExitOk;
}

int cmd_matrix(const std::string& spec_path, const std::string& out_dir, unsigned jobs, const std::string& trace) {
  std::ifstream in(spec_path);
  if (!in) throw zzsim::ConfigError("spec", "cannot read " + spec_path);
  const auto matrix = zzsim::parse_matrix(in);
  const auto scenarios = matrix.expand();
  const fs::path dir(out_dir);
  ensure_dir(dir);

  zzsim::RunOptions opts;
  opts.trace = parse_trace_level(trace);
  std::string write_error;
  auto outcome = zzsim::run_matrix(scenarios, jobs, opts, [&](std::size_t, const zzsim::PairResult& pair) {
    const auto run_dir = dir / zzsim::run_id(pair.row.scenario);
    try {
      ensure_dir(run_dir);
      write_run_artifacts(run_dir, "baseline_", pair.baseline);
      write_run_artifacts(run_dir, "zigzag_", pair.zigzag);
    } catch (const std::exception& e) {
      if (write_error.empty()) write_error = e.what();
    }
  });

  auto summary = open_output(dir / "summary.csv");
  zzsim::write_summary_header(summary);
  for (const auto& row : outcome.rows) {
    if (row) zzsim::write_summary_row(summary, *row);
  }
  for (const auto& [index, what] : outcome.failures) {
    std::cerr << "failed: " << zzsim::run_id(scenarios[index]) << ": " << what << '\n';
  }
  std::cout << scenarios.size() - outcome.failures.size() << " of " << scenarios.size() << " pairs completed\n";
  if (!write_error.empty()) throw RuntimeFailure(write_error);
  return outcome.ok() ? kExitOk : kExitRuntime;
}

int cmd_validate(double p, double q, std::uint64_t n, std::uint64_t seed, const std::string& trace_path) {
  std::vector<zzsim::LossTraceRecord> trace;
  const auto report = zzsim::validate_loss_model(p, q, n, seed, trace_path.empty() ? nullptr : &trace);
  zzsim::print_loss_report(std::cout, report);
  if (!trace_path.empty()) {
    auto out = open_output(trace_path);
    zzsim::write_loss_trace(out, trace);
  }
  return report.ok() ? kExitOk : kExitTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zzsim: wireless-last-hop congestion control experiments"};
  app.require_subcommand(1);

  std::string config, out, trace = "full", event_log, spec;
  bool paired = false;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config, "Scenario file")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_flag("--paired", paired, "Run baseline and zigzag with the same seed");
  run->add_option("--trace", trace, "Controller trace detail")
      ->check(CLI::IsMember({"none", "losses", "full"}));
  run->add_option("--event-log", event_log, "Write every dispatched event to this file");

  unsigned jobs = 1;
  std::string matrix_trace = "losses";
  auto* matrix = app.add_subcommand("matrix", "Run a matrix of paired scenarios");
  matrix->add_option("--spec", spec, "Matrix file")->required();
  matrix->add_option("--out", out, "Output directory")->required();
  matrix->add_option("--jobs", jobs, "Pairs to run concurrently")->check(CLI::PositiveNumber);
  matrix->add_option("--trace", matrix_trace, "Controller trace detail")
      ->check(CLI::IsMember({"none", "losses", "full"}));

  double p = 0.0, q = 0.0;
  std::uint64_t n = 1000000, seed = 1;
  std::string loss_trace;
  auto* validate = app.add_subcommand("validate-loss", "Check Gilbert loss statistics");
  validate->add_option("--p", p, "Good to Bad transition probability")->required();
  validate->add_option("--q", q, "Bad to Good transition probability")->required();
  validate->add_option("--n", n, "Packets to draw")->check(CLI::Range(std::uint64_t{100000}, UINT64_MAX));
  validate->add_option("--seed", seed, "Seed");
  validate->add_option("--trace", loss_trace, "Write the per-packet trace here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, out, paired, trace, event_log);
    if (*matrix) return cmd_matrix(spec, out, jobs, matrix_trace);
    if (*validate) return cmd_validate(p, q, n, seed, loss_trace);
  } catch (const zzsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
