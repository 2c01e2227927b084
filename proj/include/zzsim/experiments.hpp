#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "zzsim/loss_models.hpp"
#include "zzsim/metrics.hpp"
#include "zzsim/network.hpp"
#include "zzsim/scenario.hpp"

namespace zzsim {

struct GilbertCouple {
  double p;
  double q;
  bool operator==(const GilbertCouple&) const = default;
};

// Reference Gilbert couples and a measured loss rate for each, taken from
// 500 s NS-2 runs.
struct ReferenceCouple {
  GilbertCouple couple;
  double measured_plr;
};

inline constexpr ReferenceCouple kReferenceCouples[] = {
    {{0.001, 0.6}, 0.00176},
    {{0.01, 0.5}, 0.0192},
    {{0.1, 0.6}, 0.1394},
    {{0.1, 0.4}, 0.198},
};

// Packets a 1.3 Mb/s bottleneck carries in 500 s at 1000 bytes each.
inline constexpr double kReferenceRunPackets = 500.0 * 1.3e6 / 8000.0;

struct ExperimentMatrix {
  std::vector<std::uint32_t> flow_counts{1, 5, 10};
  // (0.1, 0.4) is validated for loss statistics only.
  std::vector<GilbertCouple> couples{{0.001, 0.6}, {0.01, 0.5}, {0.1, 0.6}};
  std::vector<double> aggregate_rates_bps{1.0e6, 1.5e6};
  std::vector<LossKind> loss_kinds{LossKind::Gilbert, LossKind::Uniform};
  std::vector<std::uint64_t> seeds{1};
  Scenario base;

  // One scenario per matrix cell; each expands to a baseline/zigzag pair.
  // Uniform cells use the couple's stationary loss rate.
  std::vector<Scenario> expand() const {
    std::vector<Scenario> out;
    for (auto kind : loss_kinds) {
      for (auto flows : flow_counts) {
        for (const auto& c : couples) {
          for (auto rate : aggregate_rates_bps) {
            for (auto seed : seeds) {
              Scenario s = base;
              s.flow_count = flows;
              s.aggregate_rate_bps = rate;
              s.seed = seed;
              s.policy = Policy::Baseline;
              switch (kind) {
                case LossKind::Gilbert:
                  s.loss = LossSpec::gilbert(c.p, c.q);
                  break;
                case LossKind::Uniform:
                  s.loss = LossSpec::uniform(steady_state_plr(c.p, c.q));
                  break;
                case LossKind::None:
                  s.loss = LossSpec::none();
                  break;
              }
              validate(s);
              out.push_back(s);
            }
          }
        }
      }
    }
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

// Matrix files use the scenario key-value syntax. List keys (comma
// separated, possibly empty): flow_counts, couples (p:q items),
// aggregate_rates_bps, loss_kinds, seeds. Every other key sets the base
// scenario.
inline ExperimentMatrix parse_matrix(std::istream& in) {
  ExperimentMatrix m;
  for (const auto& [key, value] : read_key_values(in)) {
    const auto items = detail::split_list(value);
    if (key == "flow_counts") {
      m.flow_counts.clear();
      for (const auto& i : items) m.flow_counts.push_back(detail::parse_u32(key, i));
    } else if (key == "couples") {
      m.couples.clear();
      for (const auto& i : items) {
        const auto colon = i.find(':');
        if (colon == std::string::npos) throw ConfigError(key, "expected p:q, got '" + i + "'");
        m.couples.push_back({detail::parse_double(key, detail::trim(i.substr(0, colon))),
                             detail::parse_double(key, detail::trim(i.substr(colon + 1)))});
      }
    } else if (key == "aggregate_rates_bps") {
      m.aggregate_rates_bps.clear();
      for (const auto& i : items) m.aggregate_rates_bps.push_back(detail::parse_double(key, i));
    } else if (key == "loss_kinds") {
      m.loss_kinds.clear();
      for (const auto& i : items) {
        try {
          m.loss_kinds.push_back(parse_loss_kind(i));
        } catch (const ConfigError& e) {
          throw ConfigError(key, e.what());
        }
      }
    } else if (key == "seeds") {
      m.seeds.clear();
      for (const auto& i : items) m.seeds.push_back(detail::parse_uint(key, i));
    } else if (key == "policy") {
      throw ConfigError(key, "matrix entries always run both policies");
    } else if (!apply_scenario_key(m.base, key, value)) {
      throw ConfigError(key, "unknown key");
    }
  }
  return m;
}

inline ExperimentMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix(in);
}

inline std::string run_id(const Scenario& s) {
  std::ostringstream o;
  o << "f" << s.flow_count << '_' << to_string(s.loss.kind);
  if (s.loss.kind == LossKind::Gilbert) o << "_p" << format_double(s.loss.p) << "_q" << format_double(s.loss.q);
  if (s.loss.kind == LossKind::Uniform) o << "_plr" << format_double(s.loss.plr);
  o << "_r" << format_double(s.aggregate_rate_bps) << "_s" << s.seed;
  return o.str();
}

struct PairResult {
  RunResult baseline;
  RunResult zigzag;
  SummaryRow row;
};

inline PairResult run_pair(const Scenario& scenario, RunOptions options = {}) {
  Scenario b = scenario;
  b.policy = Policy::Baseline;
  Scenario z = scenario;
  z.policy = Policy::ZigZag;
  PairResult out;
  out.baseline = run_flow_set(b, options);
  out.zigzag = run_flow_set(z, options);
  out.row = summarize(out.baseline, out.zigzag);
  return out;
}

struct MatrixOutcome {
  std::vector<std::optional<SummaryRow>> rows;  // indexed like the input scenarios
  std::vector<std::pair<std::size_t, std::string>> failures;

  bool ok() const { return failures.empty(); }
};

// Runs every scenario as a pair, up to `jobs` pairs at a time. `on_pair` is
// called serially (under a lock) as pairs complete.
inline MatrixOutcome run_matrix(const std::vector<Scenario>& scenarios, unsigned jobs, RunOptions options = {},
                                const std::function<void(std::size_t, const PairResult&)>& on_pair = {}) {
  MatrixOutcome outcome;
  outcome.rows.resize(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        PairResult pair = run_pair(scenarios[i], options);
        std::lock_guard lock(mu);
        outcome.rows[i] = pair.row;
        if (on_pair) on_pair(i, pair);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        outcome.failures.emplace_back(i, e.what());
      }
    }
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1 || scenarios.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs && j < scenarios.size(); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(outcome.failures.begin(), outcome.failures.end());
  return outcome;
}

struct LossValidationReport {
  double p = 0.0;
  double q = 0.0;
  std::uint64_t packets = 0;
  std::uint64_t seed = 0;
  DropStatistics stats;
  double analytic_plr = 0.0;
  double analytic_mean_burst = 0.0;
  double plr_relative_error = 0.0;
  double burst_relative_error = 0.0;
  bool plr_ok = false;
  bool burst_ok = false;
  // When (p, q) is a reference couple: its measured PLR against the analytic
  // value at the reference run length.
  std::optional<double> reference_measured_plr;
  double reference_standard_error = 0.0;
  double reference_z = 0.0;
  bool reference_ok = true;

  bool ok() const { return plr_ok && burst_ok && reference_ok; }
};

inline constexpr double kLossRelativeTolerance = 0.05;
inline constexpr double kReferenceSigmas = 3.0;
inline constexpr std::uint64_t kMinValidationPackets = 100000;

inline LossValidationReport validate_loss_model(double p, double q, std::uint64_t packets, std::uint64_t seed,
                                                std::vector<LossTraceRecord>* trace = nullptr) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in (0, 1]");
  if (packets < kMinValidationPackets) throw std::invalid_argument("packet count must be at least 100000");

  LossValidationReport r;
  r.p = p;
  r.q = q;
  r.packets = packets;
  r.seed = seed;

  RngStream rng(seed, "loss/n1->n2");
  auto records = generate_gilbert_trace(GilbertElliottModel(p, q), rng, packets);
  std::unique_ptr<bool[]> flags(new bool[records.size()]);
  for (std::size_t i = 0; i < records.size(); ++i) flags[i] = records[i].dropped;
  r.stats = analyze_drops(std::span<const bool>(flags.get(), records.size()));
  if (trace) *trace = std::move(records);

  r.analytic_plr = steady_state_plr(p, q);
  r.analytic_mean_burst = mean_burst_length(q);
  if (r.analytic_plr == 0.0) {
    r.plr_ok = r.stats.drops == 0;
    r.burst_ok = true;
  } else {
    r.plr_relative_error = std::abs(r.stats.plr - r.analytic_plr) / r.analytic_plr;
    r.burst_relative_error = std::abs(r.stats.mean_burst - r.analytic_mean_burst) / r.analytic_mean_burst;
    r.plr_ok = r.plr_relative_error <= kLossRelativeTolerance;
    r.burst_ok = r.burst_relative_error <= kLossRelativeTolerance;
  }

  for (const auto& ref : kReferenceCouples) {
    if (ref.couple.p == p && ref.couple.q == q) {
      r.reference_measured_plr = ref.measured_plr;
      r.reference_standard_error = gilbert_plr_standard_error(p, q, kReferenceRunPackets);
      r.reference_z = (ref.measured_plr - r.analytic_plr) / r.reference_standard_error;
      r.reference_ok = std::abs(r.reference_z) <= kReferenceSigmas;
    }
  }
  return r;
}

inline void print_loss_report(std::ostream& out, const LossValidationReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "gilbert p=%g q=%g packets=%llu seed=%llu\n", r.p, r.q,
                static_cast<unsigned long long>(r.packets), static_cast<unsigned long long>(r.seed));
  out << buf;
  std::snprintf(buf, sizeof buf, "  plr        empirical %.4f%%  analytic %.4f%%  rel.err %.2f%%  [%s]\n",
                100.0 * r.stats.plr, 100.0 * r.analytic_plr, 100.0 * r.plr_relative_error, r.plr_ok ? "ok" : "FAIL");
  out << buf;
  std::snprintf(buf, sizeof buf, "  mean burst empirical %.4f   analytic %.4f   rel.err %.2f%%  [%s]\n",
                r.stats.mean_burst, r.analytic_mean_burst, 100.0 * r.burst_relative_error,
                r.burst_ok ? "ok" : "FAIL");
  out << buf;
  std::snprintf(buf, sizeof buf, "  bursts %llu  burst variance %.4f  P(drop|drop) %.4f  lag-1 autocorr %.4f\n",
                static_cast<unsigned long long>(r.stats.bursts), r.stats.burst_variance, r.stats.drop_after_drop,
                r.stats.lag1_autocorrelation);
  out << buf;
  if (r.reference_measured_plr) {
    std::snprintf(buf, sizeof buf,
                  "  reference sample %.4f%% vs analytic: z = %.2f (SE %.4f%% at %.0f packets, limit %.0f)  [%s]\n",
                  100.0 * *r.reference_measured_plr, r.reference_z, 100.0 * r.reference_standard_error,
                  kReferenceRunPackets, kReferenceSigmas, r.reference_ok ? "ok" : "FAIL");
    out << buf;
  }
}

// Trace audit: a cwnd decrease must sit on a loss record (any class for the
// baseline, Congestion for zigzag). Needs a TraceLevel::Full trace.
inline std::uint64_t count_reduction_violations(std::span<const ControllerTraceRecord> trace, Policy policy,
                                                std::uint32_t flow_count, double initial_cwnd) {
  std::vector<double> last(flow_count, initial_cwnd);
  std::uint64_t violations = 0;
  for (const auto& r : trace) {
    if (r.cwnd < last.at(r.flow)) {
      const bool is_loss = r.event == TraceEventType::Loss;
      const bool allowed = policy == Policy::Baseline ? is_loss
                                                      : is_loss && r.loss_class == LossClass::Congestion;
      if (!allowed) ++violations;
    }
    last[r.flow] = r.cwnd;
  }
  return violations;
}

// Hash of the per-flow cwnd trajectory (time and window of every record).
inline std::uint64_t cwnd_trajectory_hash(std::span<const ControllerTraceRecord> trace) {
  std::uint64_t h = detail::kFnvOffset;
  for (const auto& r : trace) {
    h = detail::fnv1a_value(h, r.t);
    h = detail::fnv1a_value(h, r.flow);
    h = detail::fnv1a_value(h, r.cwnd);
  }
  return h;
}

}  // namespace zzsim
