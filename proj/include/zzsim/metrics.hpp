#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zzsim/network.hpp"
#include "zzsim/scenario.hpp"

namespace zzsim {

class PairingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Payload bits delivered in (warmup, duration] divided by the window length.
// `flow` restricts the sum to one flow.
inline double mean_throughput(std::span<const DeliveryRecord> deliveries, double warmup, double duration,
                              std::optional<std::uint32_t> flow = std::nullopt) {
  if (!(duration > warmup)) throw std::invalid_argument("duration must exceed warmup");
  double bits = 0.0;
  for (const auto& d : deliveries) {
    if (d.t <= warmup || d.t > duration) continue;
    if (flow && d.flow != *flow) continue;
    bits += static_cast<double>(d.bytes) * 8.0;
  }
  return bits / (duration - warmup);
}

inline double mean_throughput(const RunResult& run) {
  return mean_throughput(run.deliveries, run.scenario.warmup_s, run.scenario.duration_s);
}

// Per-bucket delivered rate. Buckets tile [0, duration]; the last one may be
// narrower when duration is not a multiple of the width.
struct ThroughputSeries {
  double bucket_width = 1.0;
  double duration = 0.0;
  std::vector<std::vector<double>> per_flow;  // [flow][bucket], bits/s
  std::vector<double> aggregate;              // [bucket], bits/s

  std::size_t bucket_count() const { return aggregate.size(); }
  double bucket_start(std::size_t i) const { return static_cast<double>(i) * bucket_width; }
  double bucket_end(std::size_t i) const { return std::min(duration, bucket_start(i + 1)); }
};

inline ThroughputSeries throughput_series(std::span<const DeliveryRecord> deliveries, std::uint32_t flow_count,
                                          double duration, double bucket_width = 1.0) {
  if (!(bucket_width > 0.0)) throw std::invalid_argument("bucket width must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  ThroughputSeries s;
  s.bucket_width = bucket_width;
  s.duration = duration;
  const auto buckets = static_cast<std::size_t>(std::ceil(duration / bucket_width));
  s.per_flow.assign(flow_count, std::vector<double>(buckets, 0.0));
  s.aggregate.assign(buckets, 0.0);
  for (const auto& d : deliveries) {
    if (d.t < 0.0 || d.t > duration || d.flow >= flow_count) continue;
    auto b = static_cast<std::size_t>(d.t / bucket_width);
    if (b >= buckets) b = buckets - 1;  // t == duration
    s.per_flow[d.flow][b] += static_cast<double>(d.bytes) * 8.0;
  }
  for (std::size_t b = 0; b < buckets; ++b) {
    const double width = s.bucket_end(b) - s.bucket_start(b);
    double total = 0.0;
    for (auto& flow : s.per_flow) {
      flow[b] /= width;
      total += flow[b];
    }
    s.aggregate[b] = total;
  }
  return s;
}

inline double throughput_increase_pct(double zigzag, double baseline) {
  if (!(baseline > 0.0)) throw std::domain_error("throughput increase undefined for a zero baseline");
  return 100.0 * (zigzag - baseline) / baseline;
}

// Achievable ceiling: the offered aggregate, or the bottleneck when the
// offered load exceeds it.
inline double utilization_ceiling(double offered_bps, double bottleneck_bps) {
  return std::min(offered_bps, bottleneck_bps);
}

inline double bandwidth_utilization(double mean_bps, double offered_bps, double bottleneck_bps) {
  if (!(offered_bps > 0.0) || !(bottleneck_bps > 0.0)) throw std::invalid_argument("rates must be positive");
  return 100.0 * mean_bps / utilization_ceiling(offered_bps, bottleneck_bps);
}

inline double bandwidth_utilization(double mean_bps, const Scenario& s) {
  return bandwidth_utilization(mean_bps, s.aggregate_rate_bps, s.topology.bottleneck_bps());
}

struct ExperimentResult {
  Scenario scenario;
  double mean_throughput_bps = 0.0;
  double bw_utilization_pct = 0.0;
  std::uint64_t congestion_events = 0;
  std::uint64_t wireless_events = 0;
  std::uint64_t loss_events = 0;
};

inline ExperimentResult summarize_run(const RunResult& run) {
  ExperimentResult r;
  r.scenario = run.scenario;
  r.mean_throughput_bps = mean_throughput(run);
  r.bw_utilization_pct = bandwidth_utilization(r.mean_throughput_bps, run.scenario);
  r.congestion_events = run.total_congestion_events();
  r.wireless_events = run.total_wireless_events();
  r.loss_events = run.total_loss_events();
  return r;
}

// One row of the comparison table: a baseline and a zigzag run of the same
// scenario and seed.
struct SummaryRow {
  Scenario scenario;  // policy field is not meaningful here
  ExperimentResult baseline;
  ExperimentResult zigzag;
  double throughput_increase_pct = 0.0;
};

// The wireless link's per-packet decisions must agree over the prefix both
// runs consumed.
inline bool loss_traces_agree(const RunResult& a, const RunResult& b) {
  const auto n = std::min(a.wireless_decisions.size(), b.wireless_decisions.size());
  return std::equal(a.wireless_decisions.begin(), a.wireless_decisions.begin() + static_cast<std::ptrdiff_t>(n),
                    b.wireless_decisions.begin());
}

inline SummaryRow summarize(const RunResult& baseline, const RunResult& zigzag) {
  if (baseline.scenario.policy != Policy::Baseline || zigzag.scenario.policy != Policy::ZigZag) {
    throw PairingError("summary expects one baseline and one zigzag run");
  }
  if (!baseline.scenario.same_experiment(zigzag.scenario)) {
    throw PairingError("baseline and zigzag runs describe different scenarios");
  }
  if (!loss_traces_agree(baseline, zigzag)) {
    throw PairingError("baseline and zigzag runs saw different wireless loss patterns");
  }
  SummaryRow row;
  row.scenario = baseline.scenario;
  row.baseline = summarize_run(baseline);
  row.zigzag = summarize_run(zigzag);
  row.throughput_increase_pct =
      row.baseline.mean_throughput_bps > 0.0
          ? throughput_increase_pct(row.zigzag.mean_throughput_bps, row.baseline.mean_throughput_bps)
          : std::nan("");
  return row;
}

}  // namespace zzsim
