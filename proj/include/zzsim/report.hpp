#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "zzsim/metrics.hpp"
#include "zzsim/network.hpp"

// Delimited-text outputs. Every file has one header row, comma separators,
// period decimal points and a trailing seed column.
namespace zzsim {

namespace detail {

inline std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

inline void write_time_series(std::ostream& out, const ThroughputSeries& series, std::uint64_t seed) {
  out << "t_bucket_start,flow_id,throughput_bps,seed\n";
  for (std::size_t b = 0; b < series.bucket_count(); ++b) {
    const auto t = detail::fixed(series.bucket_start(b), 3);
    for (std::size_t f = 0; f < series.per_flow.size(); ++f) {
      out << t << ',' << f << ',' << detail::fixed(series.per_flow[f][b], 3) << ',' << seed << '\n';
    }
    out << t << ",all," << detail::fixed(series.aggregate[b], 3) << ',' << seed << '\n';
  }
}

inline void write_controller_trace(std::ostream& out, std::span<const ControllerTraceRecord> records,
                                   std::uint64_t seed) {
  out << "t,flow_id,cwnd,phase,event_type,loss_class,n,rott_i,rott_mean,rott_dev,seed\n";
  for (const auto& r : records) {
    out << detail::fixed(r.t, 9) << ',' << r.flow << ',' << detail::fixed(r.cwnd, 6) << ',' << to_string(r.phase)
        << ',' << to_string(r.event) << ',' << (r.loss_class ? to_string(*r.loss_class) : "") << ',' << r.n << ','
        << detail::fixed(r.rott_i, 9) << ',' << detail::fixed(r.rott_mean, 9) << ','
        << detail::fixed(r.rott_dev, 9) << ',' << seed << '\n';
  }
}

inline void write_delivery_trace(std::ostream& out, std::span<const DeliveryRecord> records, std::uint64_t seed) {
  out << "t,flow_id,seq,bytes,seed\n";
  for (const auto& r : records) {
    out << detail::fixed(r.t, 9) << ',' << r.flow << ',' << r.seq << ',' << r.bytes << ',' << seed << '\n';
  }
}

inline void write_drop_trace(std::ostream& out, std::span<const DropRecord> records, std::uint64_t seed) {
  out << "t,flow_id,seq,kind,seed\n";
  for (const auto& r : records) {
    out << detail::fixed(r.t, 9) << ',' << r.flow << ',' << r.seq << ',' << to_string(r.kind) << ',' << seed
        << '\n';
  }
}

inline void write_summary_header(std::ostream& out) {
  out << "flows,loss_kind,loss_p,loss_q,plr_pct,aggregate_rate_bps,"
         "cong_baseline,cong_zigzag,wireless_zigzag,increase_pct,util_baseline_pct,util_zigzag_pct,"
         "mean_tput_baseline_bps,mean_tput_zigzag_bps,seed\n";
}

// Either side may be missing for a single-policy run; its columns stay empty.
inline void write_summary_row(std::ostream& out, const Scenario& s, const ExperimentResult* baseline,
                              const ExperimentResult* zigzag, std::optional<double> increase_pct) {
  const bool gilbert = s.loss.kind == LossKind::Gilbert;
  out << s.flow_count << ',' << to_string(s.loss.kind) << ',' << (gilbert ? format_double(s.loss.p) : "") << ','
      << (gilbert ? format_double(s.loss.q) : "") << ',' << detail::fixed(100.0 * s.loss.nominal_plr(), 4) << ','
      << format_double(s.aggregate_rate_bps) << ','
      << (baseline ? std::to_string(baseline->congestion_events) : "") << ','
      << (zigzag ? std::to_string(zigzag->congestion_events) : "") << ','
      << (zigzag ? std::to_string(zigzag->wireless_events) : "") << ','
      << (increase_pct ? detail::fixed(*increase_pct, 2) : "") << ','
      << (baseline ? detail::fixed(baseline->bw_utilization_pct, 2) : "") << ','
      << (zigzag ? detail::fixed(zigzag->bw_utilization_pct, 2) : "") << ','
      << (baseline ? detail::fixed(baseline->mean_throughput_bps, 1) : "") << ','
      << (zigzag ? detail::fixed(zigzag->mean_throughput_bps, 1) : "") << ',' << s.seed << '\n';
}

inline void write_summary_row(std::ostream& out, const SummaryRow& row) {
  std::optional<double> inc;
  if (!std::isnan(row.throughput_increase_pct)) inc = row.throughput_increase_pct;
  write_summary_row(out, row.scenario, &row.baseline, &row.zigzag, inc);
}

}  // namespace zzsim
