#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "zzsim/classifier.hpp"
#include "zzsim/controller.hpp"
#include "zzsim/loss_models.hpp"

namespace zzsim {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class LossKind { None, Gilbert, Uniform };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::None:
      return "none";
    case LossKind::Gilbert:
      return "gilbert";
    case LossKind::Uniform:
      return "uniform";
  }
  return "?";
}

inline LossKind parse_loss_kind(const std::string& s) {
  if (s == "none") return LossKind::None;
  if (s == "gilbert") return LossKind::Gilbert;
  if (s == "uniform") return LossKind::Uniform;
  throw ConfigError("loss.kind", "unknown loss kind '" + s + "' (expected gilbert, uniform or none)");
}

struct LossSpec {
  LossKind kind = LossKind::None;
  double p = 0.0;
  double q = 1.0;
  double plr = 0.0;

  static LossSpec none() { return {}; }
  static LossSpec gilbert(double p, double q) { return {LossKind::Gilbert, p, q, 0.0}; }
  static LossSpec uniform(double plr) { return {LossKind::Uniform, 0.0, 1.0, plr}; }

  // Long-run drop fraction of this loss setting.
  double nominal_plr() const {
    switch (kind) {
      case LossKind::Gilbert:
        return steady_state_plr(p, q);
      case LossKind::Uniform:
        return plr;
      case LossKind::None:
        break;
    }
    return 0.0;
  }

  LinkLossModel make_model() const {
    switch (kind) {
      case LossKind::Gilbert:
        return GilbertElliottModel(p, q);
      case LossKind::Uniform:
        return UniformLossModel(plr);
      case LossKind::None:
        break;
    }
    return {};
  }

  bool operator==(const LossSpec&) const = default;
};

// Three nodes in series: n0 -- wired duplex -- n1 -- two wireless simplex links -- n2.
struct TopologyConfig {
  double wired_bandwidth_bps = 2.0e6;
  double wired_delay_s = 0.100;
  double wireless_bandwidth_bps = 1.3e6;
  double wireless_delay_s = 0.200;

  double bottleneck_bps() const { return wireless_bandwidth_bps; }
  bool operator==(const TopologyConfig&) const = default;
};

struct Scenario {
  std::uint32_t flow_count = 1;
  double aggregate_rate_bps = 1.0e6;
  LossSpec loss;
  Policy policy = Policy::Baseline;
  double duration_s = 500.0;
  double warmup_s = 100.0;
  std::uint64_t seed = 1;
  std::uint32_t queue_capacity_pkts = 50;
  std::uint32_t packet_size_bytes = 1000;
  std::uint32_t feedback_size_bytes = 40;
  double alpha = kDefaultRottAlpha;
  LargeBurstRule large_burst = LargeBurstRule::ExtendFourthThreshold;
  double start_jitter_s = 1.0;
  // Packets the application may queue while the window is closed; nullopt is
  // unbounded. Arrivals to a full buffer are discarded.
  std::optional<std::uint32_t> app_buffer_pkts = 20;
  double initial_cwnd = 2.0;
  double initial_ssthresh = std::numeric_limits<double>::infinity();
  TopologyConfig topology;

  double per_flow_rate_bps() const { return aggregate_rate_bps / static_cast<double>(flow_count); }

  ControllerConfig controller_config() const {
    return ControllerConfig{policy, alpha, initial_cwnd, initial_ssthresh, large_burst};
  }

  // Equal in every respect except the congestion-control policy.
  bool same_experiment(const Scenario& other) const {
    Scenario a = *this;
    Scenario b = other;
    a.policy = b.policy = Policy::Baseline;
    return a == b;
  }

  bool operator==(const Scenario&) const = default;
};

inline void validate(const Scenario& s) {
  if (s.flow_count < 1) throw ConfigError("flow_count", "must be at least 1");
  if (!(s.aggregate_rate_bps > 0.0)) throw ConfigError("aggregate_rate_bps", "must be positive");
  if (!(s.duration_s > 0.0)) throw ConfigError("duration_s", "must be positive");
  if (!(s.warmup_s >= 0.0)) throw ConfigError("warmup_s", "must be non-negative");
  if (s.duration_s <= s.warmup_s) throw ConfigError("duration_s", "must exceed warmup_s");
  if (s.queue_capacity_pkts < 1) throw ConfigError("queue_capacity_pkts", "must be at least 1");
  if (s.packet_size_bytes < 1) throw ConfigError("packet_size_bytes", "must be at least 1");
  if (s.feedback_size_bytes < 1) throw ConfigError("feedback_size_bytes", "must be at least 1");
  if (!(s.alpha > 0.0 && s.alpha < 0.5)) throw ConfigError("alpha", "must lie in (0, 0.5)");
  if (!(s.start_jitter_s >= 0.0)) throw ConfigError("start_jitter_s", "must be non-negative");
  if (!(s.initial_cwnd >= kMinCwnd)) throw ConfigError("initial_cwnd_pkts", "must be at least 1");
  if (!(s.initial_ssthresh >= kMinSsthresh)) throw ConfigError("initial_ssthresh_pkts", "must be at least 2");
  const auto& t = s.topology;
  if (!(t.wired_bandwidth_bps > 0.0)) throw ConfigError("wired_bandwidth_bps", "must be positive");
  if (!(t.wireless_bandwidth_bps > 0.0)) throw ConfigError("wireless_bandwidth_bps", "must be positive");
  if (!(t.wired_delay_s >= 0.0)) throw ConfigError("wired_delay_s", "must be non-negative");
  if (!(t.wireless_delay_s >= 0.0)) throw ConfigError("wireless_delay_s", "must be non-negative");
  switch (s.loss.kind) {
    case LossKind::Gilbert:
      if (!(s.loss.p >= 0.0 && s.loss.p <= 1.0)) throw ConfigError("loss.p", "must lie in [0, 1]");
      if (!(s.loss.q > 0.0 && s.loss.q <= 1.0)) throw ConfigError("loss.q", "must lie in (0, 1]");
      break;
    case LossKind::Uniform:
      if (!(s.loss.plr >= 0.0 && s.loss.plr <= 1.0)) throw ConfigError("loss.plr", "must lie in [0, 1]");
      break;
    case LossKind::None:
      break;
  }
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    if (v.empty() || v.front() == '-') throw std::invalid_argument(v);
    std::size_t used = 0;
    const auto u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
}

inline std::uint32_t parse_u32(const std::string& key, const std::string& v) {
  const auto u = parse_uint(key, v);
  if (u > std::numeric_limits<std::uint32_t>::max()) throw ConfigError(key, "value out of range");
  return static_cast<std::uint32_t>(u);
}

}  // namespace detail

// Reads "key = value" lines; '#' starts a comment. Duplicate keys are errors.
inline std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value', got '" + line + "'");
    }
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "missing key");
    if (!out.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }
  return out;
}

// Applies one scenario key. Returns false for keys it does not know.
inline bool apply_scenario_key(Scenario& s, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_u32;
  if (key == "flow_count") {
    s.flow_count = parse_u32(key, value);
  } else if (key == "aggregate_rate_bps") {
    s.aggregate_rate_bps = parse_double(key, value);
  } else if (key == "loss.kind") {
    s.loss.kind = parse_loss_kind(value);
  } else if (key == "loss.p") {
    s.loss.p = parse_double(key, value);
  } else if (key == "loss.q") {
    s.loss.q = parse_double(key, value);
  } else if (key == "loss.plr") {
    s.loss.plr = parse_double(key, value);
  } else if (key == "policy") {
    try {
      s.policy = parse_policy(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "duration_s") {
    s.duration_s = parse_double(key, value);
  } else if (key == "warmup_s") {
    s.warmup_s = parse_double(key, value);
  } else if (key == "seed") {
    s.seed = detail::parse_uint(key, value);
  } else if (key == "queue_capacity_pkts") {
    s.queue_capacity_pkts = parse_u32(key, value);
  } else if (key == "packet_size_bytes") {
    s.packet_size_bytes = parse_u32(key, value);
  } else if (key == "feedback_size_bytes") {
    s.feedback_size_bytes = parse_u32(key, value);
  } else if (key == "alpha") {
    s.alpha = parse_double(key, value);
  } else if (key == "large_burst_rule") {
    if (value == "extend") {
      s.large_burst = LargeBurstRule::ExtendFourthThreshold;
    } else if (value == "congestion") {
      s.large_burst = LargeBurstRule::AlwaysCongestion;
    } else {
      throw ConfigError(key, "expected 'extend' or 'congestion', got '" + value + "'");
    }
  } else if (key == "start_jitter_s") {
    s.start_jitter_s = parse_double(key, value);
  } else if (key == "app_buffer_pkts") {
    if (value == "unbounded") {
      s.app_buffer_pkts.reset();
    } else {
      s.app_buffer_pkts = parse_u32(key, value);
    }
  } else if (key == "initial_cwnd_pkts") {
    s.initial_cwnd = parse_double(key, value);
  } else if (key == "initial_ssthresh_pkts") {
    s.initial_ssthresh = value == "inf" ? std::numeric_limits<double>::infinity() : parse_double(key, value);
  } else if (key == "wired_bandwidth_bps") {
    s.topology.wired_bandwidth_bps = parse_double(key, value);
  } else if (key == "wired_delay_s") {
    s.topology.wired_delay_s = parse_double(key, value);
  } else if (key == "wireless_bandwidth_bps") {
    s.topology.wireless_bandwidth_bps = parse_double(key, value);
  } else if (key == "wireless_delay_s") {
    s.topology.wireless_delay_s = parse_double(key, value);
  } else {
    return false;
  }
  return true;
}

// A scenario file. `policy = paired` requests a baseline/zigzag pair.
struct ScenarioConfig {
  Scenario scenario;
  bool paired = false;
};

inline ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig cfg;
  for (const auto& [key, value] : read_key_values(in)) {
    if (key == "policy" && value == "paired") {
      cfg.paired = true;
      continue;
    }
    if (!apply_scenario_key(cfg.scenario, key, value)) throw ConfigError(key, "unknown key");
  }
  validate(cfg.scenario);
  return cfg;
}

inline ScenarioConfig parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return "inf";
  if (v == std::trunc(v) && std::abs(v) < 1e15) {
    char whole[32];
    std::snprintf(whole, sizeof whole, "%.0f", v);
    return whole;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec <= 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

inline std::string to_key_values(const Scenario& s) {
  std::ostringstream o;
  o << "flow_count = " << s.flow_count << '\n'
    << "aggregate_rate_bps = " << format_double(s.aggregate_rate_bps) << '\n'
    << "loss.kind = " << to_string(s.loss.kind) << '\n'
    << "loss.p = " << format_double(s.loss.p) << '\n'
    << "loss.q = " << format_double(s.loss.q) << '\n'
    << "loss.plr = " << format_double(s.loss.plr) << '\n'
    << "policy = " << to_string(s.policy) << '\n'
    << "duration_s = " << format_double(s.duration_s) << '\n'
    << "warmup_s = " << format_double(s.warmup_s) << '\n'
    << "seed = " << s.seed << '\n'
    << "queue_capacity_pkts = " << s.queue_capacity_pkts << '\n'
    << "packet_size_bytes = " << s.packet_size_bytes << '\n'
    << "feedback_size_bytes = " << s.feedback_size_bytes << '\n'
    << "alpha = " << format_double(s.alpha) << '\n'
    << "large_burst_rule = "
    << (s.large_burst == LargeBurstRule::ExtendFourthThreshold ? "extend" : "congestion") << '\n'
    << "start_jitter_s = " << format_double(s.start_jitter_s) << '\n'
    << "app_buffer_pkts = " << (s.app_buffer_pkts ? std::to_string(*s.app_buffer_pkts) : "unbounded") << '\n'
    << "initial_cwnd_pkts = " << format_double(s.initial_cwnd) << '\n'
    << "initial_ssthresh_pkts = " << format_double(s.initial_ssthresh) << '\n'
    << "wired_bandwidth_bps = " << format_double(s.topology.wired_bandwidth_bps) << '\n'
    << "wired_delay_s = " << format_double(s.topology.wired_delay_s) << '\n'
    << "wireless_bandwidth_bps = " << format_double(s.topology.wireless_bandwidth_bps) << '\n'
    << "wireless_delay_s = " << format_double(s.topology.wireless_delay_s) << '\n';
  return o.str();
}

}  // namespace zzsim
