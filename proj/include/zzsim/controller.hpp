#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "zzsim/classifier.hpp"
#include "zzsim/rott.hpp"

namespace zzsim {

enum class Policy { Baseline, ZigZag };
enum class Phase { SlowStart, CongestionAvoidance };

inline const char* to_string(Policy p) { return p == Policy::Baseline ? "baseline" : "zigzag"; }
inline const char* to_string(Phase p) { return p == Phase::SlowStart ? "slow_start" : "congestion_avoidance"; }

inline Policy parse_policy(const std::string& s) {
  if (s == "baseline") return Policy::Baseline;
  if (s == "zigzag") return Policy::ZigZag;
  throw std::invalid_argument("unknown policy '" + s + "' (expected baseline or zigzag)");
}

inline constexpr double kMinCwnd = 1.0;
inline constexpr double kMinSsthresh = 2.0;

struct ControllerConfig {
  Policy policy = Policy::Baseline;
  double alpha = kDefaultRottAlpha;
  double initial_cwnd = 2.0;
  double initial_ssthresh = std::numeric_limits<double>::infinity();
  LargeBurstRule large_burst = LargeBurstRule::ExtendFourthThreshold;
};

// Window-based TCP-like controller. The baseline policy halves on every loss
// event; the ZigZag policy halves only on events it classifies as congestion.
class CongestionController {
 public:
  explicit CongestionController(ControllerConfig config = {})
      : config_(config),
        cwnd_(config.initial_cwnd),
        ssthresh_(config.initial_ssthresh),
        estimator_(config.alpha) {
    if (!(config.initial_cwnd >= kMinCwnd)) throw std::invalid_argument("initial cwnd must be >= 1");
    if (!(config.initial_ssthresh >= kMinSsthresh)) throw std::invalid_argument("initial ssthresh must be >= 2");
  }

  // Window growth for `acked` newly acknowledged packets plus one RTT sample.
  void on_ack(std::uint32_t acked, RttSample sample) {
    if (acked < 1) throw std::invalid_argument("ack must cover at least one packet");
    estimator_.update(estimate_rott(sample));
    if (phase() == Phase::SlowStart) {
      cwnd_ += static_cast<double>(acked);
    } else {
      cwnd_ += static_cast<double>(acked) / cwnd_;
    }
  }

  LossClass on_loss_event(const LossEvent& event) {
    if (event.n < 1) throw std::invalid_argument("loss event must contain at least one packet");
    LossClass cls = LossClass::Congestion;
    // An unsampled estimator cannot classify; congestion is the safe answer.
    if (config_.policy == Policy::ZigZag && estimator_.ready()) {
      cls = classify_loss(event, estimator_, config_.large_burst);
    }
    if (cls == LossClass::Congestion) {
      reduce();
    } else {
      ++wireless_events_;
    }
    return cls;
  }

  // Feedback silence longer than the retransmission timer. Always congestion.
  void on_timeout() { reduce(); }

  std::uint32_t allowed_in_flight() const {
    return static_cast<std::uint32_t>(std::max(kMinCwnd, std::floor(cwnd_)));
  }

  Phase phase() const { return cwnd_ < ssthresh_ ? Phase::SlowStart : Phase::CongestionAvoidance; }
  double cwnd() const { return cwnd_; }
  double ssthresh() const { return ssthresh_; }
  Policy policy() const { return config_.policy; }
  const ControllerConfig& config() const { return config_; }
  const RottEstimator& estimator() const { return estimator_; }
  std::uint64_t congestion_events() const { return congestion_events_; }
  std::uint64_t wireless_events() const { return wireless_events_; }

 private:
  void reduce() {
    ssthresh_ = std::max(cwnd_ / 2.0, kMinSsthresh);
    // A loss never grows the window, even below the ssthresh floor.
    cwnd_ = std::max(std::min(cwnd_, ssthresh_), kMinCwnd);
    ++congestion_events_;
  }

  ControllerConfig config_;
  double cwnd_;
  double ssthresh_;
  RottEstimator estimator_;
  std::uint64_t congestion_events_ = 0;
  std::uint64_t wireless_events_ = 0;
};

}  // namespace zzsim
