#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "zzsim/kernel.hpp"
#include "zzsim/rott.hpp"

namespace zzsim {

enum class LossClass { Wireless, Congestion };

inline const char* to_string(LossClass c) { return c == LossClass::Wireless ? "wireless" : "congestion"; }

// How loss events longer than four packets are treated.
enum class LargeBurstRule {
  ExtendFourthThreshold,  // n >= 4 all use the n = 4 threshold
  AlwaysCongestion,       // only n = 4 has a threshold; n >= 5 is congestion
};

struct LossEvent {
  std::uint32_t n = 1;            // consecutive packets lost
  double rott_at_detection = 0;   // rott_i, seconds
  SimTime detected_at = 0;
};

class EstimatorNotReady : public std::logic_error {
 public:
  EstimatorNotReady() : std::logic_error("ROTT estimator has no samples; loss cannot be classified") {}
};

// ROTT below which an n-packet loss is attributed to the wireless link, or
// nullopt when no threshold applies.
inline std::optional<double> wireless_threshold(std::uint32_t n, double mean, double dev,
                                                LargeBurstRule rule = LargeBurstRule::ExtendFourthThreshold) {
  switch (n) {
    case 0:
      return std::nullopt;
    case 1:
      return mean - dev;
    case 2:
      return mean - 0.5 * dev;
    case 3:
      return mean;
    case 4:
      return mean + 0.5 * dev;
    default:
      if (rule == LargeBurstRule::ExtendFourthThreshold) return mean + 0.5 * dev;
      return std::nullopt;
  }
}

inline LossClass classify_loss(const LossEvent& event, const RottEstimator& estimator,
                               LargeBurstRule rule = LargeBurstRule::ExtendFourthThreshold) {
  if (event.n < 1) throw std::invalid_argument("loss event must contain at least one packet");
  if (!estimator.ready()) throw EstimatorNotReady();
  const auto threshold = wireless_threshold(event.n, estimator.mean(), estimator.dev(), rule);
  if (threshold && event.rott_at_detection < *threshold) return LossClass::Wireless;
  return LossClass::Congestion;
}

}  // namespace zzsim
