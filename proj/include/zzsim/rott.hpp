#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace zzsim {

inline constexpr double kDefaultRottAlpha = 0.125;

struct RttSample {
  double rtt;  // seconds
};

// Sender-side relative one-way trip time: half the measured round trip.
inline double estimate_rott(RttSample sample) {
  if (!(sample.rtt > 0.0)) throw std::invalid_argument("rtt sample must be positive");
  return sample.rtt / 2.0;
}

inline void validate_rott_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("alpha must lie in (0, 0.5) so that 1 - 2*alpha stays positive");
  }
}

// Exponential mean and mean deviation of ROTT samples.
//
//   mean <- (1 - a) * mean + a * rott_i
//   dev  <- (1 - 2a) * dev + 2a * |rott_i - mean|
//
// The mean is updated first and the deviation uses the updated mean. The first
// sample seeds mean = rott_i, dev = 0.
class RottEstimator {
 public:
  explicit RottEstimator(double alpha = kDefaultRottAlpha) : alpha_(alpha) { validate_rott_alpha(alpha); }

  // Resumes from an existing state.
  RottEstimator(double alpha, double mean, double dev, std::uint64_t sample_count = 1)
      : alpha_(alpha), mean_(mean), dev_(dev), last_(mean), count_(sample_count) {
    validate_rott_alpha(alpha);
    if (dev < 0.0) throw std::invalid_argument("rott deviation must be non-negative");
  }

  void update(double rott_i) {
    if (!(rott_i > 0.0)) throw std::invalid_argument("rott sample must be positive");
    if (count_ == 0) {
      mean_ = rott_i;
      dev_ = 0.0;
    } else {
      mean_ = (1.0 - alpha_) * mean_ + alpha_ * rott_i;
      dev_ = (1.0 - 2.0 * alpha_) * dev_ + 2.0 * alpha_ * std::abs(rott_i - mean_);
    }
    last_ = rott_i;
    ++count_;
  }

  bool ready() const { return count_ > 0; }
  double alpha() const { return alpha_; }
  double mean() const { return mean_; }
  double dev() const { return dev_; }
  // Most recent sample fed to the estimator.
  double last() const { return last_; }
  std::uint64_t sample_count() const { return count_; }

 private:
  double alpha_;
  double mean_ = 0.0;
  double dev_ = 0.0;
  double last_ = 0.0;
  std::uint64_t count_ = 0;
};

}  // namespace zzsim
