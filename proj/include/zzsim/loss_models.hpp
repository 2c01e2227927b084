#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "zzsim/rng.hpp"

namespace zzsim {

class UndefinedChainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class ChannelState { Good, Bad };

inline const char* to_string(ChannelState s) { return s == ChannelState::Good ? "good" : "bad"; }

// Two-state Gilbert channel: Good never drops, Bad always drops. Each packet
// first advances the chain one step, then is dropped iff the new state is Bad.
class GilbertElliottModel {
 public:
  GilbertElliottModel(double p, double q, ChannelState initial = ChannelState::Good)
      : p_(p), q_(q), state_(initial) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gilbert p must lie in [0, 1]");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("gilbert q must lie in [0, 1]");
  }

  bool should_drop(RngStream& rng) {
    const double u = rng.uniform();
    if (state_ == ChannelState::Good) {
      if (u < p_) state_ = ChannelState::Bad;
    } else {
      if (u < q_) state_ = ChannelState::Good;
    }
    return state_ == ChannelState::Bad;
  }

  double p() const { return p_; }
  double q() const { return q_; }
  ChannelState state() const { return state_; }

 private:
  double p_;
  double q_;
  ChannelState state_;
};

class UniformLossModel {
 public:
  explicit UniformLossModel(double plr) : plr_(plr) {
    if (!(plr >= 0.0 && plr <= 1.0)) throw std::invalid_argument("uniform plr must lie in [0, 1]");
  }

  bool should_drop(RngStream& rng) { return rng.uniform() < plr_; }

  double plr() const { return plr_; }

 private:
  double plr_;
};

struct NoLoss {
  bool should_drop(RngStream&) { return false; }
};

// Loss process attached to one link direction.
class LinkLossModel {
 public:
  LinkLossModel() = default;
  LinkLossModel(GilbertElliottModel m) : model_(m) {}  // NOLINT(google-explicit-constructor)
  LinkLossModel(UniformLossModel m) : model_(m) {}     // NOLINT(google-explicit-constructor)

  bool should_drop(RngStream& rng) {
    return std::visit([&](auto& m) { return m.should_drop(rng); }, model_);
  }

  bool enabled() const { return !std::holds_alternative<NoLoss>(model_); }

  // Gilbert state after the last decision; Uniform/none report "n/a".
  const char* state_label() const {
    if (const auto* g = std::get_if<GilbertElliottModel>(&model_)) return to_string(g->state());
    return "n/a";
  }

 private:
  std::variant<NoLoss, GilbertElliottModel, UniformLossModel> model_;
};

// Stationary probability of the Bad state, p / (p + q).
inline double steady_state_plr(double p, double q) {
  if (p + q <= 0.0) throw UndefinedChainError("p = q = 0: the chain never leaves its initial state");
  return p / (p + q);
}

// Expected sojourn in the Bad state (geometric with success probability q).
inline double mean_burst_length(double q) {
  if (q <= 0.0) throw UndefinedChainError("q = 0: bursts never end");
  return 1.0 / q;
}

// Standard error of the empirical loss rate of an n-packet Gilbert trace.
// Uses the lag correlation lambda = 1 - p - q of the two-state chain.
inline double gilbert_plr_standard_error(double p, double q, double n) {
  const double pi = steady_state_plr(p, q);
  const double lambda = 1.0 - p - q;
  if (lambda >= 1.0) throw UndefinedChainError("degenerate chain");
  return std::sqrt(pi * (1.0 - pi) / n * (1.0 + lambda) / (1.0 - lambda));
}

struct DropStatistics {
  std::uint64_t packets = 0;
  std::uint64_t drops = 0;
  double plr = 0.0;
  std::uint64_t bursts = 0;
  double mean_burst = 0.0;
  double burst_variance = 0.0;
  // P(drop at i+1 | drop at i)
  double drop_after_drop = 0.0;
  double lag1_autocorrelation = 0.0;
};

inline DropStatistics analyze_drops(std::span<const bool> drops) {
  DropStatistics s;
  s.packets = drops.size();
  if (drops.empty()) return s;

  std::vector<std::uint64_t> bursts;
  std::uint64_t run = 0;
  std::uint64_t pairs_dd = 0;
  std::uint64_t drops_with_successor = 0;
  for (std::size_t i = 0; i < drops.size(); ++i) {
    if (drops[i]) {
      ++s.drops;
      ++run;
      if (i + 1 < drops.size()) {
        ++drops_with_successor;
        if (drops[i + 1]) ++pairs_dd;
      }
    } else if (run > 0) {
      bursts.push_back(run);
      run = 0;
    }
  }
  if (run > 0) bursts.push_back(run);

  const double n = static_cast<double>(s.packets);
  s.plr = static_cast<double>(s.drops) / n;
  s.bursts = bursts.size();
  if (!bursts.empty()) {
    double sum = 0.0;
    for (auto b : bursts) sum += static_cast<double>(b);
    s.mean_burst = sum / static_cast<double>(bursts.size());
    double ss = 0.0;
    for (auto b : bursts) ss += (static_cast<double>(b) - s.mean_burst) * (static_cast<double>(b) - s.mean_burst);
    s.burst_variance = bursts.size() > 1 ? ss / static_cast<double>(bursts.size() - 1) : 0.0;
  }
  if (drops_with_successor > 0) {
    s.drop_after_drop = static_cast<double>(pairs_dd) / static_cast<double>(drops_with_successor);
  }

  const double var = s.plr * (1.0 - s.plr);
  if (var > 0.0 && drops.size() > 1) {
    double cov = 0.0;
    for (std::size_t i = 0; i + 1 < drops.size(); ++i) {
      cov += ((drops[i] ? 1.0 : 0.0) - s.plr) * ((drops[i + 1] ? 1.0 : 0.0) - s.plr);
    }
    cov /= static_cast<double>(drops.size() - 1);
    s.lag1_autocorrelation = cov / var;
  }
  return s;
}

struct LossTraceRecord {
  std::uint64_t index;
  bool dropped;
  ChannelState state;
};

// index,dropped,state
inline void write_loss_trace(std::ostream& out, std::span<const LossTraceRecord> records) {
  out << "index,dropped,state\n";
  for (const auto& r : records) {
    out << r.index << ',' << (r.dropped ? 1 : 0) << ',' << to_string(r.state) << '\n';
  }
}

inline std::vector<LossTraceRecord> generate_gilbert_trace(GilbertElliottModel model, RngStream& rng,
                                                           std::uint64_t count) {
  std::vector<LossTraceRecord> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const bool d = model.should_drop(rng);
    out.push_back({i, d, model.state()});
  }
  return out;
}

}  // namespace zzsim
