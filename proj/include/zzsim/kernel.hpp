#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace zzsim {

// Virtual time in seconds.
using SimTime = double;

class PastTimeError : public std::logic_error {
 public:
  PastTimeError(SimTime requested, SimTime now)
      : std::logic_error("cannot schedule event at t=" + std::to_string(requested) +
                         " before current clock t=" + std::to_string(now)) {}
};

struct EventHandle {
  std::uint64_t seq = 0;  // 0 never refers to a scheduled event
  bool valid() const { return seq != 0; }
};

namespace detail {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
  return h;
}

template <typename T>
std::uint64_t fnv1a_value(std::uint64_t h, const T& v) {
  return fnv1a(h, &v, sizeof(T));
}

inline std::uint64_t fnv1a_str(std::uint64_t h, const char* s) {
  return fnv1a(h, s, std::strlen(s));
}

}  // namespace detail

// Single-threaded discrete-event engine. Events at equal times fire in
// scheduling order. Component and tag strings must have static storage
// duration; they label the event log only.
class Simulator {
 public:
  using Action = std::function<void()>;

  Simulator() = default;
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimTime now() const { return now_; }

  EventHandle schedule(SimTime at, const char* component, const char* tag, Action action) {
    if (at < now_) throw PastTimeError(at, now_);
    const std::uint64_t seq = next_seq_++;
    heap_.push_back(Entry{at, seq, component, tag, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    pending_.insert(seq);
    return EventHandle{seq};
  }

  EventHandle schedule_in(SimTime delay, const char* component, const char* tag, Action action) {
    return schedule(now_ + delay, component, tag, std::move(action));
  }

  // Returns false when the event already fired or was cancelled.
  bool cancel(EventHandle handle) { return pending_.erase(handle.seq) > 0; }

  bool is_pending(EventHandle handle) const { return pending_.count(handle.seq) > 0; }

  std::size_t pending_count() const { return pending_.size(); }

  // Dispatches every event with fire time <= t_end, then parks the clock at t_end.
  std::uint64_t run_until(SimTime t_end) {
    if (t_end < now_) throw PastTimeError(t_end, now_);
    std::uint64_t dispatched = 0;
    while (!heap_.empty() && heap_.front().at <= t_end) {
      std::pop_heap(heap_.begin(), heap_.end(), Later{});
      Entry entry = std::move(heap_.back());
      heap_.pop_back();
      if (pending_.erase(entry.seq) == 0) continue;  // cancelled
      now_ = entry.at;
      record(entry);
      ++dispatched;
      entry.action();
    }
    now_ = t_end;
    dispatched_total_ += dispatched;
    return dispatched;
  }

  std::uint64_t dispatched_total() const { return dispatched_total_; }

  // Hash over (time bits, seq, component, tag) of every dispatched event.
  std::uint64_t log_hash() const { return log_hash_; }

  // One "time,seq,component,tag" line per dispatched event; nullptr disables.
  void set_event_log(std::ostream* out) { event_log_ = out; }

 private:
  struct Entry {
    SimTime at;
    std::uint64_t seq;
    const char* component;
    const char* tag;
    Action action;
  };

  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  void record(const Entry& e) {
    log_hash_ = detail::fnv1a_value(log_hash_, e.at);
    log_hash_ = detail::fnv1a_value(log_hash_, e.seq);
    log_hash_ = detail::fnv1a_str(log_hash_, e.component);
    log_hash_ = detail::fnv1a_str(log_hash_, e.tag);
    if (event_log_ != nullptr) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", e.at);
      *event_log_ << buf << ',' << e.seq << ',' << e.component << ',' << e.tag << '\n';
    }
  }

  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t dispatched_total_ = 0;
  std::vector<Entry> heap_;
  std::unordered_set<std::uint64_t> pending_;
  std::uint64_t log_hash_ = detail::kFnvOffset;
  std::ostream* event_log_ = nullptr;
};

}  // namespace zzsim
