#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "zzsim/controller.hpp"
#include "zzsim/kernel.hpp"
#include "zzsim/loss_models.hpp"
#include "zzsim/rng.hpp"
#include "zzsim/scenario.hpp"

namespace zzsim {

enum class PacketKind : std::uint8_t { Data, Feedback };

struct Packet {
  std::uint32_t flow = 0;
  // Data: sequence number. Feedback: the data sequence number being acknowledged.
  std::uint64_t seq = 0;
  std::uint32_t size_bytes = 0;
  // Data: transmission time at the sender. Feedback: echo of the data packet's.
  SimTime sent_at = 0.0;
  PacketKind kind = PacketKind::Data;
  // Feedback only: highest data sequence number the receiver has seen.
  std::uint64_t highest_received = 0;
};

enum class DropKind : std::uint8_t { Queue, Wireless };

inline const char* to_string(DropKind k) { return k == DropKind::Queue ? "queue" : "wireless"; }

// FIFO that drops arrivals when full. An empty capacity means unbounded.
class DropTailQueue {
 public:
  explicit DropTailQueue(std::optional<std::size_t> capacity = std::nullopt) : capacity_(capacity) {}

  bool push(const Packet& p) {
    if (capacity_ && packets_.size() >= *capacity_) {
      ++drop_count_;
      return false;
    }
    packets_.push_back(p);
    return true;
  }

  Packet pop() {
    Packet p = packets_.front();
    packets_.pop_front();
    return p;
  }

  bool empty() const { return packets_.empty(); }
  std::size_t occupancy() const { return packets_.size(); }
  std::optional<std::size_t> capacity() const { return capacity_; }
  std::uint64_t drop_count() const { return drop_count_; }

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& p : packets_) f(p);
  }

 private:
  std::optional<std::size_t> capacity_;
  std::deque<Packet> packets_;
  std::uint64_t drop_count_ = 0;
};

struct LinkConfig {
  double bandwidth_bps = 1.0e6;
  double propagation_delay_s = 0.0;

  double serialization_time(std::uint32_t bytes) const {
    return static_cast<double>(bytes) * 8.0 / bandwidth_bps;
  }
};

// Simplex link: a transmit queue, a serializer and a propagation pipe. An
// attached loss model is consulted once per data packet as it starts
// serialization.
class Link {
 public:
  using Receiver = std::function<void(const Packet&)>;
  using DropHandler = std::function<void(const Packet&, DropKind)>;

  Link(Simulator& sim, const char* name, LinkConfig config, std::optional<std::size_t> queue_capacity,
       std::uint32_t flow_count)
      : sim_(sim), name_(name), config_(config), queue_(queue_capacity), in_network_(flow_count, 0) {
    if (!(config.bandwidth_bps > 0.0)) throw std::invalid_argument("link bandwidth must be positive");
    if (!(config.propagation_delay_s >= 0.0)) throw std::invalid_argument("link delay must be non-negative");
  }

  Link(const Link&) = delete;
  Link& operator=(const Link&) = delete;

  void set_receiver(Receiver r) { receiver_ = std::move(r); }
  void set_drop_handler(DropHandler h) { on_drop_ = std::move(h); }

  void attach_loss_model(LinkLossModel model, RngStream rng) {
    loss_ = std::move(model);
    loss_rng_.emplace(std::move(rng));
  }

  void send(const Packet& p) {
    if (busy_) {
      if (!queue_.push(p)) {
        if (on_drop_) on_drop_(p, DropKind::Queue);
        return;
      }
      count_in(p);
      return;
    }
    count_in(p);
    start_transmission(p);
  }

  const LinkConfig& config() const { return config_; }
  const DropTailQueue& queue() const { return queue_; }
  const char* name() const { return name_; }
  bool busy() const { return busy_; }

  // Data packets of `flow` queued, serializing or propagating on this link.
  std::uint64_t in_network(std::uint32_t flow) const { return in_network_.at(flow); }

  // One entry per data packet offered to the loss model: 1 = dropped.
  const std::vector<std::uint8_t>& loss_decisions() const { return loss_decisions_; }

 private:
  void count_in(const Packet& p) {
    if (p.kind == PacketKind::Data) ++in_network_.at(p.flow);
  }
  void count_out(const Packet& p) {
    if (p.kind == PacketKind::Data) --in_network_.at(p.flow);
  }

  void start_transmission(const Packet& p) {
    busy_ = true;
    bool lost = false;
    if (p.kind == PacketKind::Data && loss_.enabled()) {
      lost = loss_.should_drop(*loss_rng_);
      loss_decisions_.push_back(lost ? 1 : 0);
    }
    sim_.schedule_in(config_.serialization_time(p.size_bytes), name_, "tx_done", [this, p, lost] {
      busy_ = false;
      if (lost) {
        count_out(p);
        if (on_drop_) on_drop_(p, DropKind::Wireless);
      } else {
        sim_.schedule_in(config_.propagation_delay_s, name_, "arrive", [this, p] {
          count_out(p);
          if (receiver_) receiver_(p);
        });
      }
      if (!queue_.empty()) start_transmission(queue_.pop());
    });
  }

  Simulator& sim_;
  const char* name_;
  LinkConfig config_;
  DropTailQueue queue_;
  LinkLossModel loss_;
  std::optional<RngStream> loss_rng_;
  bool busy_ = false;
  std::vector<std::uint64_t> in_network_;
  std::vector<std::uint8_t> loss_decisions_;
  Receiver receiver_;
  DropHandler on_drop_;
};

struct DeliveryRecord {
  SimTime t;
  std::uint32_t flow;
  std::uint64_t seq;
  std::uint32_t bytes;
};

struct DropRecord {
  SimTime t;
  std::uint32_t flow;
  std::uint64_t seq;
  DropKind kind;
};

enum class TraceEventType : std::uint8_t { Ack, Loss };

inline const char* to_string(TraceEventType e) { return e == TraceEventType::Ack ? "ack" : "loss"; }

struct ControllerTraceRecord {
  SimTime t;
  std::uint32_t flow;
  double cwnd;
  Phase phase;
  TraceEventType event;
  std::optional<LossClass> loss_class;  // loss records only
  std::uint32_t n;                      // packets in the loss event; 0 for acks
  double rott_i;
  double rott_mean;
  double rott_dev;
};

enum class TraceLevel { None, LossesOnly, Full };

struct FlowCounters {
  std::uint64_t generated = 0;
  std::uint64_t app_drops = 0;  // discarded at a full application buffer
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t wireless_drops = 0;
  std::uint64_t queue_drops = 0;
  std::uint64_t in_flight_at_end = 0;
  std::uint64_t backlog_at_end = 0;
  std::uint64_t loss_events = 0;  // gap-detected events plus timeouts
  std::uint64_t timeouts = 0;
  std::uint64_t packets_declared_lost = 0;
  std::uint64_t congestion_events = 0;  // copied from the controller
  std::uint64_t wireless_events = 0;    // copied from the controller
};

struct RunOptions {
  TraceLevel trace = TraceLevel::Full;
  std::ostream* event_log = nullptr;
};

struct RunResult {
  Scenario scenario;
  std::vector<DeliveryRecord> deliveries;
  std::vector<DropRecord> drops;
  std::vector<ControllerTraceRecord> controller_trace;
  std::vector<FlowCounters> flows;
  std::vector<std::uint8_t> wireless_decisions;
  std::uint64_t events_dispatched = 0;
  std::uint64_t event_hash = 0;

  std::uint64_t total_congestion_events() const {
    std::uint64_t n = 0;
    for (const auto& f : flows) n += f.congestion_events;
    return n;
  }
  std::uint64_t total_wireless_events() const {
    std::uint64_t n = 0;
    for (const auto& f : flows) n += f.wireless_events;
    return n;
  }
  std::uint64_t total_loss_events() const {
    std::uint64_t n = 0;
    for (const auto& f : flows) n += f.loss_events;
    return n;
  }
};

// Number of later packets that must be acknowledged before a missing one is
// declared lost.
inline constexpr std::uint32_t kDupFeedbackThreshold = 3;
inline constexpr double kInitialRto = 1.0;

// Sender endpoint: CBR application buffer, congestion controller, feedback
// processing, gap-based loss detection and the retransmission-free timer.
class FlowSender {
 public:
  FlowSender(Simulator& sim, std::uint32_t flow, const Scenario& scenario, Link& first_hop,
             FlowCounters& counters, std::vector<ControllerTraceRecord>& trace, TraceLevel level)
      : sim_(sim),
        flow_(flow),
        packet_size_(scenario.packet_size_bytes),
        app_buffer_(scenario.app_buffer_pkts),
        controller_(scenario.controller_config()),
        link_(first_hop),
        counters_(counters),
        trace_(trace),
        level_(level) {}

  FlowSender(const FlowSender&) = delete;
  FlowSender& operator=(const FlowSender&) = delete;

  // The application hands one packet to the transport.
  void on_generate() {
    ++counters_.generated;
    if (app_buffer_ && backlog_ >= *app_buffer_ && outstanding_.size() >= controller_.allowed_in_flight()) {
      ++counters_.app_drops;
      return;
    }
    ++backlog_;
    try_send();
  }

  void on_feedback(const Packet& fb) {
    const auto it = outstanding_.find(fb.seq);
    if (it == outstanding_.end()) return;  // already declared lost
    const double rtt = sim_.now() - it->second.sent_at;
    outstanding_.erase(it);

    controller_.on_ack(1, RttSample{rtt});
    update_rto(rtt);
    if (level_ == TraceLevel::Full) record(TraceEventType::Ack, std::nullopt, 0);

    detect_losses(fb.seq);
    restart_timer();
    try_send();
  }

  const CongestionController& controller() const { return controller_; }
  std::uint64_t backlog() const { return backlog_; }
  std::size_t outstanding() const { return outstanding_.size(); }

  void finish() {
    counters_.backlog_at_end = backlog_;
    counters_.congestion_events = controller_.congestion_events();
    counters_.wireless_events = controller_.wireless_events();
  }

 private:
  struct InFlight {
    SimTime sent_at;
    std::uint32_t later_acks = 0;
  };

  void try_send() {
    while (backlog_ > 0 && outstanding_.size() < controller_.allowed_in_flight()) {
      --backlog_;
      Packet p;
      p.flow = flow_;
      p.seq = next_seq_++;
      p.size_bytes = packet_size_;
      p.sent_at = sim_.now();
      p.kind = PacketKind::Data;
      outstanding_.emplace(p.seq, InFlight{p.sent_at});
      ++counters_.sent;
      link_.send(p);
    }
    if (!outstanding_.empty() && !sim_.is_pending(timer_)) arm_timer();
  }

  // Every outstanding packet below `acked_seq` has one more later packet
  // acknowledged. Contiguous runs that reach the threshold form one event each.
  void detect_losses(std::uint64_t acked_seq) {
    std::vector<std::uint64_t> lost;
    for (auto it = outstanding_.begin(); it != outstanding_.end() && it->first < acked_seq;) {
      if (++it->second.later_acks >= kDupFeedbackThreshold) {
        lost.push_back(it->first);
        it = outstanding_.erase(it);
      } else {
        ++it;
      }
    }
    std::size_t i = 0;
    while (i < lost.size()) {
      std::size_t j = i + 1;
      while (j < lost.size() && lost[j] == lost[j - 1] + 1) ++j;
      deliver_loss_event(static_cast<std::uint32_t>(j - i));
      i = j;
    }
  }

  void deliver_loss_event(std::uint32_t n) {
    LossEvent ev{n, controller_.estimator().last(), sim_.now()};
    const LossClass cls = controller_.on_loss_event(ev);
    ++counters_.loss_events;
    counters_.packets_declared_lost += n;
    if (level_ != TraceLevel::None) record(TraceEventType::Loss, cls, n);
  }

  void on_timeout() {
    if (outstanding_.empty()) return;
    const auto n = static_cast<std::uint32_t>(outstanding_.size());
    outstanding_.clear();
    controller_.on_timeout();
    ++counters_.loss_events;
    ++counters_.timeouts;
    counters_.packets_declared_lost += n;
    if (level_ != TraceLevel::None) record(TraceEventType::Loss, LossClass::Congestion, n);
    try_send();
  }

  void update_rto(double rtt) {
    if (!have_rtt_) {
      srtt_ = rtt;
      rttvar_ = rtt / 2.0;
      have_rtt_ = true;
      return;
    }
    rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(srtt_ - rtt);
    srtt_ = 0.875 * srtt_ + 0.125 * rtt;
  }

  double rto() const { return have_rtt_ ? 2.0 * srtt_ + 4.0 * rttvar_ : kInitialRto; }

  void arm_timer() {
    timer_ = sim_.schedule_in(rto(), "sender", "timeout", [this] { on_timeout(); });
  }

  void restart_timer() {
    sim_.cancel(timer_);
    timer_ = {};
    if (!outstanding_.empty()) arm_timer();
  }

  void record(TraceEventType type, std::optional<LossClass> cls, std::uint32_t n) {
    const auto& est = controller_.estimator();
    trace_.push_back(ControllerTraceRecord{sim_.now(), flow_, controller_.cwnd(), controller_.phase(), type, cls, n,
                                           est.last(), est.mean(), est.dev()});
  }

  Simulator& sim_;
  std::uint32_t flow_;
  std::uint32_t packet_size_;
  std::optional<std::uint32_t> app_buffer_;
  CongestionController controller_;
  Link& link_;
  FlowCounters& counters_;
  std::vector<ControllerTraceRecord>& trace_;
  TraceLevel level_;

  std::uint64_t backlog_ = 0;
  std::uint64_t next_seq_ = 0;
  std::map<std::uint64_t, InFlight> outstanding_;
  EventHandle timer_;
  bool have_rtt_ = false;
  double srtt_ = 0.0;
  double rttvar_ = 0.0;
};

// The reference wired-cum-wireless topology with one sender/receiver pair per
// flow. Senders sit at n0, receivers at n2; n1 hosts the bottleneck queue.
class Network {
 public:
  explicit Network(const Scenario& scenario, RunOptions options = {})
      : scenario_(scenario), options_(options) {
    validate(scenario_);
    const auto& topo = scenario_.topology;
    const std::uint32_t flows = scenario_.flow_count;
    const LinkConfig wired{topo.wired_bandwidth_bps, topo.wired_delay_s};
    const LinkConfig wireless{topo.wireless_bandwidth_bps, topo.wireless_delay_s};

    n0_n1_ = std::make_unique<Link>(sim_, "n0->n1", wired, std::nullopt, flows);
    n1_n2_ = std::make_unique<Link>(sim_, "n1->n2", wireless, scenario_.queue_capacity_pkts, flows);
    n2_n1_ = std::make_unique<Link>(sim_, "n2->n1", wireless, std::nullopt, flows);
    n1_n0_ = std::make_unique<Link>(sim_, "n1->n0", wired, std::nullopt, flows);
    if (scenario_.loss.kind != LossKind::None) {
      n1_n2_->attach_loss_model(scenario_.loss.make_model(), RngStream(scenario_.seed, "loss/n1->n2"));
    }

    result_.scenario = scenario_;
    result_.flows.resize(flows);
    highest_received_.assign(flows, 0);
    senders_.reserve(flows);
    for (std::uint32_t f = 0; f < flows; ++f) {
      senders_.push_back(std::make_unique<FlowSender>(sim_, f, scenario_, *n0_n1_, result_.flows[f],
                                                      result_.controller_trace, options_.trace));
    }

    n0_n1_->set_receiver([this](const Packet& p) { n1_n2_->send(p); });
    n1_n2_->set_receiver([this](const Packet& p) { on_data_at_receiver(p); });
    n2_n1_->set_receiver([this](const Packet& p) { n1_n0_->send(p); });
    n1_n0_->set_receiver([this](const Packet& p) { senders_.at(p.flow)->on_feedback(p); });
    n1_n2_->set_drop_handler([this](const Packet& p, DropKind kind) {
      auto& c = result_.flows.at(p.flow);
      (kind == DropKind::Queue ? c.queue_drops : c.wireless_drops)++;
      result_.drops.push_back(DropRecord{sim_.now(), p.flow, p.seq, kind});
    });

    const double interval = static_cast<double>(scenario_.packet_size_bytes) * 8.0 / scenario_.per_flow_rate_bps();
    for (std::uint32_t f = 0; f < flows; ++f) {
      RngStream jitter(scenario_.seed, "start_jitter/" + std::to_string(f));
      const double start = jitter.uniform(0.0, scenario_.start_jitter_s);
      schedule_cbr(f, start, interval, 0);
    }
    sim_.set_event_log(options_.event_log);
  }

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  RunResult run() {
    sim_.run_until(scenario_.duration_s);
    for (std::uint32_t f = 0; f < scenario_.flow_count; ++f) {
      senders_[f]->finish();
      auto& c = result_.flows[f];
      c.in_flight_at_end = n0_n1_->in_network(f) + n1_n2_->in_network(f);
    }
    result_.wireless_decisions = n1_n2_->loss_decisions();
    result_.events_dispatched = sim_.dispatched_total();
    result_.event_hash = sim_.log_hash();
    return std::move(result_);
  }

  Simulator& simulator() { return sim_; }
  const Link& wired_forward() const { return *n0_n1_; }
  const Link& bottleneck() const { return *n1_n2_; }
  const Link& wireless_reverse() const { return *n2_n1_; }
  const Link& wired_reverse() const { return *n1_n0_; }
  const FlowSender& sender(std::uint32_t flow) const { return *senders_.at(flow); }
  std::size_t flow_count() const { return senders_.size(); }
  const Scenario& scenario() const { return scenario_; }

 private:
  void schedule_cbr(std::uint32_t flow, double start, double interval, std::uint64_t k) {
    const double at = start + static_cast<double>(k) * interval;
    if (at > scenario_.duration_s) return;
    sim_.schedule(at, "cbr", "generate", [this, flow, start, interval, k] {
      senders_[flow]->on_generate();
      schedule_cbr(flow, start, interval, k + 1);
    });
  }

  void on_data_at_receiver(const Packet& p) {
    auto& c = result_.flows.at(p.flow);
    ++c.delivered;
    result_.deliveries.push_back(DeliveryRecord{sim_.now(), p.flow, p.seq, p.size_bytes});
    auto& highest = highest_received_.at(p.flow);
    if (p.seq > highest) highest = p.seq;

    Packet fb;
    fb.flow = p.flow;
    fb.seq = p.seq;
    fb.size_bytes = scenario_.feedback_size_bytes;
    fb.sent_at = p.sent_at;
    fb.kind = PacketKind::Feedback;
    fb.highest_received = highest;
    n2_n1_->send(fb);
  }

  Scenario scenario_;
  RunOptions options_;
  Simulator sim_;
  std::unique_ptr<Link> n0_n1_;
  std::unique_ptr<Link> n1_n2_;
  std::unique_ptr<Link> n2_n1_;
  std::unique_ptr<Link> n1_n0_;
  std::vector<std::unique_ptr<FlowSender>> senders_;
  std::vector<std::uint64_t> highest_received_;
  RunResult result_;
};

inline std::unique_ptr<Network> build_reference_topology(const Scenario& scenario, RunOptions options = {}) {
  return std::make_unique<Network>(scenario, options);
}

inline RunResult run_flow_set(const Scenario& scenario, RunOptions options = {}) {
  Network net(scenario, options);
  return net.run();
}

}  // namespace zzsim
