#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlids/alert_store.hpp"
#include "mlids/matcher.hpp"
#include "mlids/packets.hpp"
#include "mlids/rules.hpp"

// Multi-layer pipeline in exact virtual time. Every layer receives a copy of
// every packet (tap model) and runs as an independent single FIFO server with
// a bounded queue: a packet arriving while the layer holds queue_capacity
// packets (in service + waiting) is dropped unmatched; otherwise it waits,
// is serviced for packet_cost/service_rate seconds, and its matches are
// appended to the alert log. Rulesets can be swapped atomically between
// services; an in-service packet always completes under the epoch it started
// with. The whole simulation is deterministic: no wall clock anywhere.

namespace mlids {

enum class CostMode { per_rule_scan, automaton };

struct CostParams {
  CostMode mode = CostMode::per_rule_scan;
  double alpha = 100.0;  // fixed per-packet cost
  double beta = 1.0;     // per-payload-byte cost
  double gamma = 0.5;    // database-size coupling (automaton mode)
};

/// Service cost of one packet against a layer's compiled ruleset, in cost
/// units. per_rule_scan charges each header-accepted rule a full payload scan;
/// automaton charges one payload pass plus a pattern-count coupling term.
inline double packet_cost(const Packet& p, const CostParams& c, const CompiledMatcher& m) {
  double len = static_cast<double>(p.payload.size());
  switch (c.mode) {
    case CostMode::per_rule_scan:
      return c.alpha + c.beta * len * static_cast<double>(m.header_match_count(p));
    case CostMode::automaton:
      return c.alpha + c.beta * len +
             c.gamma * len * std::log2(1.0 + static_cast<double>(m.distinct_pattern_count()));
  }
  return c.alpha;
}

enum class LayerRole { primary, complementary };

inline std::string_view to_string(LayerRole r) {
  return r == LayerRole::primary ? "primary" : "complementary";
}

struct LayerConfig {
  std::string layer_id;
  LayerRole role = LayerRole::primary;
  RuleSet ruleset;
  double service_rate = 1e8;              // cost units per virtual second, > 0
  std::optional<uint64_t> queue_capacity; // packets in system; nullopt = unbounded
  CostParams cost;
};

struct LayerStats {
  uint64_t received = 0;
  uint64_t analyzed = 0;
  uint64_t dropped = 0;

  double drop_pct() const {
    return received == 0 ? 0.0
                         : 100.0 * static_cast<double>(dropped) / static_cast<double>(received);
  }
};

struct StaleEpochError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownLayerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Engine {
 public:
  using SyncFn = std::function<void(uint64_t now_us, Engine&)>;

  Engine(std::vector<LayerConfig> layers, AlertLog& log) : log_(&log) {
    if (layers.empty()) throw std::invalid_argument("engine needs at least one layer");
    for (LayerConfig& cfg : layers) {
      if (cfg.service_rate <= 0) throw std::invalid_argument("service_rate must be > 0");
      if (cfg.queue_capacity && *cfg.queue_capacity < 1)
        throw std::invalid_argument("queue_capacity must be >= 1");
      for (const LayerState& l : layers_)
        if (l.cfg.layer_id == cfg.layer_id)
          throw std::invalid_argument("duplicate layer id " + cfg.layer_id);
      LayerState st;
      st.cfg = std::move(cfg);
      st.matcher = std::make_shared<CompiledMatcher>(st.cfg.ruleset);
      layers_.push_back(std::move(st));
    }
  }

  size_t layer_count() const { return layers_.size(); }
  const std::string& layer_id(size_t i) const { return layers_.at(i).cfg.layer_id; }
  const LayerStats& stats_of(std::string_view id) const { return find(id).stats; }
  const RuleSet& ruleset_of(std::string_view id) const { return find(id).cfg.ruleset; }
  uint64_t epoch_of(std::string_view id) const { return find(id).epoch; }
  LayerRole role_of(std::string_view id) const { return find(id).cfg.role; }

  void reset_stats() {
    for (LayerState& l : layers_) l.stats = {};
  }

  /// Installs a new ruleset for a layer. Takes effect for the next packet that
  /// enters service; the packet currently in service (if any) finishes under
  /// the epoch it started with.
  void swap_ruleset(std::string_view layer_id, RuleSet rs, uint64_t epoch) {
    LayerState& l = find(layer_id);
    if (epoch <= l.epoch)
      throw StaleEpochError("stale epoch " + std::to_string(epoch) + " for layer " +
                            std::string(layer_id) + " (current " + std::to_string(l.epoch) + ")");
    l.matcher = std::make_shared<CompiledMatcher>(rs);
    l.cfg.ruleset = std::move(rs);
    l.epoch = epoch;
  }

  void run(const PacketStream& stream) { run_impl(stream, 0, nullptr); }

  /// Like run(), but invokes `fn` at every whole multiple of interval_us that
  /// falls inside the stream's time window (between packet services).
  void run(const PacketStream& stream, uint64_t sync_interval_us, const SyncFn& fn) {
    if (sync_interval_us == 0) throw std::invalid_argument("sync interval must be >= 1");
    run_impl(stream, sync_interval_us, &fn);
  }

 private:
  struct LayerState {
    LayerConfig cfg;
    std::shared_ptr<const CompiledMatcher> matcher;
    uint64_t epoch = 0;
    LayerStats stats;
    // run-time queue state
    std::deque<uint32_t> waiting;
    bool busy = false;
    uint32_t service_pkt = 0;
    std::shared_ptr<const CompiledMatcher> service_matcher;
  };

  // Event ordering at equal time: completions, then sync, then arrivals, then
  // insertion order. A packet arriving exactly at a sync tick therefore sees
  // the freshly swapped ruleset.
  struct Event {
    double t;
    uint8_t prio;  // 0 completion, 1 sync, 2 arrival
    uint64_t seq;
    uint32_t layer;
    uint32_t pkt;

    bool operator>(const Event& o) const {
      if (t != o.t) return t > o.t;
      if (prio != o.prio) return prio > o.prio;
      return seq > o.seq;
    }
  };

  LayerState& find(std::string_view id) {
    for (LayerState& l : layers_)
      if (l.cfg.layer_id == id) return l;
    throw UnknownLayerError("unknown layer " + std::string(id));
  }
  const LayerState& find(std::string_view id) const {
    return const_cast<Engine*>(this)->find(id);
  }

  void start_service(LayerState& l, double now, const PacketStream& stream,
                     std::priority_queue<Event, std::vector<Event>, std::greater<Event>>& events,
                     uint64_t& seq) {
    l.service_pkt = l.waiting.front();
    l.waiting.pop_front();
    l.busy = true;
    l.service_matcher = l.matcher;  // bind the epoch at service start
    const Packet& p = stream.packets[l.service_pkt];
    double cost = packet_cost(p, l.cfg.cost, *l.service_matcher);
    double dur_us = cost / l.cfg.service_rate * 1e6;
    events.push({now + dur_us, 0, seq++,
                 static_cast<uint32_t>(&l - layers_.data()), l.service_pkt});
  }

  void run_impl(const PacketStream& stream, uint64_t interval_us, const SyncFn* fn) {
    if (!is_time_ordered(stream))
      throw std::invalid_argument("packet stream is not time-ordered");
    for (LayerState& l : layers_) {
      l.waiting.clear();
      l.busy = false;
      l.service_matcher = nullptr;
    }

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    uint64_t seq = 0;
    for (uint32_t pi = 0; pi < stream.packets.size(); ++pi)
      for (uint32_t li = 0; li < layers_.size(); ++li)
        events.push({static_cast<double>(stream.packets[pi].ts_us), 2, seq++, li, pi});
    if (fn && !stream.packets.empty()) {
      uint64_t last_ts = stream.packets.back().ts_us;
      for (uint64_t t = interval_us; t <= last_ts; t += interval_us)
        events.push({static_cast<double>(t), 1, seq++, 0, 0});
    }

    while (!events.empty()) {
      Event ev = events.top();
      events.pop();
      if (ev.prio == 1) {
        (*fn)(static_cast<uint64_t>(ev.t), *this);
        continue;
      }
      LayerState& l = layers_[ev.layer];
      if (ev.prio == 0) {  // service completion
        ++l.stats.analyzed;
        const Packet& p = stream.packets[ev.pkt];
        MatchResult mr = l.service_matcher->match(p);
        for (uint32_t sid : mr.sids)
          log_->append({p.ts_us, sid, l.cfg.layer_id, p.proto, p.src_ip, p.dst_ip, p.src_port,
                        p.dst_port});
        l.busy = false;
        l.service_matcher = nullptr;
        if (!l.waiting.empty()) start_service(l, ev.t, stream, events, seq);
      } else {  // arrival
        ++l.stats.received;
        uint64_t occupancy = l.waiting.size() + (l.busy ? 1 : 0);
        if (l.cfg.queue_capacity && occupancy >= *l.cfg.queue_capacity) {
          ++l.stats.dropped;
        } else {
          l.waiting.push_back(ev.pkt);
          if (!l.busy) start_service(l, ev.t, stream, events, seq);
        }
      }
    }
    log_->flush();
  }

  std::vector<LayerState> layers_;
  AlertLog* log_;
};

}  // namespace mlids
