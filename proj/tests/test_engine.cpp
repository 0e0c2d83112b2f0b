#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mlids/baseline.hpp"
#include "mlids/engine.hpp"
#include "mlids/rng.hpp"
#include "mlids/trafficgen.hpp"
#include "mlids/update_agent.hpp"

using namespace mlids;

namespace {

LayerConfig layer(std::string id, RuleSet rs, double rate, std::optional<uint64_t> cap,
                  LayerRole role = LayerRole::primary) {
  LayerConfig cfg;
  cfg.layer_id = std::move(id);
  cfg.role = role;
  cfg.ruleset = std::move(rs);
  cfg.service_rate = rate;
  cfg.queue_capacity = cap;
  return cfg;
}

PacketStream uniform_stream(size_t n, uint64_t step_us, size_t payload_len) {
  PacketStream s;
  s.label = "uniform";
  for (size_t i = 0; i < n; ++i) {
    Packet p;
    p.ts_us = i * step_us;
    p.proto = IpProto::tcp;
    p.dst_port = 80;
    p.payload.assign(payload_len, 'x');
    s.packets.push_back(std::move(p));
  }
  return s;
}

}  // namespace

TEST_CASE("packet_cost formulas") {
  RuleSet rs = generate_synthetic_ruleset(10, 77);
  CompiledMatcher m{rs};
  Packet empty;
  CHECK(packet_cost(empty, {}, m) == 100.0);  // alpha only for L=0
  CostParams automaton{CostMode::automaton, 100, 1, 0.5};
  CHECK(packet_cost(empty, automaton, m) == 100.0);

  // per_rule_scan: alpha + beta * L * R
  RuleSet ten;
  ten.name = "ten";
  for (uint32_t sid = 1; sid <= 10; ++sid) {
    Rule r;
    r.sid = sid;
    r.proto = Protocol::tcp;
    r.message = "x";
    ten.rules.push_back(r);
  }
  CompiledMatcher mten{ten};
  Packet p;
  p.proto = IpProto::tcp;
  p.payload.assign(100, 'a');
  CHECK(mten.header_match_count(p) == 10);
  CHECK(packet_cost(p, {}, mten) == 1100.0);

  // automaton: alpha + beta*L + gamma*L*log2(1+P)
  double expect = 100.0 + 100.0 + 0.5 * 100.0 * std::log2(1.0 + m.distinct_pattern_count());
  CHECK_THAT(packet_cost(p, automaton, m), Catch::Matchers::WithinRel(expect, 1e-12));
}

TEST_CASE("cost grows with ruleset size under both modes") {
  // benchmark-sized sets: the full master vs its 33-rule primary subset
  RuleSet master = generate_synthetic_ruleset(3211, 5);
  std::vector<uint32_t> first33;
  for (uint32_t sid = 1; sid <= 33; ++sid) first33.push_back(sid);
  auto [primary, complement] = split(master, first33);
  CompiledMatcher mfull{master}, mprim{primary};
  SplitMix64 g(9);
  for (int i = 0; i < 50; ++i) {
    Packet p = packet_from_rule(master.rules[g.bounded(master.size())], 0);
    for (CostMode mode : {CostMode::per_rule_scan, CostMode::automaton}) {
      CostParams c;
      c.mode = mode;
      if (!p.payload.empty()) CHECK(packet_cost(p, c, mfull) > packet_cost(p, c, mprim));
    }
  }
}

TEST_CASE("no contention means no drops") {
  RuleSet rs = baseline_ruleset();
  PacketStream stream = baseline_training_stream();
  AlertLog log;
  Engine engine({layer("wide", rs, 1e12, 1'000'000'000)}, log);
  engine.run(stream);
  const LayerStats& st = engine.stats_of("wide");
  CHECK(st.received == stream.size());
  CHECK(st.analyzed == stream.size());
  CHECK(st.dropped == 0);
  CHECK(st.drop_pct() == 0.0);
  CHECK(log.size() == baseline_total_alerts());
}

TEST_CASE("drop percentages match the reference arithmetic") {
  LayerStats a{182688, 182688 - 15155, 15155};
  CHECK_THAT(a.drop_pct(), Catch::Matchers::WithinAbs(8.296, 0.001));
  LayerStats b{193890, 193890 - 3309, 3309};
  CHECK_THAT(b.drop_pct(), Catch::Matchers::WithinAbs(1.707, 0.001));
  LayerStats zero;
  CHECK(zero.drop_pct() == 0.0);
}

TEST_CASE("bounded queue drops under overload, conservation holds") {
  // 1000-byte payloads, one rule accepting all: cost = 100 + 1000 = wait,
  // per_rule_scan R=1: cost = 100 + 1000*1 = 1100; service 1100/1e6 s = 1100us
  // per packet vs 100us arrivals: heavy overload.
  RuleSet one;
  one.name = "one";
  Rule r;
  r.sid = 1;
  r.proto = Protocol::tcp;
  r.message = "catch-all";
  one.rules.push_back(r);
  PacketStream stream = uniform_stream(1000, 100, 1000);
  AlertLog log;
  Engine engine({layer("hot", one, 1e6, 4)}, log);
  engine.run(stream);
  const LayerStats& st = engine.stats_of("hot");
  CHECK(st.received == 1000);
  CHECK(st.dropped > 0);
  CHECK(st.received == st.analyzed + st.dropped);
  CHECK(log.size() == st.analyzed);  // catch-all rule fires per analyzed packet
}

TEST_CASE("conservation and determinism on random load") {
  RuleSet rs = generate_synthetic_ruleset(50, 4);
  FloodSpec spec;
  spec.rate_pps = 10000;
  spec.duration_us = 300'000;
  spec.attack_fraction = 0.8;
  spec.seed = 15;
  PacketStream stream = generate_flood(rs, spec);

  auto run_once = [&](std::string* alerts_text) {
    AlertLog log;
    Engine engine({layer("a", rs, 5e7, 16), layer("b", rs, 2e8, 2)}, log);
    engine.run(stream);
    for (const std::string& id : {std::string("a"), std::string("b")}) {
      const LayerStats& st = engine.stats_of(id);
      CHECK(st.received == stream.size());
      CHECK(st.received == st.analyzed + st.dropped);
    }
    std::string text;
    for (const Alert& a : log.records()) text += format_alert(a) + "\n";
    *alerts_text = text;
    return std::make_pair(engine.stats_of("a").dropped, engine.stats_of("b").dropped);
  };
  std::string alerts1, alerts2;
  auto d1 = run_once(&alerts1);
  auto d2 = run_once(&alerts2);
  CHECK(d1 == d2);
  CHECK(alerts1 == alerts2);  // bit-identical logs
}

TEST_CASE("drop percentage is monotone in ruleset size") {
  RuleSet big = generate_synthetic_ruleset(120, 6);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    SplitMix64 g(seed);
    std::vector<uint32_t> keep;
    for (uint32_t sid : big.sids())
      if (g.bounded(3) != 0) keep.push_back(sid);
    auto [small, rest] = split(big, keep);
    FloodSpec spec;
    spec.rate_pps = 20000;
    spec.duration_us = 200'000;
    spec.attack_fraction = 0.7;
    spec.seed = seed;
    PacketStream stream = generate_flood(big, spec);
    for (CostMode mode : {CostMode::per_rule_scan, CostMode::automaton}) {
      AlertLog log;
      LayerConfig ls = layer("small", small, 2e7, 8);
      LayerConfig lb = layer("big", big, 2e7, 8);
      ls.cost.mode = mode;
      lb.cost.mode = mode;
      Engine engine({std::move(ls), std::move(lb)}, log);
      engine.run(stream);
      CHECK(engine.stats_of("big").drop_pct() >= engine.stats_of("small").drop_pct());
    }
  }
}

namespace {

// Independent single-layer reference: sequential bounded-FIFO bookkeeping with
// no event queue. Completions at exactly an arrival's timestamp free their
// slot first, matching the engine's event ordering.
std::pair<uint64_t, uint64_t> fifo_oracle(const PacketStream& stream, const LayerConfig& cfg) {
  CompiledMatcher matcher{cfg.ruleset};
  std::vector<double> completions;  // completion time per admitted packet, FIFO order
  size_t done = 0;                  // completions at or before the current arrival
  uint64_t analyzed = 0, dropped = 0;
  for (const Packet& p : stream.packets) {
    double t = static_cast<double>(p.ts_us);
    while (done < completions.size() && completions[done] <= t) ++done;
    uint64_t occupancy = completions.size() - done;
    if (cfg.queue_capacity && occupancy >= *cfg.queue_capacity) {
      ++dropped;
      continue;
    }
    double start = completions.empty() ? t : std::max(t, completions.back());
    double dur = packet_cost(p, cfg.cost, matcher) / cfg.service_rate * 1e6;
    completions.push_back(start + dur);
    ++analyzed;
  }
  return {analyzed, dropped};
}

}  // namespace

TEST_CASE("bounded-queue dynamics agree with an independent reference") {
  RuleSet rs = generate_synthetic_ruleset(30, 44);
  for (uint64_t seed = 0; seed < 40; ++seed) {
    SplitMix64 g(seed + 100);
    PacketStream stream;
    uint64_t ts = 0;
    size_t n = 20 + g.bounded(400);
    for (size_t i = 0; i < n; ++i) {
      ts += g.bounded(3) == 0 ? 0 : g.bounded(1500);  // bursts with exact ties
      if (g.bounded(2))
        stream.packets.push_back(packet_from_rule(rs.rules[g.bounded(rs.size())], ts));
      else {
        Packet p;
        p.ts_us = ts;
        p.proto = IpProto::udp;
        p.dst_port = static_cast<uint16_t>(g.bounded(100));
        p.payload.assign(g.bounded(1200), 'q');
        stream.packets.push_back(std::move(p));
      }
    }
    LayerConfig cfg = layer("ref", rs, 1e6 + static_cast<double>(g.bounded(40'000'000)),
                            1 + g.bounded(8));
    if (g.bounded(5) == 0) cfg.queue_capacity.reset();
    if (g.bounded(2)) cfg.cost.mode = CostMode::automaton;

    auto [want_analyzed, want_dropped] = fifo_oracle(stream, cfg);
    AlertLog log;
    Engine engine({cfg}, log);
    engine.run(stream);
    const LayerStats& st = engine.stats_of("ref");
    CHECK(st.analyzed == want_analyzed);
    CHECK(st.dropped == want_dropped);
    CHECK(st.received == stream.size());
  }
}

TEST_CASE("unordered stream is fatal") {
  PacketStream s;
  s.packets.push_back({100});
  s.packets.push_back({50});
  AlertLog log;
  Engine engine({layer("x", RuleSet{}, 1e6, std::nullopt)}, log);
  CHECK_THROWS_AS(engine.run(s), std::invalid_argument);
}

TEST_CASE("swap_ruleset validates layer and epoch") {
  AlertLog log;
  Engine engine({layer("x", RuleSet{}, 1e6, std::nullopt)}, log);
  CHECK_THROWS_AS(engine.swap_ruleset("nope", RuleSet{}, 1), UnknownLayerError);
  engine.swap_ruleset("x", baseline_ruleset(), 1);
  CHECK(engine.epoch_of("x") == 1);
  CHECK_THROWS_AS(engine.swap_ruleset("x", RuleSet{}, 1), StaleEpochError);
  CHECK(engine.ruleset_of("x").size() == 33);
}

TEST_CASE("swap to an identical ruleset keeps stats continuous") {
  RuleSet rs = baseline_ruleset();
  PacketStream stream = baseline_training_stream();
  uint64_t half_ts = stream.packets[stream.size() / 2].ts_us;
  AlertLog log;
  Engine engine({layer("x", rs, 1e12, std::nullopt)}, log);
  uint64_t interval = half_ts;  // one sync tick mid-stream
  engine.run(stream, interval, [&](uint64_t, Engine& e) {
    if (e.epoch_of("x") == 0) e.swap_ruleset("x", rs, 1);
  });
  const LayerStats& st = engine.stats_of("x");
  CHECK(st.received == stream.size());
  CHECK(st.dropped == 0);
  CHECK(log.size() == baseline_total_alerts());
}

TEST_CASE("mid-stream swap: alerts attribute to exactly one epoch") {
  // one packet per second; swap at t=5s replaces rule 1 with rule 2
  RuleSet before, after;
  before.name = after.name = "swap";
  Rule r1;
  r1.sid = 1;
  r1.proto = Protocol::tcp;
  r1.message = "epoch0";
  Rule r2 = r1;
  r2.sid = 2;
  r2.message = "epoch1";
  before.rules.push_back(r1);
  after.rules.push_back(r2);

  PacketStream stream = uniform_stream(10, 1'000'000, 4);
  AlertLog log;
  Engine engine({layer("x", before, 1e9, std::nullopt)}, log);
  engine.run(stream, 5'000'000, [&](uint64_t now, Engine& e) {
    if (now == 5'000'000) e.swap_ruleset("x", after, 1);
  });
  REQUIRE(log.size() == 10);
  for (const Alert& a : log.records()) {
    if (a.ts_us < 5'000'000) CHECK(a.sid == 1);
    else CHECK(a.sid == 2);  // arrival at the tick sees the new set
  }
}

TEST_CASE("promote-then-replay moves detections to the primary layer") {
  RuleSet master = generate_synthetic_ruleset(20, 8);
  std::vector<uint32_t> initial{1, 2, 3};
  auto [primary0, complement0] = split(master, initial);

  PacketStream replayed;
  replayed.label = "replay";
  const Rule& promoted = *master.find(7);  // initially complementary-only
  for (int i = 0; i < 5; ++i)
    replayed.packets.push_back(packet_from_rule(promoted, 1000 + 100 * uint64_t(i)));

  AlertLog log;
  Engine engine({layer("front", primary0, 1e12, std::nullopt, LayerRole::primary),
                 layer("back", complement0, 1e12, std::nullopt, LayerRole::complementary)},
                log);
  engine.run(replayed);
  auto front_alerts = [&] {
    size_t n = 0;
    for (const Alert& a : log.records())
      if (a.layer_id == "front" && a.sid == 7) ++n;
    return n;
  };
  CHECK(front_alerts() == 0);

  // promotion: sid 7 joins the primary set, leaves the complementary one
  std::vector<uint32_t> wanted{1, 2, 3, 7};
  auto [primary1, complement1] = split(master, wanted);
  engine.swap_ruleset("front", primary1, 1);
  engine.swap_ruleset("back", complement1, 1);
  engine.run(replayed);
  CHECK(front_alerts() == 5);
}
