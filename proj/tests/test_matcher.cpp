#include <catch2/catch_amalgamated.hpp>

#include "mlids/matcher.hpp"
#include "mlids/rng.hpp"
#include "mlids/trafficgen.hpp"

using namespace mlids;

namespace {

Rule content_rule(uint32_t sid, Protocol proto, PortMatcher dst_port,
                  std::vector<ContentPattern> contents) {
  Rule r;
  r.sid = sid;
  r.proto = proto;
  r.dst_port = dst_port;
  r.message = "rule " + std::to_string(sid);
  r.contents = std::move(contents);
  return r;
}

Packet tcp_packet(uint16_t dst_port, std::string payload) {
  Packet p;
  p.proto = IpProto::tcp;
  p.src_ip = 0x01020304;
  p.dst_ip = 0x05060708;
  p.src_port = 40000;
  p.dst_port = dst_port;
  p.payload = std::move(payload);
  return p;
}

// Small random instances for oracle equivalence; mirrors the generator used by
// the acceptance suite but kept local so the unit test stands alone.
RuleSet random_small_ruleset(SplitMix64& g, size_t max_rules) {
  RuleSet rs;
  rs.name = "oracle";
  size_t n = 1 + g.bounded(max_rules);
  static const char alphabet[] = "abcABC";
  for (size_t i = 0; i < n; ++i) {
    Rule r;
    r.sid = static_cast<uint32_t>(i + 1);
    switch (g.bounded(4)) {
      case 0: r.proto = Protocol::tcp; break;
      case 1: r.proto = Protocol::udp; break;
      case 2: r.proto = Protocol::icmp; break;
      default: r.proto = Protocol::ip; break;
    }
    if (g.bounded(3) == 0)
      r.src_addr = AddrMatcher::cidr(static_cast<uint32_t>(g.next()),
                                     static_cast<uint8_t>(g.bounded(33)));
    if (g.bounded(3) == 0) r.dst_addr = AddrMatcher::exact(static_cast<uint32_t>(g.bounded(4)));
    if (g.bounded(3) == 0) r.src_port = PortMatcher::exact(static_cast<uint16_t>(g.bounded(4)));
    if (g.bounded(3) == 0) {
      uint16_t lo = static_cast<uint16_t>(g.bounded(4));
      r.dst_port = PortMatcher::between(lo, static_cast<uint16_t>(lo + g.bounded(4)));
    }
    r.message = "r";
    size_t contents = g.bounded(4);
    for (size_t k = 0; k < contents; ++k) {
      ContentPattern c;
      size_t len = 1 + g.bounded(5);
      c.bytes.resize(len);
      for (char& b : c.bytes) b = alphabet[g.bounded(sizeof(alphabet) - 1)];
      c.nocase = g.bounded(2) == 0;
      r.contents.push_back(std::move(c));
    }
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

Packet random_small_packet(SplitMix64& g) {
  Packet p;
  switch (g.bounded(3)) {
    case 0: p.proto = IpProto::tcp; break;
    case 1: p.proto = IpProto::udp; break;
    default: p.proto = IpProto::icmp; break;
  }
  p.src_ip = static_cast<uint32_t>(g.bounded(4));
  p.dst_ip = static_cast<uint32_t>(g.bounded(4));
  if (p.proto != IpProto::icmp) {
    p.src_port = static_cast<uint16_t>(g.bounded(4));
    p.dst_port = static_cast<uint16_t>(g.bounded(8));
  }
  static const char alphabet[] = "abcABC";
  size_t len = g.bounded(257);
  p.payload.resize(len);
  for (char& c : p.payload) c = alphabet[g.bounded(sizeof(alphabet) - 1)];
  return p;
}

}  // namespace

TEST_CASE("substring present on the right port") {
  RuleSet rs;
  rs.rules.push_back(content_rule(7, Protocol::tcp, PortMatcher::exact(80), {{"../", false}}));
  CompiledMatcher m{rs};
  CHECK(m.match(tcp_packet(80, "GET /../../x")).sids == std::vector<uint32_t>{7});
  CHECK(m.match(tcp_packet(8080, "GET /../../x")).empty());
}

TEST_CASE("empty ruleset matches nothing") {
  CompiledMatcher m{RuleSet{}};
  CHECK(m.match(tcp_packet(80, "anything")).empty());
  CHECK(m.distinct_pattern_count() == 0);
}

TEST_CASE("single rule compiles to a single-pattern automaton") {
  RuleSet rs;
  rs.rules.push_back(content_rule(1, Protocol::tcp, PortMatcher::any_port(), {{"abc", false}}));
  CompiledMatcher m{rs};
  CHECK(m.distinct_pattern_count() == 1);
  CHECK(m.match(tcp_packet(1, "xxabcxx")).contains(1));

  // duplicate patterns across rules share one automaton entry
  rs.rules.push_back(content_rule(2, Protocol::tcp, PortMatcher::any_port(), {{"abc", false}}));
  CompiledMatcher m2{rs};
  CHECK(m2.distinct_pattern_count() == 1);
  CHECK(m2.match(tcp_packet(1, "abc")).sids == std::vector<uint32_t>{1, 2});
}

TEST_CASE("empty payload semantics") {
  RuleSet rs;
  rs.rules.push_back(content_rule(1, Protocol::tcp, PortMatcher::any_port(), {{"x", false}}));
  rs.rules.push_back(content_rule(2, Protocol::tcp, PortMatcher::any_port(), {}));
  CompiledMatcher m{rs};
  MatchResult res = m.match(tcp_packet(80, ""));
  CHECK_FALSE(res.contains(1));  // no substring in an empty payload
  CHECK(res.contains(2));        // header-only rule fires on header alone
  CHECK(match_naive(rs, tcp_packet(80, "")) == res);
}

TEST_CASE("nocase folds ASCII only") {
  RuleSet rs;
  rs.rules.push_back(content_rule(3, Protocol::tcp, PortMatcher::any_port(), {{"AbC", true}}));
  rs.rules.push_back(content_rule(4, Protocol::tcp, PortMatcher::any_port(), {{"AbC", false}}));
  CompiledMatcher m{rs};
  MatchResult res = m.match(tcp_packet(80, "xxabcxx"));
  CHECK(res.contains(3));
  CHECK_FALSE(res.contains(4));
  CHECK(m.match(tcp_packet(80, "xxAbCxx")).sids == std::vector<uint32_t>{3, 4});
}

TEST_CASE("all contents must appear, in any order") {
  RuleSet rs;
  rs.rules.push_back(
      content_rule(9, Protocol::tcp, PortMatcher::any_port(), {{"one", false}, {"two", false}}));
  CompiledMatcher m{rs};
  CHECK(m.match(tcp_packet(80, "two...one")).contains(9));
  CHECK(m.match(tcp_packet(80, "onetwo")).contains(9));
  CHECK_FALSE(m.match(tcp_packet(80, "one only")).contains(9));
}

TEST_CASE("protocol ip accepts every transport") {
  RuleSet rs;
  rs.rules.push_back(content_rule(5, Protocol::ip, PortMatcher::any_port(), {}));
  CompiledMatcher m{rs};
  for (IpProto proto : {IpProto::tcp, IpProto::udp, IpProto::icmp}) {
    Packet p;
    p.proto = proto;
    CHECK(m.match(p).contains(5));
  }
}

TEST_CASE("icmp rules ignore port matchers") {
  Rule r = content_rule(6, Protocol::icmp, PortMatcher::exact(80), {});
  r.src_port = PortMatcher::exact(1234);
  RuleSet rs{"x", {r}};
  CompiledMatcher m{rs};
  Packet p;
  p.proto = IpProto::icmp;  // ports are zero
  CHECK(m.match(p).contains(6));
}

TEST_CASE("a 3211-rule synthetic set compiles and matches") {
  RuleSet rs = generate_synthetic_ruleset(3211, 99);
  CompiledMatcher m{rs};
  CHECK(m.distinct_pattern_count() > 3211);
  Packet p = packet_from_rule(rs.rules[17], 0);
  CHECK(m.match(p).contains(rs.rules[17].sid));
}

TEST_CASE("oracle equivalence on random small instances") {
  for (uint64_t seed = 0; seed < 300; ++seed) {
    SplitMix64 g(seed);
    RuleSet rs = random_small_ruleset(g, 20);
    CompiledMatcher m{rs};
    for (int k = 0; k < 4; ++k) {
      Packet p = random_small_packet(g);
      MatchResult fast = m.match(p);
      MatchResult slow = match_naive(rs, p);
      REQUIRE(fast == slow);
    }
  }
}

TEST_CASE("monotonicity: a ruleset superset never matches less") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 g(seed + 5000);
    RuleSet big = random_small_ruleset(g, 16);
    RuleSet small;
    small.name = big.name;
    for (const Rule& r : big.rules)
      if (g.bounded(2) == 0) small.rules.push_back(r);
    CompiledMatcher mb{big}, ms{small};
    for (int k = 0; k < 3; ++k) {
      Packet p = random_small_packet(g);
      for (uint32_t sid : ms.match(p).sids) CHECK(mb.match(p).contains(sid));
    }
  }
}

TEST_CASE("union-completeness: partitioned matchers cover the full set") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 g(seed + 9000);
    RuleSet rs = random_small_ruleset(g, 16);
    std::vector<uint32_t> subset;
    for (uint32_t sid : rs.sids())
      if (g.bounded(2) == 0) subset.push_back(sid);
    auto [a, b] = split(rs, subset);
    CompiledMatcher mf{rs}, ma{a}, mb{b};
    for (int k = 0; k < 3; ++k) {
      Packet p = random_small_packet(g);
      MatchResult full = mf.match(p);
      std::vector<uint32_t> merged = ma.match(p).sids;
      for (uint32_t sid : mb.match(p).sids) merged.push_back(sid);
      std::sort(merged.begin(), merged.end());
      CHECK(full.sids == merged);
    }
  }
}
