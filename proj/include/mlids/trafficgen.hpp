#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlids/matcher.hpp"
#include "mlids/packets.hpp"
#include "mlids/rng.hpp"
#include "mlids/rules.hpp"

// Synthetic traffic and rulesets. Attack packets are built by inverting a rule
// (headers chosen to satisfy its predicate, payload = its patterns); benign
// packets draw their payloads from the printable-ASCII range while synthetic
// rule patterns live in 0x80-0xFF, so a benign stream provably cannot trigger
// content rules from a synthetic set. Everything is a pure function of its
// seed; per-packet seeds are derived as SplitMix64::derive(seed, index).

namespace mlids {

inline constexpr uint32_t kDefaultSrcIp = 0x0A000001;  // 10.0.0.1
inline constexpr uint32_t kDefaultDstIp = 0x0A000002;  // 10.0.0.2
inline constexpr uint16_t kDefaultSrcPort = 40000;
inline constexpr uint16_t kDefaultDstPort = 80;

/// A packet guaranteed to trigger `r`: header fields picked to satisfy the
/// rule's predicate, payload = the rule's patterns joined by single 0x20
/// bytes. `seed` is reserved for future variation; construction is fully
/// deterministic in the rule.
inline Packet packet_from_rule(const Rule& r, uint64_t ts_us, uint64_t seed = 0) {
  (void)seed;
  Packet p;
  p.ts_us = ts_us;
  switch (r.proto) {
    case Protocol::tcp: p.proto = IpProto::tcp; break;
    case Protocol::udp: p.proto = IpProto::udp; break;
    case Protocol::icmp: p.proto = IpProto::icmp; break;
    case Protocol::ip: p.proto = IpProto::tcp; break;  // ip accepts any transport
  }
  auto pick_addr = [](const AddrMatcher& m, uint32_t fallback) {
    if (m.any) return fallback;
    return m.addr & m.mask();  // network base satisfies exact and cidr alike
  };
  p.src_ip = pick_addr(r.src_addr, kDefaultSrcIp);
  p.dst_ip = pick_addr(r.dst_addr, kDefaultDstIp);
  if (p.proto == IpProto::icmp) {
    p.src_port = 0;
    p.dst_port = 0;
  } else {
    p.src_port = r.src_port.any ? kDefaultSrcPort : r.src_port.lo;
    p.dst_port = r.dst_port.any ? kDefaultDstPort : r.dst_port.lo;
  }
  for (size_t i = 0; i < r.contents.size(); ++i) {
    if (i > 0) p.payload.push_back('\x20');
    p.payload += r.contents[i].bytes;
  }
  return p;
}

struct BenignGenInfo {
  uint64_t retries = 0;           // regenerations forced by accidental matches
  bool truncated = false;         // payload cleared after exhausting retries
  bool residual_match = false;    // still matches (header-only rules only)
};

/// Random background packet that should not trigger `against`. If a draw
/// matches, it is regenerated with a derived seed up to 3 times, then the
/// payload is truncated to empty (header-only rules may still fire; callers
/// can count those via `info`).
inline Packet generate_benign(uint64_t ts_us, uint64_t seed, const CompiledMatcher& against,
                              BenignGenInfo* info = nullptr) {
  Packet p;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    SplitMix64 g(SplitMix64::derive(seed, static_cast<uint64_t>(attempt)));
    p = Packet{};
    p.ts_us = ts_us;
    switch (g.bounded(3)) {
      case 0: p.proto = IpProto::tcp; break;
      case 1: p.proto = IpProto::udp; break;
      default: p.proto = IpProto::icmp; break;
    }
    p.src_ip = static_cast<uint32_t>(g.next());
    p.dst_ip = static_cast<uint32_t>(g.next());
    if (p.proto != IpProto::icmp) {
      p.src_port = static_cast<uint16_t>(g.range(1024, 65535));
      p.dst_port = static_cast<uint16_t>(g.range(1, 65535));
    }
    size_t len = static_cast<size_t>(g.range(64, 1400));
    p.payload.resize(len);
    for (char& c : p.payload) c = static_cast<char>(0x20 + g.bounded(0x5F));
    if (against.match(p).empty()) return p;
    if (info && attempt < 3) ++info->retries;
  }
  p.payload.clear();
  if (info) {
    info->truncated = true;
    info->residual_match = !against.match(p).empty();
  }
  return p;
}

struct FloodSpec {
  uint64_t rate_pps = 100'000;       // > 0
  uint64_t duration_us = 2'000'000;
  double attack_fraction = 0.9;      // [0, 1]
  uint64_t seed = 42;
};

struct FloodStats {
  uint64_t attack_packets = 0;
  uint64_t benign_packets = 0;
  uint64_t benign_retries = 0;
  uint64_t benign_truncated = 0;
  uint64_t benign_residual_matches = 0;
};

/// Uniformly spaced flood: floor(rate_pps * duration_us / 1e6) packets, each
/// independently an attack (rule drawn uniformly) or benign draw.
inline PacketStream generate_flood(const RuleSet& rs, const FloodSpec& spec,
                                   FloodStats* out_stats = nullptr) {
  if (spec.rate_pps == 0) throw std::invalid_argument("flood rate must be > 0");
  if (spec.attack_fraction < 0.0 || spec.attack_fraction > 1.0)
    throw std::invalid_argument("attack_fraction must be in [0, 1]");
  if (spec.attack_fraction > 0.0 && rs.empty())
    throw std::invalid_argument("attack flood needs a non-empty ruleset");

  CompiledMatcher matcher{rs};  // benign draws are screened against the set
  uint64_t count = spec.rate_pps * spec.duration_us / 1'000'000ULL;
  PacketStream stream;
  stream.label = "flood";
  stream.packets.reserve(count);
  FloodStats fs;
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t ts = i * 1'000'000ULL / spec.rate_pps;
    SplitMix64 g(SplitMix64::derive(spec.seed, i));
    bool attack = g.unit() < spec.attack_fraction;
    if (attack) {
      const Rule& r = rs.rules[g.bounded(rs.rules.size())];
      stream.packets.push_back(packet_from_rule(r, ts, g.next()));
      ++fs.attack_packets;
    } else {
      BenignGenInfo info;
      stream.packets.push_back(generate_benign(ts, g.next(), matcher, &info));
      ++fs.benign_packets;
      fs.benign_retries += info.retries;
      fs.benign_truncated += info.truncated ? 1 : 0;
      fs.benign_residual_matches += info.residual_match ? 1 : 0;
    }
  }
  if (out_stats) *out_stats = fs;
  return stream;
}

/// Deterministic master ruleset of n rules (sids 1..n): random protocols and
/// destination ports, 1-3 content patterns of 4-16 bytes from the 0x80-0xFF
/// alphabet (disjoint from benign payloads by construction).
inline RuleSet generate_synthetic_ruleset(size_t n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("ruleset size must be >= 1");
  RuleSet rs;
  rs.name = "synthetic";
  rs.rules.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    SplitMix64 g(SplitMix64::derive(seed, i));
    Rule r;
    r.sid = static_cast<uint32_t>(i + 1);
    uint64_t roll = g.bounded(100);
    if (roll < 50) r.proto = Protocol::tcp;
    else if (roll < 80) r.proto = Protocol::udp;
    else if (roll < 95) r.proto = Protocol::icmp;
    else r.proto = Protocol::ip;
    if (ports_apply(r.proto) && g.bounded(2) == 0)
      r.dst_port = PortMatcher::exact(static_cast<uint16_t>(g.range(1, 65535)));
    r.message = "synthetic signature " + std::to_string(r.sid);
    size_t patterns = 1 + g.bounded(3);
    for (size_t k = 0; k < patterns; ++k) {
      ContentPattern c;
      size_t len = static_cast<size_t>(g.range(4, 16));
      c.bytes.resize(len);
      for (char& b : c.bytes) b = static_cast<char>(0x80 + g.bounded(0x80));
      c.nocase = g.bounded(10) == 0;
      r.contents.push_back(std::move(c));
    }
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

}  // namespace mlids
