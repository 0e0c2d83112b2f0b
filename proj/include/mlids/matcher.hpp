#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlids/aho_corasick.hpp"
#include "mlids/packets.hpp"
#include "mlids/rules.hpp"

// Decides which rules a packet triggers: a protocol/header prefilter plus one
// multi-pattern payload search shared by all rules. A rule fires when its
// header predicate accepts the packet and every one of its content patterns
// occurs somewhere in the payload (any order, overlaps allowed).
// match_naive() is the independent brute-force reference for the same
// contract.

namespace mlids {

struct MatchResult {
  std::vector<uint32_t> sids;  // ascending, unique

  bool contains(uint32_t sid) const {
    return std::binary_search(sids.begin(), sids.end(), sid);
  }
  bool empty() const { return sids.empty(); }
  bool operator==(const MatchResult&) const = default;
};

inline char ascii_lower(char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : c; }

inline std::string ascii_fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

class CompiledMatcher {
 public:
  explicit CompiledMatcher(RuleSet rs) : rules_(std::move(rs)) {
    std::map<std::string, int> raw_ids, fold_ids;
    compiled_.reserve(rules_.rules.size());
    for (size_t i = 0; i < rules_.rules.size(); ++i) {
      const Rule& r = rules_.rules[i];
      CompiledRule cr;
      for (const ContentPattern& c : r.contents) {
        if (c.nocase) {
          std::string folded = ascii_fold(c.bytes);
          auto [it, fresh] = fold_ids.try_emplace(std::move(folded), -1);
          if (fresh) it->second = fold_.add(it->first);
          cr.slots.push_back({it->second, true});
        } else {
          auto [it, fresh] = raw_ids.try_emplace(c.bytes, -1);
          if (fresh) it->second = raw_.add(it->first);
          cr.slots.push_back({it->second, false});
        }
      }
      for (IpProto p : {IpProto::tcp, IpProto::udp, IpProto::icmp})
        if (protocol_accepts(r.proto, p))
          buckets_[bucket_index(p)].push_back(static_cast<uint32_t>(i));
      compiled_.push_back(std::move(cr));
    }
    raw_.build();
    fold_.build();
  }

  const RuleSet& ruleset() const { return rules_; }

  /// Distinct content byte-strings across the set (case-folded variants of
  /// nocase patterns counted once each).
  size_t distinct_pattern_count() const { return raw_.size() + fold_.size(); }

  /// Rules whose full header predicate (protocol, addresses, ports) accepts p.
  size_t header_match_count(const Packet& p) const {
    size_t n = 0;
    for (uint32_t idx : buckets_[bucket_index(p.proto)])
      if (header_accepts(rules_.rules[idx], p)) ++n;
    return n;
  }

  MatchResult match(const Packet& p) const {
    MatchResult res;
    const auto& bucket = buckets_[bucket_index(p.proto)];
    if (bucket.empty()) return res;

    std::vector<int32_t> raw_hits, fold_hits;
    if (!p.payload.empty()) {
      if (raw_.size() > 0)
        raw_.scan(p.payload, [&](int32_t id) { raw_hits.push_back(id); });
      if (fold_.size() > 0)
        fold_.scan(ascii_fold(p.payload), [&](int32_t id) { fold_hits.push_back(id); });
      sort_unique(raw_hits);
      sort_unique(fold_hits);
    }

    for (uint32_t idx : bucket) {
      const Rule& r = rules_.rules[idx];
      if (!header_accepts(r, p)) continue;
      bool all = true;
      for (const auto& [id, nocase] : compiled_[idx].slots) {
        const auto& hits = nocase ? fold_hits : raw_hits;
        if (!std::binary_search(hits.begin(), hits.end(), id)) {
          all = false;
          break;
        }
      }
      if (all) res.sids.push_back(r.sid);
    }
    std::sort(res.sids.begin(), res.sids.end());
    return res;
  }

 private:
  struct CompiledRule {
    std::vector<std::pair<int32_t, bool>> slots;  // (pattern id, nocase)
  };

  static size_t bucket_index(IpProto p) {
    switch (p) {
      case IpProto::tcp: return 0;
      case IpProto::udp: return 1;
      case IpProto::icmp: return 2;
    }
    return 0;
  }

  static bool header_accepts(const Rule& r, const Packet& p) {
    if (!r.src_addr.matches(p.src_ip) || !r.dst_addr.matches(p.dst_ip)) return false;
    if (ports_apply(r.proto) &&
        (!r.src_port.matches(p.src_port) || !r.dst_port.matches(p.dst_port)))
      return false;
    return true;
  }

  static void sort_unique(std::vector<int32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  RuleSet rules_;
  std::vector<CompiledRule> compiled_;  // parallel to rules_.rules
  std::array<std::vector<uint32_t>, 3> buckets_;  // tcp / udp / icmp candidates
  AhoCorasick raw_;
  AhoCorasick fold_;
};

inline CompiledMatcher compile(RuleSet rs) { return CompiledMatcher(std::move(rs)); }

inline MatchResult match_packet(const CompiledMatcher& m, const Packet& p) {
  return m.match(p);
}

/// Brute-force reference: per-rule, per-pattern substring scan, no shared
/// machinery with CompiledMatcher beyond the data model.
inline MatchResult match_naive(const RuleSet& rs, const Packet& p) {
  MatchResult res;
  for (const Rule& r : rs.rules) {
    bool proto_ok = false;
    switch (r.proto) {
      case Protocol::ip: proto_ok = true; break;
      case Protocol::tcp: proto_ok = p.proto == IpProto::tcp; break;
      case Protocol::udp: proto_ok = p.proto == IpProto::udp; break;
      case Protocol::icmp: proto_ok = p.proto == IpProto::icmp; break;
    }
    if (!proto_ok) continue;

    auto addr_ok = [](const AddrMatcher& m, uint32_t ip) {
      if (m.any) return true;
      uint32_t mask = m.prefix == 0 ? 0u : ~0u << (32 - m.prefix);
      return (ip & mask) == (m.addr & mask);
    };
    if (!addr_ok(r.src_addr, p.src_ip) || !addr_ok(r.dst_addr, p.dst_ip)) continue;
    if (r.proto == Protocol::tcp || r.proto == Protocol::udp) {
      auto port_ok = [](const PortMatcher& m, uint16_t port) {
        return m.any || (port >= m.lo && port <= m.hi);
      };
      if (!port_ok(r.src_port, p.src_port) || !port_ok(r.dst_port, p.dst_port)) continue;
    }

    bool all = true;
    for (const ContentPattern& c : r.contents) {
      bool found = false;
      if (c.bytes.size() <= p.payload.size()) {
        for (size_t i = 0; i + c.bytes.size() <= p.payload.size() && !found; ++i) {
          bool eq = true;
          for (size_t j = 0; j < c.bytes.size(); ++j) {
            char a = p.payload[i + j], b = c.bytes[j];
            if (c.nocase) {
              a = ascii_lower(a);
              b = ascii_lower(b);
            }
            if (a != b) {
              eq = false;
              break;
            }
          }
          found = eq;
        }
      }
      if (!found) {
        all = false;
        break;
      }
    }
    if (all) res.sids.push_back(r.sid);
  }
  std::sort(res.sids.begin(), res.sids.end());
  return res;
}

}  // namespace mlids
