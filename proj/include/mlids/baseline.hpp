#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlids/alert_store.hpp"
#include "mlids/packets.hpp"
#include "mlids/rules.hpp"
#include "mlids/trafficgen.hpp"

// Canned 33-signature training baseline used by fixtures, tests and the
// default benchmark: signature names with their observed occurrence counts
// from a reference training run. Each baseline rule carries one unique
// fixed-width content token, so a generated training stream triggers exactly
// one rule per packet and the aggregate statistics reproduce the table
// exactly.

namespace mlids {

struct BaselineSignature {
  uint32_t sid;
  const char* message;
  Protocol proto;
  uint64_t occurrences;
};

inline const std::vector<BaselineSignature>& baseline_signatures() {
  // "ICMP Destination Unreachable Communication Administratively Prohibited"
  // is one signature; its name just exceeds one table row.
  static const std::vector<BaselineSignature> table = {
      {1, "(spp_frag2) TTL Limit Exceeded (reassemble) detection", Protocol::ip, 2},
      {2, "(portscan) UDP Portscan", Protocol::udp, 3},
      {3, "ICMP Destination Unreachable Communication Administratively Prohibited",
       Protocol::icmp, 3},
      {4, "(spp_frag2) Teardrop attack", Protocol::ip, 4},
      {5, "MISC gopher proxy", Protocol::tcp, 4},
      {6, "(portscan) TCP Portscan", Protocol::tcp, 5},
      {7, "WEB-MISC Compaq Insight directory traversal", Protocol::tcp, 11},
      {8, "DDOS tfn2k icmp possible communication", Protocol::icmp, 14},
      {9, "ICMP Large ICMP Packet", Protocol::icmp, 14},
      {10, "WEB-CGI search.cgi access", Protocol::tcp, 17},
      {11, "WEB-MISC http directory traversal", Protocol::tcp, 18},
      {12, "TELNET SGI telnetd format bug", Protocol::tcp, 19},
      {13, "(http_inspect) DOUBLE DECODING ATTACK", Protocol::tcp, 20},
      {14, "FINGER query", Protocol::tcp, 21},
      {15, "BACKDOOR Q access", Protocol::tcp, 26},
      {16, "BACKDOOR SIGNATURE - Q ICMP", Protocol::icmp, 28},
      {17, "DDOS mstream client to handler", Protocol::tcp, 29},
      {18, "BAD-TRAFFIC udp port 0 traffic", Protocol::udp, 35},
      {19, "SNMP request udp", Protocol::udp, 40},
      {20, "DOS arkiea backup", Protocol::tcp, 48},
      {21, "(http_inspect) WEBROOT DIRECTORY TRAVERSAL", Protocol::tcp, 49},
      {22, "BAD-TRAFFIC tcp port 0 traffic", Protocol::tcp, 84},
      {23, "(http_inspect) OVERSIZE REQUEST-URI DIRECTORY", Protocol::tcp, 96},
      {24, "NETBIOS RFPalyze Attempt", Protocol::tcp, 105},
      {25, "(spp_rpc_decode) Incomplete RPC segment", Protocol::tcp, 129},
      {26, "FTP command overflow attempt", Protocol::tcp, 163},
      {27, "WEB-CGI Allaire Pro Web Shell attempt", Protocol::tcp, 981},
      {28, "WEB-CGI Armada Style Master Index directory traversal", Protocol::tcp, 998},
      {29, "WEB-IIS index server file source code attempt", Protocol::tcp, 1525},
      {30, "BAD-TRAFFIC same SRC/DST", Protocol::ip, 1754},
      {31, "ICMP Echo Reply", Protocol::icmp, 3409},
      {32, "BAD-TRAFFIC loopback traffic", Protocol::ip, 21886},
      {33, "(snort_decoder): Invalid UDP header, length field", Protocol::udp, 86006},
  };
  return table;
}

inline uint64_t baseline_total_alerts() {
  uint64_t total = 0;
  for (const auto& e : baseline_signatures()) total += e.occurrences;
  return total;
}

/// The 33 baseline rules. Content tokens are fixed-width and pairwise
/// distinct, so no baseline packet can trigger more than one rule.
inline RuleSet baseline_ruleset() {
  RuleSet rs;
  rs.name = "baseline";
  for (const auto& e : baseline_signatures()) {
    Rule r;
    r.sid = e.sid;
    r.proto = e.proto;
    r.message = e.message;
    char token[8];
    std::snprintf(token, sizeof(token), "SIG-%02u", e.sid);
    r.contents.push_back({token, false});
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

/// Training stream in which baseline rule i fires exactly occurrences(i)
/// times. Timestamps step uniformly across the whole stream.
inline PacketStream baseline_training_stream(uint64_t start_ts_us = 0, uint64_t step_us = 100) {
  RuleSet rs = baseline_ruleset();
  PacketStream stream;
  stream.label = "baseline-training";
  stream.packets.reserve(static_cast<size_t>(baseline_total_alerts()));
  uint64_t ts = start_ts_us;
  for (size_t i = 0; i < rs.rules.size(); ++i) {
    for (uint64_t k = 0; k < baseline_signatures()[i].occurrences; ++k) {
      stream.packets.push_back(packet_from_rule(rs.rules[i], ts));
      ts += step_us;
    }
  }
  return stream;
}

/// The baseline alert log synthesized directly (no matching pass): one record
/// per occurrence, 5-tuples as packet_from_rule would produce them.
inline std::vector<Alert> baseline_alerts(uint64_t start_ts_us = 0, uint64_t step_us = 100,
                                          const std::string& layer_id = "master") {
  RuleSet rs = baseline_ruleset();
  std::vector<Alert> out;
  out.reserve(static_cast<size_t>(baseline_total_alerts()));
  uint64_t ts = start_ts_us;
  for (size_t i = 0; i < rs.rules.size(); ++i) {
    Packet p = packet_from_rule(rs.rules[i], 0);
    for (uint64_t k = 0; k < baseline_signatures()[i].occurrences; ++k) {
      out.push_back({ts, rs.rules[i].sid, layer_id, p.proto, p.src_ip, p.dst_ip, p.src_port,
                     p.dst_port});
      ts += step_us;
    }
  }
  return out;
}

}  // namespace mlids
