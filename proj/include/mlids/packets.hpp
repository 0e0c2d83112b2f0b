#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlids/common.hpp"

namespace mlids {

/// Transport protocol of a decoded packet. Values are the IANA numbers so the
/// pcap codec can use them directly.
enum class IpProto : uint8_t { icmp = 1, tcp = 6, udp = 17 };

inline std::string_view to_string(IpProto p) {
  switch (p) {
    case IpProto::icmp: return "icmp";
    case IpProto::tcp: return "tcp";
    case IpProto::udp: return "udp";
  }
  return "?";
}

inline bool ip_proto_from(std::string_view s, IpProto& out) {
  if (s == "tcp") out = IpProto::tcp;
  else if (s == "udp") out = IpProto::udp;
  else if (s == "icmp") out = IpProto::icmp;
  else return false;
  return true;
}

inline std::string ipv4_to_string(uint32_t ip) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xFF, (ip >> 16) & 0xFF,
                (ip >> 8) & 0xFF, ip & 0xFF);
  return buf;
}

inline bool parse_ipv4(std::string_view s, uint32_t& out) {
  uint32_t ip = 0;
  int octets = 0;
  size_t i = 0;
  while (octets < 4) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
    uint32_t v = 0;
    size_t digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      v = v * 10 + static_cast<uint32_t>(s[i] - '0');
      if (v > 255 || ++digits > 3) return false;
      ++i;
    }
    ip = (ip << 8) | v;
    ++octets;
    if (octets < 4) {
      if (i >= s.size() || s[i] != '.') return false;
      ++i;
    }
  }
  if (i != s.size()) return false;
  out = ip;
  return true;
}

/// One decoded packet. `ts_us` is virtual time; `payload` holds raw transport
/// payload bytes (the matching target).
struct Packet {
  uint64_t ts_us = 0;
  IpProto proto = IpProto::tcp;
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  uint16_t src_port = 0;  // 0 for icmp
  uint16_t dst_port = 0;
  std::string payload;

  bool operator==(const Packet&) const = default;
};

inline constexpr size_t kMaxPayload = 65535;

struct PacketStream {
  std::string label;
  std::vector<Packet> packets;

  size_t size() const { return packets.size(); }
  bool empty() const { return packets.empty(); }
};

inline bool is_time_ordered(const PacketStream& s) {
  for (size_t i = 1; i < s.packets.size(); ++i)
    if (s.packets[i].ts_us < s.packets[i - 1].ts_us) return false;
  return true;
}

}  // namespace mlids
