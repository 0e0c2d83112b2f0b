#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "mlids/common.hpp"
#include "mlids/packets.hpp"

// Classic pcap v2.4 reader/writer, link type Ethernet. The writer emits
// little-endian files with microsecond timestamps and synthesizes
// Ethernet/IPv4/transport framing around each Packet; the reader accepts both
// byte orders and inverts the writer exactly at the Packet level.

namespace mlids {

struct PcapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PcapReadResult {
  PacketStream stream;
  uint64_t skipped_frames = 0;  // undecodable frames (counted, not fatal)
};

namespace detail {

inline constexpr uint32_t kPcapMagic = 0xA1B2C3D4u;
inline constexpr uint8_t kSrcMac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
inline constexpr uint8_t kDstMac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x02};

inline void put_u16le(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}
inline void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}
inline void put_u16be(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xFF));
}
inline void put_u32be(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

inline uint16_t get_u16be(const uint8_t* p) { return static_cast<uint16_t>(p[0] << 8 | p[1]); }
inline uint32_t get_u32be(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
         static_cast<uint32_t>(p[2]) << 8 | static_cast<uint32_t>(p[3]);
}

/// RFC 1071 ones'-complement sum over a header; caller zeroes the checksum field.
inline uint16_t ipv4_checksum(const uint8_t* data, size_t len) {
  uint32_t sum = 0;
  for (size_t i = 0; i + 1 < len; i += 2) sum += get_u16be(data + i);
  if (len & 1) sum += static_cast<uint32_t>(data[len - 1]) << 8;
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<uint16_t>(~sum);
}

struct ByteReader {
  const uint8_t* p;
  size_t len;
  size_t pos = 0;
  bool swapped = false;  // file byte order differs from little-endian fields below

  size_t remaining() const { return len - pos; }
  uint16_t u16() {
    uint16_t v = static_cast<uint16_t>(p[pos] | p[pos + 1] << 8);
    pos += 2;
    return swapped ? static_cast<uint16_t>((v >> 8) | (v << 8)) : v;
  }
  uint32_t u32() {
    uint32_t v = static_cast<uint32_t>(p[pos]) | static_cast<uint32_t>(p[pos + 1]) << 8 |
                 static_cast<uint32_t>(p[pos + 2]) << 16 | static_cast<uint32_t>(p[pos + 3]) << 24;
    pos += 4;
    if (swapped) v = __builtin_bswap32(v);
    return v;
  }
};

// Decodes one captured Ethernet frame. Returns false when the frame is not a
// clean Ethernet II / IPv4 / {tcp,udp,icmp} unit (the caller counts a skip).
inline bool decode_frame(const uint8_t* f, size_t caplen, uint64_t ts_us, Packet& out) {
  if (caplen < 14) return false;
  uint16_t ethertype = get_u16be(f + 12);
  if (ethertype != 0x0800) return false;  // IPv4 only (IPv6, ARP, VLAN... skipped)
  const uint8_t* ip = f + 14;
  size_t ip_avail = caplen - 14;
  if (ip_avail < 20) return false;
  if ((ip[0] >> 4) != 4) return false;
  size_t ihl = static_cast<size_t>(ip[0] & 0x0F) * 4;
  if (ihl < 20 || ip_avail < ihl) return false;
  if (ipv4_checksum(ip, ihl) != 0) return false;  // corrupted header
  uint16_t frag = get_u16be(ip + 6);
  if ((frag & 0x2000) || (frag & 0x1FFF)) return false;  // fragments are out of scope
  size_t total_len = get_u16be(ip + 2);
  if (total_len < ihl || total_len > ip_avail) return false;  // truncated capture
  uint8_t proto = ip[9];

  size_t thl;
  switch (proto) {
    case 6: {  // tcp
      if (total_len < ihl + 20) return false;
      thl = static_cast<size_t>(ip[ihl + 12] >> 4) * 4;
      if (thl < 20 || total_len < ihl + thl) return false;
      break;
    }
    case 17:  // udp
    case 1:   // icmp: payload = bytes after the 8-byte header
      if (total_len < ihl + 8) return false;
      thl = 8;
      break;
    default:
      return false;
  }

  out.ts_us = ts_us;
  out.proto = static_cast<IpProto>(proto);
  out.src_ip = get_u32be(ip + 12);
  out.dst_ip = get_u32be(ip + 16);
  if (proto == 1) {
    out.src_port = 0;
    out.dst_port = 0;
  } else {
    out.src_port = get_u16be(ip + ihl);
    out.dst_port = get_u16be(ip + ihl + 2);
  }
  out.payload.assign(reinterpret_cast<const char*>(ip + ihl + thl), total_len - ihl - thl);
  return true;
}

}  // namespace detail

inline PcapReadResult read_pcap(std::string_view bytes, std::string label = "") {
  detail::ByteReader r{reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()};
  if (r.remaining() < 4) throw PcapError("truncated global header");
  uint32_t magic = r.u32();
  if (magic == detail::kPcapMagic) {
    r.swapped = false;
  } else if (magic == __builtin_bswap32(detail::kPcapMagic)) {
    r.swapped = true;
  } else {
    throw PcapError("bad pcap magic");
  }
  if (r.remaining() < 20) throw PcapError("truncated global header");
  r.u16();  // version major
  r.u16();  // version minor
  r.u32();  // thiszone
  r.u32();  // sigfigs
  r.u32();  // snaplen
  uint32_t network = r.u32();
  if (network != 1) throw PcapError("unsupported link type (want Ethernet)");

  PcapReadResult res;
  res.stream.label = std::move(label);
  while (r.remaining() > 0) {
    if (r.remaining() < 16) throw PcapError("truncated record header");
    uint32_t ts_sec = r.u32();
    uint32_t ts_usec = r.u32();
    uint32_t incl_len = r.u32();
    r.u32();  // orig_len
    if (r.remaining() < incl_len) throw PcapError("truncated record data");
    uint64_t ts_us = static_cast<uint64_t>(ts_sec) * 1'000'000ULL + ts_usec;
    Packet pkt;
    if (detail::decode_frame(r.p + r.pos, incl_len, ts_us, pkt))
      res.stream.packets.push_back(std::move(pkt));
    else
      ++res.skipped_frames;
    r.pos += incl_len;
  }
  return res;
}

inline std::string write_pcap(const PacketStream& stream) {
  using namespace detail;
  std::string out;
  out.reserve(24 + stream.packets.size() * 80);
  put_u32le(out, kPcapMagic);
  put_u16le(out, 2);      // version 2.4
  put_u16le(out, 4);
  put_u32le(out, 0);      // thiszone
  put_u32le(out, 0);      // sigfigs
  put_u32le(out, 65535);  // snaplen
  put_u32le(out, 1);      // Ethernet

  for (const Packet& p : stream.packets) {
    size_t thl = p.proto == IpProto::tcp ? 20 : 8;
    if (p.payload.size() > 65535 - 20 - thl)
      throw PcapError("payload too large for IPv4 framing");
    uint16_t total_len = static_cast<uint16_t>(20 + thl + p.payload.size());

    put_u32le(out, static_cast<uint32_t>(p.ts_us / 1'000'000ULL));
    put_u32le(out, static_cast<uint32_t>(p.ts_us % 1'000'000ULL));
    uint32_t framelen = static_cast<uint32_t>(14 + total_len);
    put_u32le(out, framelen);  // incl_len
    put_u32le(out, framelen);  // orig_len

    size_t frame_start = out.size();
    out.append(reinterpret_cast<const char*>(kDstMac), 6);
    out.append(reinterpret_cast<const char*>(kSrcMac), 6);
    put_u16be(out, 0x0800);

    size_t ip_start = out.size();
    out.push_back(0x45);  // version 4, ihl 5
    out.push_back(0x00);  // tos
    put_u16be(out, total_len);
    put_u16be(out, 0);  // id
    put_u16be(out, 0);  // flags/fragment
    out.push_back(0x40);  // ttl 64
    out.push_back(static_cast<char>(p.proto));
    put_u16be(out, 0);  // checksum placeholder
    put_u32be(out, p.src_ip);
    put_u32be(out, p.dst_ip);
    uint16_t csum =
        ipv4_checksum(reinterpret_cast<const uint8_t*>(out.data() + ip_start), 20);
    out[ip_start + 10] = static_cast<char>(csum >> 8);
    out[ip_start + 11] = static_cast<char>(csum & 0xFF);

    switch (p.proto) {
      case IpProto::tcp:
        put_u16be(out, p.src_port);
        put_u16be(out, p.dst_port);
        put_u32be(out, 0);      // seq
        put_u32be(out, 0);      // ack
        out.push_back(0x50);    // data offset 5
        out.push_back(0x10);    // ACK
        put_u16be(out, 65535);  // window
        put_u16be(out, 0);      // checksum (optional, left zero)
        put_u16be(out, 0);      // urgent
        break;
      case IpProto::udp:
        put_u16be(out, p.src_port);
        put_u16be(out, p.dst_port);
        put_u16be(out, static_cast<uint16_t>(8 + p.payload.size()));
        put_u16be(out, 0);  // checksum
        break;
      case IpProto::icmp:
        out.push_back(0x08);  // echo request
        out.push_back(0x00);
        put_u16be(out, 0);  // checksum
        put_u16be(out, 0);  // id
        put_u16be(out, 0);  // seq
        break;
    }
    out.append(p.payload);
    (void)frame_start;
  }
  return out;
}

inline PcapReadResult read_pcap_file(const std::filesystem::path& path) {
  return read_pcap(read_file(path), path.filename().string());
}

inline void write_pcap_file(const std::filesystem::path& path, const PacketStream& stream) {
  write_file(path, write_pcap(stream));
}

}  // namespace mlids
