#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlids/common.hpp"
#include "mlids/packets.hpp"

// Append-only alert log with the two aggregate queries the partitioner needs:
// per-signature frequency and last detection time. Storage is one record per
// line:
//
//   ts_us=120 sid=31 layer=primary proto=icmp src=10.0.0.1 sport=0 dst=10.0.0.2 dport=0
//
// Keys may appear in any order on read; unknown keys are an error in strict
// mode and skip the record in lenient mode.

namespace mlids {

struct Alert {
  uint64_t ts_us = 0;
  uint32_t sid = 0;  // >= 1
  std::string layer_id;
  IpProto proto = IpProto::tcp;
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;

  bool operator==(const Alert&) const = default;
};

struct SignatureStats {
  uint32_t sid = 0;
  uint64_t freq = 0;   // occurrence count in the log
  uint64_t ltime = 0;  // max ts_us observed

  bool operator==(const SignatureStats&) const = default;
};

using StatsMap = std::map<uint32_t, SignatureStats>;

struct AlertParseError : std::runtime_error {
  size_t record;
  AlertParseError(size_t record_no, const std::string& msg)
      : std::runtime_error("alert record " + std::to_string(record_no) + ": " + msg),
        record(record_no) {}
};

enum class LogStrictness { strict, lenient };

inline std::string format_alert(const Alert& a) {
  std::string out;
  out += "ts_us=" + std::to_string(a.ts_us);
  out += " sid=" + std::to_string(a.sid);
  out += " layer=" + a.layer_id;
  out += " proto=" + std::string(to_string(a.proto));
  out += " src=" + ipv4_to_string(a.src_ip);
  out += " sport=" + std::to_string(a.src_port);
  out += " dst=" + ipv4_to_string(a.dst_ip);
  out += " dport=" + std::to_string(a.dst_port);
  return out;
}

inline Alert parse_alert_line(std::string_view line, size_t record_no) {
  Alert a;
  uint8_t seen = 0;  // bitmask over the 8 required keys
  for (std::string_view tok : split_ws(line)) {
    size_t eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw AlertParseError(record_no, "token without '=': " + std::string(tok));
    std::string_view key = tok.substr(0, eq);
    std::string_view val = tok.substr(eq + 1);
    uint64_t n = 0;
    auto need_u64 = [&](uint64_t max) {
      if (!parse_u64(val, n) || n > max)
        throw AlertParseError(record_no,
                              "bad value for " + std::string(key) + ": " + std::string(val));
    };
    auto mark = [&](int bit) {
      if (seen & (1u << bit))
        throw AlertParseError(record_no, "duplicate key " + std::string(key));
      seen |= static_cast<uint8_t>(1u << bit);
    };
    if (key == "ts_us") { need_u64(UINT64_MAX); a.ts_us = n; mark(0); }
    else if (key == "sid") { need_u64(0xFFFFFFFFULL); a.sid = static_cast<uint32_t>(n); mark(1); }
    else if (key == "layer") {
      if (val.empty()) throw AlertParseError(record_no, "empty layer id");
      a.layer_id = std::string(val);
      mark(2);
    } else if (key == "proto") {
      if (!ip_proto_from(val, a.proto))
        throw AlertParseError(record_no, "bad proto: " + std::string(val));
      mark(3);
    } else if (key == "src") {
      if (!parse_ipv4(val, a.src_ip))
        throw AlertParseError(record_no, "bad src: " + std::string(val));
      mark(4);
    } else if (key == "sport") { need_u64(65535); a.src_port = static_cast<uint16_t>(n); mark(5); }
    else if (key == "dst") {
      if (!parse_ipv4(val, a.dst_ip))
        throw AlertParseError(record_no, "bad dst: " + std::string(val));
      mark(6);
    } else if (key == "dport") { need_u64(65535); a.dst_port = static_cast<uint16_t>(n); mark(7); }
    else throw AlertParseError(record_no, "unknown key " + std::string(key));
  }
  if (seen != 0xFF) throw AlertParseError(record_no, "missing required keys");
  if (a.sid == 0) throw AlertParseError(record_no, "sid must be >= 1");
  return a;
}

struct AlertLogLoad {
  std::vector<Alert> records;
  uint64_t skipped = 0;  // lenient mode only
};

inline AlertLogLoad parse_alert_log(std::string_view text, LogStrictness mode) {
  AlertLogLoad out;
  size_t record_no = 0;
  for (std::string_view raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    ++record_no;
    try {
      out.records.push_back(parse_alert_line(line, record_no));
    } catch (const AlertParseError&) {
      if (mode == LogStrictness::strict) throw;
      ++out.skipped;
    }
  }
  return out;
}

/// freq = exact record count per sid, ltime = max ts_us. Sids absent from the
/// log are absent from the map.
inline StatsMap stats(std::span<const Alert> log) {
  StatsMap out;
  for (const Alert& a : log) {
    SignatureStats& s = out[a.sid];
    if (s.freq == 0) s.sid = a.sid;
    ++s.freq;
    if (a.ts_us > s.ltime) s.ltime = a.ts_us;
  }
  return out;
}

// In-memory record list with an optional file sink; appends go to both. The
// intended use is single-writer, many readers of the in-memory snapshot.
class AlertLog {
 public:
  AlertLog() = default;

  /// Opens (and truncates) a file sink; subsequent appends are written through.
  static AlertLog open(const std::filesystem::path& path) {
    AlertLog log;
    log.sink_.open(path, std::ios::binary | std::ios::trunc);
    if (!log.sink_) throw IoError("cannot open alert log " + path.string());
    log.path_ = path;
    return log;
  }

  void append(const Alert& a) {
    if (a.sid == 0) throw std::invalid_argument("alert sid must be >= 1");
    if (a.layer_id.empty() || a.layer_id.find_first_of(" \t\n") != std::string::npos)
      throw std::invalid_argument("alert layer id must be a non-empty token");
    if (sink_.is_open()) {
      sink_ << format_alert(a) << '\n';
      if (!sink_) throw IoError("write failure on alert log " + path_.string());
    }
    records_.push_back(a);
  }

  void flush() {
    if (sink_.is_open()) {
      sink_.flush();
      if (!sink_) throw IoError("flush failure on alert log " + path_.string());
    }
  }

  const std::vector<Alert>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  StatsMap stats() const { return mlids::stats(records_); }

 private:
  std::vector<Alert> records_;
  std::ofstream sink_;
  std::filesystem::path path_;
};

}  // namespace mlids
