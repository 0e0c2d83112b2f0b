#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mlids/common.hpp"
#include "mlids/packets.hpp"

// Detection-rule data model plus the text format used for every rule file the
// tools read or write. One rule per line:
//
//   alert <proto> <addr> <port> -> <addr> <port> (msg:"..."; content:"..."; [nocase;] sid:N;)
//
// <addr> is `any`, a dotted IPv4, or IPv4/prefix; <port> is `any`, an integer,
// or an inclusive lo:hi range. Content strings may mix literal text, the
// escapes \" \\ \; \|, and pipe-delimited hex byte pairs (|0D 0A|). Lines
// starting with '#' are comments; a first line of the form `# name: <label>`
// carries the set's label. Emission is canonical: rules ordered by ascending
// sid, non-printable content bytes re-encoded as hex pairs.

namespace mlids {

struct RuleParseError : std::runtime_error {
  size_t line;
  RuleParseError(size_t line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

enum class Protocol : uint8_t { tcp, udp, icmp, ip };

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::tcp: return "tcp";
    case Protocol::udp: return "udp";
    case Protocol::icmp: return "icmp";
    case Protocol::ip: return "ip";
  }
  return "?";
}

/// Protocol `ip` matches any transport protocol.
inline bool protocol_accepts(Protocol rule_proto, IpProto p) {
  switch (rule_proto) {
    case Protocol::ip: return true;
    case Protocol::tcp: return p == IpProto::tcp;
    case Protocol::udp: return p == IpProto::udp;
    case Protocol::icmp: return p == IpProto::icmp;
  }
  return false;
}

/// Port matchers are meaningless for icmp/ip rules and skipped when matching.
inline bool ports_apply(Protocol rule_proto) {
  return rule_proto == Protocol::tcp || rule_proto == Protocol::udp;
}

/// any | exact IPv4 | IPv4/prefix
struct AddrMatcher {
  bool any = true;
  uint32_t addr = 0;
  uint8_t prefix = 32;

  static AddrMatcher any_addr() { return {}; }
  static AddrMatcher exact(uint32_t ip) { return {false, ip, 32}; }
  static AddrMatcher cidr(uint32_t ip, uint8_t prefix) { return {false, ip, prefix}; }

  uint32_t mask() const { return prefix == 0 ? 0u : ~0u << (32 - prefix); }
  bool matches(uint32_t ip) const { return any || ((ip ^ addr) & mask()) == 0; }

  std::string str() const {
    if (any) return "any";
    std::string s = ipv4_to_string(addr);
    if (prefix != 32) s += "/" + std::to_string(prefix);
    return s;
  }
  bool operator==(const AddrMatcher&) const = default;
};

/// any | exact port | inclusive lo:hi range
struct PortMatcher {
  bool any = true;
  uint16_t lo = 0;
  uint16_t hi = 0;

  static PortMatcher any_port() { return {}; }
  static PortMatcher exact(uint16_t p) { return {false, p, p}; }
  static PortMatcher between(uint16_t lo, uint16_t hi) { return {false, lo, hi}; }

  bool matches(uint16_t p) const { return any || (p >= lo && p <= hi); }

  std::string str() const {
    if (any) return "any";
    if (lo == hi) return std::to_string(lo);
    return std::to_string(lo) + ":" + std::to_string(hi);
  }
  bool operator==(const PortMatcher&) const = default;
};

inline constexpr size_t kMaxContentBytes = 2048;

struct ContentPattern {
  std::string bytes;    // non-empty, length <= kMaxContentBytes
  bool nocase = false;  // ASCII case-insensitive match when true

  bool operator==(const ContentPattern&) const = default;
};

struct Rule {
  uint32_t sid = 0;  // >= 1, unique within a set
  Protocol proto = Protocol::tcp;
  AddrMatcher src_addr, dst_addr;
  PortMatcher src_port, dst_port;
  std::string message;
  std::vector<ContentPattern> contents;  // empty = header-only rule

  bool operator==(const Rule&) const = default;
};

struct RuleSet {
  std::string name;
  std::vector<Rule> rules;

  size_t size() const { return rules.size(); }
  bool empty() const { return rules.empty(); }

  const Rule* find(uint32_t sid) const {
    for (const Rule& r : rules)
      if (r.sid == sid) return &r;
    return nullptr;
  }
  bool contains(uint32_t sid) const { return find(sid) != nullptr; }

  std::vector<uint32_t> sids() const {
    std::vector<uint32_t> out;
    out.reserve(rules.size());
    for (const Rule& r : rules) out.push_back(r.sid);
    return out;
  }

  // Sets compare as (name, rules keyed by sid); rule order is not significant.
  bool operator==(const RuleSet& other) const {
    if (name != other.name || rules.size() != other.rules.size()) return false;
    auto key = [](const Rule& a, const Rule& b) { return a.sid < b.sid; };
    std::vector<Rule> a = rules, b = other.rules;
    std::sort(a.begin(), a.end(), key);
    std::sort(b.begin(), b.end(), key);
    return a == b;
  }
};

namespace detail {

inline bool is_hex_digit(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
inline int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return c - 'A' + 10;
}

inline PortMatcher parse_port(std::string_view tok, size_t line) {
  if (tok == "any") return PortMatcher::any_port();
  auto number = [&](std::string_view s) -> uint16_t {
    uint64_t v;
    if (!parse_u64(s, v)) throw RuleParseError(line, "invalid port '" + std::string(s) + "'");
    if (v > 65535) throw RuleParseError(line, "port out of range '" + std::string(s) + "'");
    return static_cast<uint16_t>(v);
  };
  size_t colon = tok.find(':');
  if (colon == std::string_view::npos) return PortMatcher::exact(number(tok));
  uint16_t lo = number(tok.substr(0, colon));
  uint16_t hi = number(tok.substr(colon + 1));
  if (lo > hi) throw RuleParseError(line, "port range lo > hi in '" + std::string(tok) + "'");
  return PortMatcher::between(lo, hi);
}

inline AddrMatcher parse_addr(std::string_view tok, size_t line) {
  if (tok == "any") return AddrMatcher::any_addr();
  std::string_view ip_part = tok;
  uint8_t prefix = 32;
  size_t slash = tok.find('/');
  if (slash != std::string_view::npos) {
    ip_part = tok.substr(0, slash);
    uint64_t v;
    if (!parse_u64(tok.substr(slash + 1), v) || v > 32)
      throw RuleParseError(line, "invalid prefix in '" + std::string(tok) + "'");
    prefix = static_cast<uint8_t>(v);
  }
  uint32_t ip;
  if (!parse_ipv4(ip_part, ip))
    throw RuleParseError(line, "invalid address '" + std::string(tok) + "'");
  return slash == std::string_view::npos ? AddrMatcher::exact(ip) : AddrMatcher::cidr(ip, prefix);
}

/// Strips the surrounding quotes of an option value.
inline std::string_view unquote(std::string_view v, size_t line, std::string_view key) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    throw RuleParseError(line, std::string(key) + " value must be a quoted string");
  return v.substr(1, v.size() - 2);
}

inline std::string decode_msg(std::string_view raw, size_t line) {
  std::string out;
  for (size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '\\') {
      if (i + 1 >= raw.size()) throw RuleParseError(line, "dangling escape in msg");
      char n = raw[++i];
      if (n != '"' && n != '\\') throw RuleParseError(line, "invalid escape in msg");
      out.push_back(n);
    } else if (static_cast<unsigned char>(c) < 0x20) {
      throw RuleParseError(line, "raw control byte in msg");
    } else {
      out.push_back(c);
    }
  }
  return out;
}

inline std::string decode_content(std::string_view raw, size_t line) {
  std::string out;
  size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (c == '\\') {
      if (i + 1 >= raw.size()) throw RuleParseError(line, "dangling escape in content");
      char n = raw[i + 1];
      if (n != '"' && n != '\\' && n != ';' && n != '|')
        throw RuleParseError(line, "invalid escape '\\" + std::string(1, n) + "' in content");
      out.push_back(n);
      i += 2;
    } else if (c == '|') {
      size_t end = raw.find('|', i + 1);
      if (end == std::string_view::npos)
        throw RuleParseError(line, "unterminated hex block in content");
      auto pairs = split_ws(raw.substr(i + 1, end - i - 1));
      if (pairs.empty()) throw RuleParseError(line, "empty hex block in content");
      for (auto pair : pairs) {
        if (pair.size() != 2 || !is_hex_digit(pair[0]) || !is_hex_digit(pair[1]))
          throw RuleParseError(line, "bad hex pair '" + std::string(pair) + "' in content");
        out.push_back(static_cast<char>(hex_val(pair[0]) * 16 + hex_val(pair[1])));
      }
      i = end + 1;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      throw RuleParseError(line, "raw control byte in content (use |XX| hex)");
    } else {
      out.push_back(c);
      ++i;
    }
  }
  if (out.empty()) throw RuleParseError(line, "empty content string");
  if (out.size() > kMaxContentBytes) throw RuleParseError(line, "content longer than 2048 bytes");
  return out;
}

/// Splits the option body on semicolons, ignoring quoted regions. Every option
/// must be ';'-terminated.
inline std::vector<std::string_view> split_options(std::string_view body, size_t line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  bool in_quote = false;
  for (size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (in_quote) {
      if (c == '\\') ++i;
      else if (c == '"') in_quote = false;
    } else if (c == '"') {
      in_quote = true;
    } else if (c == ';') {
      out.push_back(trim(body.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (in_quote) throw RuleParseError(line, "unbalanced quote");
  if (!trim(body.substr(start)).empty())
    throw RuleParseError(line, "option not terminated by ';'");
  return out;
}

}  // namespace detail

inline Rule parse_rule(std::string_view text, size_t line = 1) {
  using namespace detail;
  size_t paren = text.find('(');
  if (paren == std::string_view::npos) throw RuleParseError(line, "missing '(' option block");

  auto header = split_ws(text.substr(0, paren));
  if (header.size() != 7)
    throw RuleParseError(line, "malformed header (want: action proto addr port -> addr port)");
  if (header[0] != "alert")
    throw RuleParseError(line, "unsupported action '" + std::string(header[0]) + "'");
  Rule r;
  if (header[1] == "tcp") r.proto = Protocol::tcp;
  else if (header[1] == "udp") r.proto = Protocol::udp;
  else if (header[1] == "icmp") r.proto = Protocol::icmp;
  else if (header[1] == "ip") r.proto = Protocol::ip;
  else throw RuleParseError(line, "unknown protocol '" + std::string(header[1]) + "'");
  r.src_addr = parse_addr(header[2], line);
  r.src_port = parse_port(header[3], line);
  if (header[4] != "->") throw RuleParseError(line, "expected '->' direction");
  r.dst_addr = parse_addr(header[5], line);
  r.dst_port = parse_port(header[6], line);

  // Locate the matching close paren, honoring quotes.
  bool in_quote = false;
  size_t close = std::string_view::npos;
  for (size_t i = paren + 1; i < text.size(); ++i) {
    char c = text[i];
    if (in_quote) {
      if (c == '\\') ++i;
      else if (c == '"') in_quote = false;
    } else if (c == '"') {
      in_quote = true;
    } else if (c == '(') {
      throw RuleParseError(line, "nested '(' in option block");
    } else if (c == ')') {
      close = i;
      break;
    }
  }
  if (in_quote) throw RuleParseError(line, "unbalanced quote");
  if (close == std::string_view::npos) throw RuleParseError(line, "unbalanced parentheses");
  if (!trim(text.substr(close + 1)).empty())
    throw RuleParseError(line, "trailing characters after ')'");

  auto options = split_options(text.substr(paren + 1, close - paren - 1), line);
  if (options.empty()) throw RuleParseError(line, "empty option block");

  bool saw_msg = false, saw_sid = false;
  for (size_t oi = 0; oi < options.size(); ++oi) {
    std::string_view opt = options[oi];
    size_t colon = std::string_view::npos;
    {
      bool q = false;
      for (size_t i = 0; i < opt.size(); ++i) {
        if (q) {
          if (opt[i] == '\\') ++i;
          else if (opt[i] == '"') q = false;
        } else if (opt[i] == '"') q = true;
        else if (opt[i] == ':') { colon = i; break; }
      }
    }
    std::string_view key = trim(colon == std::string_view::npos ? opt : opt.substr(0, colon));
    std::string_view value = colon == std::string_view::npos ? "" : opt.substr(colon + 1);

    if (key == "msg") {
      if (oi != 0) throw RuleParseError(line, "msg must be the first option");
      if (saw_msg) throw RuleParseError(line, "duplicate msg");
      r.message = decode_msg(unquote(value, line, "msg"), line);
      saw_msg = true;
    } else if (key == "content") {
      if (saw_sid) throw RuleParseError(line, "content after sid");
      r.contents.push_back({decode_content(unquote(value, line, "content"), line), false});
    } else if (key == "nocase") {
      if (colon != std::string_view::npos) throw RuleParseError(line, "nocase takes no value");
      if (r.contents.empty()) throw RuleParseError(line, "nocase without preceding content");
      if (r.contents.back().nocase) throw RuleParseError(line, "duplicate nocase");
      r.contents.back().nocase = true;
    } else if (key == "sid") {
      if (oi + 1 != options.size()) throw RuleParseError(line, "sid must be the last option");
      uint64_t v;
      if (!parse_u64(trim(value), v) || v == 0 || v > 0xFFFFFFFFULL)
        throw RuleParseError(line, "invalid sid '" + std::string(trim(value)) + "'");
      r.sid = static_cast<uint32_t>(v);
      saw_sid = true;
    } else {
      throw RuleParseError(line, "unknown option '" + std::string(key) + "'");
    }
  }
  if (!saw_msg) throw RuleParseError(line, "missing msg option");
  if (!saw_sid) throw RuleParseError(line, "missing sid option");
  return r;
}

inline constexpr std::string_view kNameCommentPrefix = "# name: ";

inline RuleSet parse_ruleset(std::string_view text, std::string default_name = "") {
  RuleSet rs;
  rs.name = std::move(default_name);
  std::map<uint32_t, size_t> seen;  // sid -> line
  auto lines = split_lines(text);
  for (size_t idx = 0; idx < lines.size(); ++idx) {
    size_t line_no = idx + 1;
    std::string_view raw = lines[idx];
    if (idx == 0 && raw.starts_with(kNameCommentPrefix)) {
      rs.name = std::string(trim(raw.substr(kNameCommentPrefix.size())));
      continue;
    }
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    Rule r = parse_rule(line, line_no);
    auto [it, inserted] = seen.emplace(r.sid, line_no);
    if (!inserted)
      throw RuleParseError(line_no, "duplicate sid " + std::to_string(r.sid) +
                                        " (first on line " + std::to_string(it->second) + ")");
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

namespace detail {

inline void encode_msg(std::string& out, std::string_view msg) {
  for (char c : msg) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
}

inline void encode_content(std::string& out, std::string_view bytes) {
  static constexpr char hex[] = "0123456789ABCDEF";
  size_t i = 0;
  while (i < bytes.size()) {
    unsigned char c = static_cast<unsigned char>(bytes[i]);
    if (c >= 0x20 && c <= 0x7E) {
      if (c == '"' || c == '\\' || c == ';' || c == '|') out.push_back('\\');
      out.push_back(static_cast<char>(c));
      ++i;
    } else {
      out.push_back('|');
      bool first = true;
      while (i < bytes.size()) {
        unsigned char b = static_cast<unsigned char>(bytes[i]);
        if (b >= 0x20 && b <= 0x7E) break;
        if (!first) out.push_back(' ');
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0x0F]);
        first = false;
        ++i;
      }
      out.push_back('|');
    }
  }
}

inline void check_emittable_text(std::string_view s, std::string_view what) {
  for (char c : s)
    if (static_cast<unsigned char>(c) < 0x20)
      throw std::invalid_argument("control byte in " + std::string(what) +
                                  " cannot be emitted");
}

}  // namespace detail

inline std::string emit_rule(const Rule& r) {
  detail::check_emittable_text(r.message, "rule message");
  std::string out = "alert ";
  out += to_string(r.proto);
  out += ' ';
  out += r.src_addr.str();
  out += ' ';
  out += r.src_port.str();
  out += " -> ";
  out += r.dst_addr.str();
  out += ' ';
  out += r.dst_port.str();
  out += " (msg:\"";
  detail::encode_msg(out, r.message);
  out += "\";";
  for (const ContentPattern& c : r.contents) {
    out += " content:\"";
    detail::encode_content(out, c.bytes);
    out += "\";";
    if (c.nocase) out += " nocase;";
  }
  out += " sid:" + std::to_string(r.sid) + ";)";
  return out;
}

inline std::string emit_ruleset(const RuleSet& rs) {
  detail::check_emittable_text(rs.name, "ruleset name");
  std::vector<const Rule*> ordered;
  ordered.reserve(rs.rules.size());
  for (const Rule& r : rs.rules) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const Rule* a, const Rule* b) { return a->sid < b->sid; });
  std::string out(kNameCommentPrefix);
  out += rs.name;
  out += '\n';
  for (const Rule* r : ordered) {
    out += emit_rule(*r);
    out += '\n';
  }
  return out;
}

/// Splits `master` into (rules with sid in primary_sids, the rest).
inline std::pair<RuleSet, RuleSet> split(const RuleSet& master,
                                         std::span<const uint32_t> primary_sids) {
  std::unordered_set<uint32_t> want(primary_sids.begin(), primary_sids.end());
  for (uint32_t sid : want)
    if (!master.contains(sid))
      throw std::invalid_argument("split: sid " + std::to_string(sid) + " not in master");
  RuleSet primary, complementary;
  primary.name = master.name;
  complementary.name = master.name;
  for (const Rule& r : master.rules)
    (want.count(r.sid) ? primary : complementary).rules.push_back(r);
  return {std::move(primary), std::move(complementary)};
}

inline RuleSet load_ruleset_file(const std::filesystem::path& path) {
  return parse_ruleset(read_file(path), path.stem().string());
}

inline void save_ruleset_file(const std::filesystem::path& path, const RuleSet& rs) {
  write_file(path, emit_ruleset(rs));
}

}  // namespace mlids
