#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlids/common.hpp"
#include "mlids/engine.hpp"
#include "mlids/rules.hpp"
#include "mlids/trafficgen.hpp"

// Text config files for the CLI. Layer configs list one layer per line:
//
//   layer id=primary role=primary rules=signature.rule service_rate=8e7 \
//         queue_capacity=64 cost_mode=per_rule_scan alpha=100 beta=1 gamma=0.5
//
// (backslash shown for readability only; records are single lines). Scenario
// files are plain key=value lines: rate_pps, duration_us, attack_fraction,
// seed, ruleset. Relative rule/ruleset paths resolve against the config
// file's directory.

namespace mlids {

struct ConfigError : std::runtime_error {
  ConfigError(size_t line, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line) + ": " + msg) {}
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline std::map<std::string, std::string> kv_tokens(std::string_view s, size_t line) {
  std::map<std::string, std::string> out;
  for (std::string_view tok : split_ws(s)) {
    size_t eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line, "expected key=value, got '" + std::string(tok) + "'");
    auto [it, fresh] = out.emplace(tok.substr(0, eq), tok.substr(eq + 1));
    if (!fresh) throw ConfigError(line, "duplicate key '" + it->first + "'");
  }
  return out;
}

inline double parse_double(const std::string& s, size_t line, std::string_view key) {
  double v;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError(line, "bad number for " + std::string(key) + ": '" + s + "'");
  return v;
}

}  // namespace detail

/// Parses a layer config file and loads the referenced rule files.
inline std::vector<LayerConfig> load_layer_configs(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::filesystem::path base = path.parent_path();
  std::vector<LayerConfig> out;
  auto lines = split_lines(text);
  for (size_t idx = 0; idx < lines.size(); ++idx) {
    size_t line_no = idx + 1;
    std::string_view line = trim(lines[idx]);
    if (line.empty() || line.front() == '#') continue;
    if (!line.starts_with("layer"))
      throw ConfigError(line_no, "expected a 'layer' record");
    auto kv = detail::kv_tokens(line.substr(5), line_no);
    auto take = [&](const char* key) -> std::optional<std::string> {
      auto it = kv.find(key);
      if (it == kv.end()) return std::nullopt;
      std::string v = it->second;
      kv.erase(it);
      return v;
    };
    LayerConfig cfg;
    auto id = take("id");
    if (!id || id->empty()) throw ConfigError(line_no, "layer needs id=...");
    cfg.layer_id = *id;
    auto role = take("role");
    if (!role) throw ConfigError(line_no, "layer needs role=primary|complementary");
    if (*role == "primary") cfg.role = LayerRole::primary;
    else if (*role == "complementary") cfg.role = LayerRole::complementary;
    else throw ConfigError(line_no, "bad role '" + *role + "'");
    auto rules = take("rules");
    if (!rules) throw ConfigError(line_no, "layer needs rules=<path>");
    std::filesystem::path rp(*rules);
    if (rp.is_relative()) rp = base / rp;
    cfg.ruleset = load_ruleset_file(rp);
    if (auto v = take("service_rate")) {
      cfg.service_rate = detail::parse_double(*v, line_no, "service_rate");
      if (cfg.service_rate <= 0) throw ConfigError(line_no, "service_rate must be > 0");
    }
    if (auto v = take("queue_capacity")) {
      if (*v == "unbounded") cfg.queue_capacity.reset();
      else {
        uint64_t n;
        if (!parse_u64(*v, n) || n < 1)
          throw ConfigError(line_no, "queue_capacity must be >= 1 or 'unbounded'");
        cfg.queue_capacity = n;
      }
    }
    if (auto v = take("cost_mode")) {
      if (*v == "per_rule_scan") cfg.cost.mode = CostMode::per_rule_scan;
      else if (*v == "automaton") cfg.cost.mode = CostMode::automaton;
      else throw ConfigError(line_no, "bad cost_mode '" + *v + "'");
    }
    if (auto v = take("alpha")) cfg.cost.alpha = detail::parse_double(*v, line_no, "alpha");
    if (auto v = take("beta")) cfg.cost.beta = detail::parse_double(*v, line_no, "beta");
    if (auto v = take("gamma")) cfg.cost.gamma = detail::parse_double(*v, line_no, "gamma");
    if (cfg.cost.alpha < 0 || cfg.cost.beta < 0 || cfg.cost.gamma < 0)
      throw ConfigError(line_no, "cost coefficients must be >= 0");
    if (!kv.empty())
      throw ConfigError(line_no, "unknown key '" + kv.begin()->first + "'");
    out.push_back(std::move(cfg));
  }
  if (out.empty()) throw ConfigError("no layers defined in " + path.string());
  return out;
}

struct Scenario {
  std::string label = "flood";
  FloodSpec flood;
  std::filesystem::path ruleset_path;  // generation ruleset
};

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::string text = read_file(path);
  Scenario sc;
  sc.label = path.stem().string();
  bool have_ruleset = false;
  auto lines = split_lines(text);
  for (size_t idx = 0; idx < lines.size(); ++idx) {
    size_t line_no = idx + 1;
    std::string_view line = trim(lines[idx]);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key=value");
    std::string key(trim(line.substr(0, eq)));
    std::string val(trim(line.substr(eq + 1)));
    if (key == "rate_pps") {
      if (!parse_u64(val, sc.flood.rate_pps) || sc.flood.rate_pps == 0)
        throw ConfigError(line_no, "rate_pps must be a positive integer");
    } else if (key == "duration_us") {
      if (!parse_u64(val, sc.flood.duration_us))
        throw ConfigError(line_no, "bad duration_us");
    } else if (key == "attack_fraction") {
      sc.flood.attack_fraction = detail::parse_double(val, line_no, key);
      if (sc.flood.attack_fraction < 0 || sc.flood.attack_fraction > 1)
        throw ConfigError(line_no, "attack_fraction must be in [0, 1]");
    } else if (key == "seed") {
      if (!parse_u64(val, sc.flood.seed)) throw ConfigError(line_no, "bad seed");
    } else if (key == "ruleset") {
      std::filesystem::path rp(val);
      sc.ruleset_path = rp.is_relative() ? path.parent_path() / rp : rp;
      have_ruleset = true;
    } else if (key == "label") {
      sc.label = val;
    } else {
      throw ConfigError(line_no, "unknown key '" + key + "'");
    }
  }
  if (!have_ruleset) throw ConfigError("scenario " + path.string() + " needs ruleset=<path>");
  return sc;
}

}  // namespace mlids
