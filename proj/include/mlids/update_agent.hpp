#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlids/alert_store.hpp"
#include "mlids/engine.hpp"
#include "mlids/partitioner.hpp"
#include "mlids/rules.hpp"

// Scheduled ruleset synchronization. Each update is an epoch-stamped delta
// message (full rule bodies to add/replace, sids to remove) computed against a
// layer's live set and applied atomically between packet services. Deltas are
// recomputed from the current state every cycle, so a lost message is repaired
// by the next one; the epoch guard only ever rejects stale replays.
//
// Serialized form, one record:
//
//   delta layer=<id> epoch=<n> adds=<k> removes=<m>
//   add <rule line>
//   remove <sid>
//   end

namespace mlids {

struct RuleDelta {
  std::string target_layer;
  uint64_t epoch = 0;
  std::vector<Rule> add;         // full bodies; replaces same-sid rules
  std::vector<uint32_t> remove;  // sids only

  bool empty() const { return add.empty() && remove.empty(); }
};

struct SyncSchedule {
  uint64_t interval_us = 1'000'000;  // >= 1
};

/// Delta that transforms `current` into exactly `desired`.
inline RuleDelta compute_delta(const RuleSet& desired, const RuleSet& current,
                               std::string target_layer, uint64_t epoch) {
  RuleDelta d;
  d.target_layer = std::move(target_layer);
  d.epoch = epoch;
  for (const Rule& r : desired.rules) {
    const Rule* cur = current.find(r.sid);
    if (cur == nullptr || !(*cur == r)) d.add.push_back(r);
  }
  for (const Rule& r : current.rules)
    if (!desired.contains(r.sid)) d.remove.push_back(r.sid);
  std::sort(d.add.begin(), d.add.end(), [](const Rule& a, const Rule& b) { return a.sid < b.sid; });
  std::sort(d.remove.begin(), d.remove.end());
  return d;
}

/// (current \ removes) with adds upserted. Rejects epochs at or below
/// last_epoch; removes of unknown sids are counted, not fatal.
inline RuleSet apply_delta(const RuleSet& current, const RuleDelta& d, uint64_t last_epoch,
                           uint64_t* unknown_removes = nullptr) {
  if (d.epoch <= last_epoch)
    throw StaleEpochError("delta epoch " + std::to_string(d.epoch) +
                          " not newer than applied epoch " + std::to_string(last_epoch));
  std::map<uint32_t, Rule> by_sid;
  for (const Rule& r : current.rules) by_sid.emplace(r.sid, r);
  uint64_t unknown = 0;
  for (uint32_t sid : d.remove)
    if (by_sid.erase(sid) == 0) ++unknown;
  for (const Rule& r : d.add) by_sid.insert_or_assign(r.sid, r);
  if (unknown_removes) *unknown_removes = unknown;
  RuleSet out;
  out.name = current.name;
  out.rules.reserve(by_sid.size());
  for (auto& [sid, r] : by_sid) out.rules.push_back(std::move(r));
  return out;
}

inline std::string format_delta(const RuleDelta& d) {
  std::string out = "delta layer=" + d.target_layer + " epoch=" + std::to_string(d.epoch) +
                    " adds=" + std::to_string(d.add.size()) +
                    " removes=" + std::to_string(d.remove.size()) + "\n";
  for (const Rule& r : d.add) out += "add " + emit_rule(r) + "\n";
  for (uint32_t sid : d.remove) out += "remove " + std::to_string(sid) + "\n";
  out += "end\n";
  return out;
}

struct DeltaParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses one serialized delta record (the format_delta output).
inline RuleDelta parse_delta(std::string_view text) {
  auto lines = split_lines(text);
  size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i >= lines.size()) throw DeltaParseError("empty delta record");
  auto head = split_ws(trim(lines[i]));
  if (head.size() != 5 || head[0] != "delta") throw DeltaParseError("bad delta header");
  RuleDelta d;
  uint64_t adds = 0, removes = 0;
  for (size_t k = 1; k < 5; ++k) {
    std::string_view tok = head[k];
    size_t eq = tok.find('=');
    if (eq == std::string_view::npos) throw DeltaParseError("bad delta header token");
    std::string_view key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "layer") d.target_layer = std::string(val);
    else if (key == "epoch") {
      if (!parse_u64(val, d.epoch)) throw DeltaParseError("bad epoch");
    } else if (key == "adds") {
      if (!parse_u64(val, adds)) throw DeltaParseError("bad adds count");
    } else if (key == "removes") {
      if (!parse_u64(val, removes)) throw DeltaParseError("bad removes count");
    } else throw DeltaParseError("unknown delta header key " + std::string(key));
  }
  ++i;
  for (; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    if (line == "end") {
      if (d.add.size() != adds || d.remove.size() != removes)
        throw DeltaParseError("delta body does not match declared counts");
      for (const Rule& r : d.add)
        for (uint32_t sid : d.remove)
          if (r.sid == sid)
            throw DeltaParseError("sid " + std::to_string(sid) + " both added and removed");
      return d;
    }
    if (line.starts_with("add ")) {
      d.add.push_back(parse_rule(line.substr(4), i + 1));
    } else if (line.starts_with("remove ")) {
      uint64_t sid;
      if (!parse_u64(trim(line.substr(7)), sid) || sid == 0 || sid > 0xFFFFFFFFULL)
        throw DeltaParseError("bad remove sid");
      d.remove.push_back(static_cast<uint32_t>(sid));
    } else {
      throw DeltaParseError("unexpected delta body line: " + std::string(line));
    }
  }
  throw DeltaParseError("delta record missing 'end'");
}

/// Append-only audit journal of applied deltas.
class DeltaJournal {
 public:
  explicit DeltaJournal(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw IoError("cannot open sync journal " + path.string());
  }

  void record(const RuleDelta& d) {
    out_ << format_delta(d);
    out_.flush();
    if (!out_) throw IoError("write failure on sync journal " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

// Periodic repartitioning driver. Holds the master set; each cycle reads the
// alert statistics, recomputes the partition, and ships per-layer deltas:
// primary-role layers receive the frequent set, complementary-role layers the
// remainder. Layers already in the desired state receive nothing.
class SyncCoordinator {
 public:
  SyncCoordinator(RuleSet master, PartitionParams params, SyncSchedule sched = {})
      : master_(std::move(master)), params_(params), sched_(sched) {
    if (sched_.interval_us < 1) throw std::invalid_argument("sync interval must be >= 1");
  }

  const RuleSet& master() const { return master_; }
  void set_master(RuleSet rs) { master_ = std::move(rs); }
  const PartitionParams& params() const { return params_; }
  uint64_t interval_us() const { return sched_.interval_us; }
  void attach_journal(DeltaJournal* j) { journal_ = j; }

  /// One sync cycle against the log's current statistics. Returns the deltas
  /// that were actually applied (empty ones are skipped).
  std::vector<RuleDelta> run_cycle(uint64_t now_us, const AlertLog& log, Engine& engine) {
    (void)now_us;
    Partition part = partition(master_, log.stats(), params_);
    auto [primary, complementary] = split(master_, part.primary_sids);
    std::vector<RuleDelta> applied;
    for (size_t i = 0; i < engine.layer_count(); ++i) {
      const std::string& id = engine.layer_id(i);
      const RuleSet& desired =
          engine.role_of(id) == LayerRole::primary ? primary : complementary;
      RuleDelta d = compute_delta(desired, engine.ruleset_of(id), id, next_epoch_);
      if (d.empty()) continue;
      uint64_t last = engine.epoch_of(id);
      RuleSet next = apply_delta(engine.ruleset_of(id), d, last);
      engine.swap_ruleset(id, std::move(next), d.epoch);
      ++next_epoch_;
      if (journal_) journal_->record(d);
      applied.push_back(std::move(d));
    }
    return applied;
  }

  /// Adapter for Engine::run's scheduled-callback form.
  Engine::SyncFn hook(const AlertLog& log) {
    return [this, &log](uint64_t now_us, Engine& engine) { run_cycle(now_us, log, engine); };
  }

 private:
  RuleSet master_;
  PartitionParams params_;
  SyncSchedule sched_;
  uint64_t next_epoch_ = 1;
  DeltaJournal* journal_ = nullptr;
};

}  // namespace mlids
