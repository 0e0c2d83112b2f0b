#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "mlids/alert_store.hpp"
#include "mlids/rules.hpp"

// Selects the frequent-signature set for the small front-line database and
// leaves the remainder in the complementary database. A sid is a candidate
// when its alert frequency and last detection time clear the thresholds;
// candidates are admitted in descending-frequency order (ties by ascending
// sid) until the capacity is reached.

namespace mlids {

struct PartitionParams {
  uint64_t min_freq = 1;
  std::optional<uint64_t> valid_time;  // nullopt: include all detection times
  std::optional<uint64_t> max_num;     // nullopt: unbounded capacity

  static constexpr std::optional<uint64_t> kIncludeAll = std::nullopt;
  static constexpr std::optional<uint64_t> kUnbounded = std::nullopt;
};

struct Partition {
  std::vector<uint32_t> primary_sids;        // admission order (freq desc, sid asc)
  std::vector<uint32_t> complementary_sids;  // ascending sid
  uint64_t ignored_unknown_sids = 0;         // stats sids not present in master
};

inline Partition partition(const RuleSet& master, const StatsMap& st,
                           const PartitionParams& p) {
  if (p.max_num && *p.max_num < 1)
    throw std::invalid_argument("max_num must be >= 1 when bounded");
  Partition out;
  std::vector<const SignatureStats*> candidates;
  for (const auto& [sid, s] : st) {
    if (!master.contains(sid)) {
      ++out.ignored_unknown_sids;
      continue;
    }
    if (s.freq < p.min_freq) continue;
    if (p.valid_time && s.ltime < *p.valid_time) continue;
    candidates.push_back(&s);
  }
  // StatsMap iterates in ascending sid order, so a stable sort by descending
  // frequency leaves ties ordered by ascending sid.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SignatureStats* a, const SignatureStats* b) {
                     return a->freq > b->freq;
                   });
  size_t cap = p.max_num ? *p.max_num : candidates.size();
  if (cap > candidates.size()) cap = candidates.size();
  out.primary_sids.reserve(cap);
  std::unordered_set<uint32_t> admitted;
  for (size_t i = 0; i < cap; ++i) {
    out.primary_sids.push_back(candidates[i]->sid);
    admitted.insert(candidates[i]->sid);
  }
  std::vector<uint32_t> all = master.sids();
  std::sort(all.begin(), all.end());
  for (uint32_t sid : all)
    if (!admitted.count(sid)) out.complementary_sids.push_back(sid);
  return out;
}

/// Writes the two rule files for a partition of `master`. Idempotent: repeated
/// calls produce byte-identical files.
inline void apply_partition(const RuleSet& master, const Partition& part,
                            const std::filesystem::path& primary_path = "signature.rule",
                            const std::filesystem::path& complementary_path = "complement.rule") {
  if (part.primary_sids.size() + part.complementary_sids.size() != master.size())
    throw std::invalid_argument("apply_partition: partition does not cover master");
  auto [primary, complementary] = split(master, part.primary_sids);
  for (uint32_t sid : part.complementary_sids)
    if (!complementary.contains(sid))
      throw std::invalid_argument("apply_partition: sid " + std::to_string(sid) +
                                  " not in complementary remainder");
  primary.name = primary_path.stem().string();
  complementary.name = complementary_path.stem().string();
  save_ruleset_file(primary_path, primary);
  save_ruleset_file(complementary_path, complementary);
}

}  // namespace mlids
