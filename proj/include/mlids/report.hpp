#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "mlids/engine.hpp"

// Run reports: one row of counters per (scenario, layer) plus ratio rows
// comparing scenarios. CSV columns are fixed; drop percentages carry three
// decimals, ratios two. Parameter echoes ride along as '#' comment lines so a
// report is self-describing.

namespace mlids {

struct ReportRow {
  std::string scenario;
  std::string layer_id;
  LayerStats stats;
};

struct RatioRow {
  std::string label;  // e.g. "full/primary"
  double numerator = 0.0;
  double denominator = 0.0;

  double value() const { return numerator / denominator; }
};

struct RunReport {
  std::vector<std::string> params;  // echoed key=value strings
  std::vector<ReportRow> rows;
  std::vector<RatioRow> ratios;
};

namespace detail {

inline std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const RunReport& r) {
  std::string out;
  for (const std::string& p : r.params) out += "# " + p + "\n";
  out += "scenario,layer_id,received,analyzed,dropped,drop_pct\n";
  for (const ReportRow& row : r.rows) {
    out += row.scenario + "," + row.layer_id + "," + std::to_string(row.stats.received) + "," +
           std::to_string(row.stats.analyzed) + "," + std::to_string(row.stats.dropped) + "," +
           detail::fixed(row.stats.drop_pct(), 3) + "\n";
  }
  for (const RatioRow& rr : r.ratios)
    out += "ratio," + rr.label + ",,,," + detail::fixed(rr.value(), 2) + "\n";
  return out;
}

inline void write_table(std::ostream& os, const RunReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %-16s %12s %12s %12s %10s", "scenario", "layer",
                "received", "analyzed", "dropped", "drop%");
  os << buf << '\n';
  for (const ReportRow& row : r.rows) {
    std::snprintf(buf, sizeof(buf), "%-12s %-16s %12llu %12llu %12llu %10s",
                  row.scenario.c_str(), row.layer_id.c_str(),
                  static_cast<unsigned long long>(row.stats.received),
                  static_cast<unsigned long long>(row.stats.analyzed),
                  static_cast<unsigned long long>(row.stats.dropped),
                  detail::fixed(row.stats.drop_pct(), 3).c_str());
    os << buf << '\n';
  }
  for (const RatioRow& rr : r.ratios)
    os << "drop ratio " << rr.label << ": " << detail::fixed(rr.value(), 2) << '\n';
}

}  // namespace mlids
