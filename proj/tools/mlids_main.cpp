// mlids — multi-layer signature IDS toolkit.
//
// Subcommands:
//   train        match a pcap against a full ruleset and log every alert
//   partition    derive frequent/complementary rule files from an alert log
//   replay       run a pcap through configured layers, report drop stats
//   flood-bench  generate a signature flood and compare full vs partitioned
//
// Exit codes: 0 success, 1 usage error, 2 input parse error, 3 runtime/IO.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mlids/mlids.hpp"

namespace {

namespace fs = std::filesystem;

// Config-ish inputs may live in $MLIDS_CONFIG_DIR; explicit and existing
// paths always win.
fs::path resolve_config_path(const std::string& arg) {
  fs::path p(arg);
  if (p.is_absolute() || fs::exists(p)) return p;
  if (const char* dir = std::getenv("MLIDS_CONFIG_DIR")) {
    fs::path alt = fs::path(dir) / p;
    if (fs::exists(alt)) return alt;
  }
  return p;
}

struct PartitionCliParams {
  uint64_t min_freq = 1;
  std::string valid_time = "include-all";
  std::string max_num = "unbounded";

  mlids::PartitionParams parse() const {
    mlids::PartitionParams p;
    p.min_freq = min_freq;
    if (valid_time != "include-all") {
      uint64_t v;
      if (!mlids::parse_u64(valid_time, v))
        throw CLI::ValidationError("--valid-time", "expected a ts_us integer or 'include-all'");
      p.valid_time = v;
    }
    if (max_num != "unbounded") {
      uint64_t v;
      if (!mlids::parse_u64(max_num, v) || v < 1)
        throw CLI::ValidationError("--max-num", "expected a positive integer or 'unbounded'");
      p.max_num = v;
    }
    return p;
  }
};

int cmd_train(const std::string& rules_path, const std::string& pcap_path,
              const std::string& alerts_out) {
  mlids::RuleSet rules = mlids::load_ruleset_file(rules_path);
  mlids::PcapReadResult in = mlids::read_pcap_file(pcap_path);
  mlids::AlertLog log = mlids::AlertLog::open(alerts_out);
  mlids::LayerConfig cfg;
  cfg.layer_id = "master";
  cfg.ruleset = std::move(rules);
  cfg.queue_capacity.reset();  // training never drops
  mlids::Engine engine({std::move(cfg)}, log);
  engine.run(in.stream);
  std::cout << "packets=" << in.stream.size() << " skipped=" << in.skipped_frames
            << " alerts=" << log.size() << "\n";
  return 0;
}

int cmd_partition(const std::string& rules_path, const std::string& alerts_path,
                  const PartitionCliParams& cli, const std::string& primary_out,
                  const std::string& complement_out) {
  mlids::RuleSet master = mlids::load_ruleset_file(rules_path);
  mlids::AlertLogLoad log =
      mlids::parse_alert_log(mlids::read_file(alerts_path), mlids::LogStrictness::strict);
  mlids::Partition part = mlids::partition(master, mlids::stats(log.records), cli.parse());
  mlids::apply_partition(master, part, primary_out, complement_out);
  if (part.ignored_unknown_sids > 0)
    std::cerr << "warning: " << part.ignored_unknown_sids
              << " alert sid(s) not present in the master set\n";
  std::cerr << "wrote " << primary_out << " (" << part.primary_sids.size() << " rules), "
            << complement_out << " (" << part.complementary_sids.size() << " rules)\n";
  std::cout << part.primary_sids.size() << "\n";
  return 0;
}

mlids::RunReport report_for(const std::string& scenario, const mlids::Engine& engine) {
  mlids::RunReport rep;
  for (size_t i = 0; i < engine.layer_count(); ++i) {
    const std::string& id = engine.layer_id(i);
    rep.rows.push_back({scenario, id, engine.stats_of(id)});
  }
  return rep;
}

int cmd_replay(const std::string& layers_path, const std::string& pcap_path,
               const std::string& alerts_out, const std::string& report_out,
               const std::string& label) {
  auto layers = mlids::load_layer_configs(resolve_config_path(layers_path));
  mlids::PcapReadResult in = mlids::read_pcap_file(pcap_path);
  mlids::AlertLog log = mlids::AlertLog::open(alerts_out);
  mlids::Engine engine(std::move(layers), log);
  engine.run(in.stream);
  mlids::RunReport rep = report_for(label, engine);
  rep.params.push_back("pcap_packets=" + std::to_string(in.stream.size()));
  rep.params.push_back("pcap_skipped=" + std::to_string(in.skipped_frames));
  if (!report_out.empty()) mlids::write_file(report_out, mlids::to_csv(rep));
  mlids::write_table(std::cout, rep);
  return 0;
}

// Built-in benchmark inputs, used when no scenario/config files are given.
constexpr size_t kBenchMasterRules = 3211;
constexpr uint64_t kBenchMasterSeed = 7;
constexpr double kBenchServiceRate = 8e7;
constexpr uint64_t kBenchQueueCapacity = 64;

mlids::RuleSet bench_master() {
  return mlids::generate_synthetic_ruleset(kBenchMasterRules, kBenchMasterSeed);
}

// Simulated training pass: the first 33 master rules fire with decreasing
// frequency, everything else stays quiet.
mlids::AlertLog bench_training_log(const mlids::RuleSet& master) {
  mlids::PacketStream stream;
  stream.label = "bench-training";
  uint64_t ts = 0;
  for (uint32_t sid = 1; sid <= 33; ++sid) {
    const mlids::Rule* r = master.find(sid);
    for (uint64_t k = 0; k < 39 - sid; ++k) {
      stream.packets.push_back(mlids::packet_from_rule(*r, ts));
      ts += 100;
    }
  }
  mlids::AlertLog log;
  mlids::LayerConfig cfg;
  cfg.layer_id = "training";
  cfg.ruleset = master;
  cfg.queue_capacity.reset();
  mlids::Engine engine({std::move(cfg)}, log);
  engine.run(stream);
  return log;
}

mlids::LayerConfig bench_layer(std::string id, mlids::LayerRole role, mlids::RuleSet rules) {
  mlids::LayerConfig cfg;
  cfg.layer_id = std::move(id);
  cfg.role = role;
  cfg.ruleset = std::move(rules);
  cfg.service_rate = kBenchServiceRate;
  cfg.queue_capacity = kBenchQueueCapacity;
  return cfg;
}

struct FloodCliFlags {
  std::string gen_rules;  // generation ruleset path; enables the flag form
  mlids::FloodSpec spec;
};

int cmd_flood_bench(const std::string& scenario_path, const FloodCliFlags& flags,
                    const std::string& full_layers_path, const std::string& split_layers_path,
                    const std::string& report_out) {
  if (!scenario_path.empty() && !flags.gen_rules.empty())
    throw CLI::ValidationError("flood-bench", "--scenario and --gen-rules are exclusive");
  bool have_flood = !scenario_path.empty() || !flags.gen_rules.empty();
  bool defaults = !have_flood && full_layers_path.empty() && split_layers_path.empty();
  if (!defaults && (!have_flood || full_layers_path.empty() || split_layers_path.empty()))
    throw CLI::ValidationError("flood-bench",
                               "give a flood (--scenario or --gen-rules with flags) plus "
                               "--full-layers and --split-layers, or nothing for the "
                               "built-in benchmark");

  mlids::PacketStream stream;
  mlids::FloodStats fstats;
  std::vector<mlids::LayerConfig> full_layers, split_layers;
  std::vector<std::string> params;

  if (defaults) {
    mlids::RuleSet master = bench_master();
    mlids::AlertLog training = bench_training_log(master);
    mlids::Partition part = mlids::partition(master, training.stats(), {});
    auto [primary, complement] = mlids::split(master, part.primary_sids);
    mlids::FloodSpec spec;
    stream = mlids::generate_flood(master, spec, &fstats);
    full_layers.push_back(bench_layer("full", mlids::LayerRole::primary, std::move(master)));
    split_layers.push_back(
        bench_layer("primary", mlids::LayerRole::primary, std::move(primary)));
    split_layers.push_back(
        bench_layer("complementary", mlids::LayerRole::complementary, std::move(complement)));
    params.push_back("scenario=builtin");
    params.push_back("master_rules=" + std::to_string(kBenchMasterRules));
    params.push_back("primary_rules=" + std::to_string(part.primary_sids.size()));
    params.push_back("rate_pps=" + std::to_string(spec.rate_pps));
    params.push_back("duration_us=" + std::to_string(spec.duration_us));
    params.push_back("attack_fraction=" + mlids::detail::fixed(spec.attack_fraction, 3));
    params.push_back("seed=" + std::to_string(spec.seed));
    params.push_back("service_rate=" + mlids::detail::fixed(kBenchServiceRate, 0));
    params.push_back("queue_capacity=" + std::to_string(kBenchQueueCapacity));
  } else {
    mlids::Scenario sc;
    if (!scenario_path.empty()) {
      sc = mlids::load_scenario(resolve_config_path(scenario_path));
    } else {
      sc.label = "flags";
      sc.flood = flags.spec;
      sc.ruleset_path = flags.gen_rules;
    }
    mlids::RuleSet genset = mlids::load_ruleset_file(sc.ruleset_path);
    stream = mlids::generate_flood(genset, sc.flood, &fstats);
    full_layers = mlids::load_layer_configs(resolve_config_path(full_layers_path));
    split_layers = mlids::load_layer_configs(resolve_config_path(split_layers_path));
    params.push_back("scenario=" + sc.label);
    params.push_back("rate_pps=" + std::to_string(sc.flood.rate_pps));
    params.push_back("duration_us=" + std::to_string(sc.flood.duration_us));
    params.push_back("attack_fraction=" + mlids::detail::fixed(sc.flood.attack_fraction, 3));
    params.push_back("seed=" + std::to_string(sc.flood.seed));
  }
  params.push_back("packets=" + std::to_string(stream.size()));
  params.push_back("attack_packets=" + std::to_string(fstats.attack_packets));
  params.push_back("benign_packets=" + std::to_string(fstats.benign_packets));

  mlids::RunReport rep;
  rep.params = std::move(params);

  std::string full_front = full_layers.front().layer_id;
  std::string split_primary;
  for (const auto& l : split_layers)
    if (split_primary.empty() && l.role == mlids::LayerRole::primary)
      split_primary = l.layer_id;
  if (split_primary.empty()) split_primary = split_layers.front().layer_id;

  mlids::AlertLog full_log;
  mlids::Engine full_engine(std::move(full_layers), full_log);
  full_engine.run(stream);
  for (const auto& row : report_for("full", full_engine).rows) rep.rows.push_back(row);

  mlids::AlertLog split_log;
  mlids::Engine split_engine(std::move(split_layers), split_log);
  split_engine.run(stream);
  for (const auto& row : report_for("split", split_engine).rows) rep.rows.push_back(row);

  rep.ratios.push_back({full_front + "/" + split_primary,
                        full_engine.stats_of(full_front).drop_pct(),
                        split_engine.stats_of(split_primary).drop_pct()});

  if (!report_out.empty()) mlids::write_file(report_out, mlids::to_csv(rep));
  mlids::write_table(std::cout, rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-layer signature IDS toolkit"};
  app.require_subcommand(1);

  std::string rules_path, pcap_path, alerts_path, alerts_out, report_out;
  std::string primary_out = "signature.rule", complement_out = "complement.rule";
  std::string layers_path, scenario_path, full_layers_path, split_layers_path;
  std::string label = "replay";
  PartitionCliParams pcli;

  CLI::App* train = app.add_subcommand("train", "log alerts for a pcap against a full ruleset");
  train->add_option("--rules", rules_path, "master rule file")->required();
  train->add_option("--pcap", pcap_path, "input pcap")->required();
  train->add_option("--alerts-out", alerts_out, "alert log to write")->required();

  CLI::App* part = app.add_subcommand("partition", "derive rule files from alert statistics");
  part->add_option("--rules", rules_path, "master rule file")->required();
  part->add_option("--alerts", alerts_path, "alert log to aggregate")->required();
  part->add_option("--min-freq", pcli.min_freq, "minimum occurrence count");
  part->add_option("--valid-time", pcli.valid_time, "ts_us threshold or 'include-all'");
  part->add_option("--max-num", pcli.max_num, "capacity or 'unbounded'");
  part->add_option("--primary-out", primary_out, "frequent-signature rule file");
  part->add_option("--complement-out", complement_out, "complementary rule file");

  CLI::App* replay = app.add_subcommand("replay", "run a pcap through configured layers");
  replay->add_option("--layers", layers_path, "layer config file")->required();
  replay->add_option("--pcap", pcap_path, "input pcap")->required();
  replay->add_option("--alerts-out", alerts_out, "alert log to write")->required();
  replay->add_option("--report-out", report_out, "stats CSV to write");
  replay->add_option("--label", label, "scenario label in the report");

  FloodCliFlags flood_flags;
  CLI::App* bench = app.add_subcommand("flood-bench", "compare full vs partitioned under flood");
  bench->add_option("--scenario", scenario_path, "flood scenario file");
  bench->add_option("--gen-rules", flood_flags.gen_rules,
                    "generation ruleset (flag form of a scenario)");
  bench->add_option("--rate-pps", flood_flags.spec.rate_pps, "flood rate, packets per second")
      ->check(CLI::PositiveNumber);
  bench->add_option("--duration-us", flood_flags.spec.duration_us, "flood duration");
  bench->add_option("--attack-fraction", flood_flags.spec.attack_fraction,
                    "share of rule-triggering packets [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--seed", flood_flags.spec.seed, "flood generator seed");
  bench->add_option("--full-layers", full_layers_path, "layer config for the full database");
  bench->add_option("--split-layers", split_layers_path, "layer config for the partitioned pair");
  bench->add_option("--report-out", report_out, "stats CSV to write");

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(rules_path, pcap_path, alerts_out);
    if (part->parsed())
      return cmd_partition(rules_path, alerts_path, pcli, primary_out, complement_out);
    if (replay->parsed())
      return cmd_replay(layers_path, pcap_path, alerts_out, report_out, label);
    if (bench->parsed())
      return cmd_flood_bench(scenario_path, flood_flags, full_layers_path, split_layers_path,
                             report_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const mlids::RuleParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mlids::PcapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mlids::AlertParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mlids::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mlids::DeltaParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mlids::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
