#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "mlids/alert_store.hpp"
#include "mlids/baseline.hpp"

using namespace mlids;

namespace {

Alert alert(uint64_t ts, uint32_t sid) {
  Alert a;
  a.ts_us = ts;
  a.sid = sid;
  a.layer_id = "test";
  a.proto = IpProto::tcp;
  a.src_ip = 0x0A000001;
  a.dst_ip = 0x0A000002;
  a.src_port = 1000;
  a.dst_port = 80;
  return a;
}

}  // namespace

TEST_CASE("append keeps order and validates") {
  AlertLog log;
  log.append(alert(10, 5));
  CHECK(log.size() == 1);
  log.append(alert(20, 5));
  REQUIRE(log.size() == 2);
  CHECK(log.records()[0].ts_us == 10);
  CHECK(log.records()[1].ts_us == 20);
  CHECK_THROWS_AS(log.append(alert(30, 0)), std::invalid_argument);
  Alert bad = alert(30, 1);
  bad.layer_id = "has space";
  CHECK_THROWS_AS(log.append(bad), std::invalid_argument);
  CHECK(log.size() == 2);
}

TEST_CASE("stats counts and maxes") {
  AlertLog log;
  log.append(alert(10, 5));
  log.append(alert(20, 5));
  StatsMap st = log.stats();
  REQUIRE(st.size() == 1);
  CHECK(st[5].freq == 2);
  CHECK(st[5].ltime == 20);
  CHECK(stats({}).empty());
}

TEST_CASE("line format round-trips") {
  Alert a = alert(1234567, 42);
  a.proto = IpProto::icmp;
  a.src_port = 0;
  a.dst_port = 0;
  std::string line = format_alert(a);
  CHECK(parse_alert_line(line, 1) == a);
}

TEST_CASE("strict mode aborts with the record number") {
  std::string text =
      format_alert(alert(1, 1)) + "\n" +
      "ts_us=2 sid=2 layer=x proto=tcp src=1.2.3.4 sport=1 dst=4.3.2.1 dport=2 extra=9\n" +
      format_alert(alert(3, 3)) + "\n";
  try {
    parse_alert_log(text, LogStrictness::strict);
    FAIL("expected AlertParseError");
  } catch (const AlertParseError& e) {
    CHECK(e.record == 2);
  }
  AlertLogLoad lenient = parse_alert_log(text, LogStrictness::lenient);
  CHECK(lenient.records.size() == 2);
  CHECK(lenient.skipped == 1);
}

TEST_CASE("corrupt values are diagnosed") {
  CHECK_THROWS_AS(parse_alert_line("ts_us=x sid=1 layer=a proto=tcp src=1.1.1.1 sport=1 "
                                   "dst=2.2.2.2 dport=2",
                                   1),
                  AlertParseError);
  CHECK_THROWS_AS(parse_alert_line("ts_us=1 sid=1 layer=a proto=bogus src=1.1.1.1 sport=1 "
                                   "dst=2.2.2.2 dport=2",
                                   1),
                  AlertParseError);
  CHECK_THROWS_AS(parse_alert_line("ts_us=1 sid=1", 1), AlertParseError);
  CHECK_THROWS_AS(parse_alert_line("ts_us=1 ts_us=2 sid=1 layer=a proto=tcp src=1.1.1.1 "
                                   "sport=1 dst=2.2.2.2 dport=2",
                                   1),
                  AlertParseError);
}

TEST_CASE("keys parse in any order") {
  Alert a = alert(77, 9);
  a.layer_id = "L9";
  std::string line = "dport=80 layer=L9 src=10.0.0.1 sid=9 proto=tcp sport=1000 dst=10.0.0.2 "
                     "ts_us=77";
  CHECK(parse_alert_line(line, 1) == a);
}

TEST_CASE("file sink persists appends") {
  auto path = std::filesystem::temp_directory_path() / "mlids_alert_store_test.log";
  {
    AlertLog log = AlertLog::open(path);
    log.append(alert(10, 5));
    log.append(alert(20, 6));
    log.flush();
  }
  AlertLogLoad load = parse_alert_log(read_file(path), LogStrictness::strict);
  REQUIRE(load.records.size() == 2);
  CHECK(load.records[0].sid == 5);
  CHECK(load.records[1].sid == 6);
  std::filesystem::remove(path);
}

TEST_CASE("frequency sum equals record count") {
  std::vector<Alert> log = baseline_alerts();
  StatsMap st = stats(log);
  uint64_t sum = 0;
  for (const auto& [sid, s] : st) sum += s.freq;
  CHECK(sum == log.size());
  CHECK(sum == baseline_total_alerts());
}

TEST_CASE("baseline fixture reproduces the reference counts") {
  std::vector<Alert> log = baseline_alerts();
  StatsMap st = stats(log);
  REQUIRE(st.size() == 33);
  uint32_t echo_reply_sid = 0;
  for (const auto& e : baseline_signatures())
    if (std::string(e.message) == "ICMP Echo Reply") echo_reply_sid = e.sid;
  REQUIRE(echo_reply_sid != 0);
  CHECK(st[echo_reply_sid].freq == 3409);
  for (const auto& e : baseline_signatures()) CHECK(st[e.sid].freq == e.occurrences);
}

TEST_CASE("log parser survives garbage in lenient and strict mode") {
  std::string valid;
  for (int i = 1; i <= 20; ++i) valid += format_alert(alert(i * 10, i)) + "\n";
  SplitMix64 g(7);
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    std::string text = valid;
    for (size_t k = 1 + g.bounded(10); k > 0; --k)
      text[g.bounded(text.size())] = static_cast<char>(g.bounded(128));
    AlertLogLoad lenient = parse_alert_log(text, LogStrictness::lenient);
    CHECK(lenient.records.size() + lenient.skipped >= 1);
    try {
      parse_alert_log(text, LogStrictness::strict);
    } catch (const AlertParseError&) {
    }
  }
}

TEST_CASE("stats is a pure fold") {
  std::vector<Alert> log = baseline_alerts();
  CHECK(stats(log) == stats(log));
}
