// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vbeacon/metrics.hpp"

using namespace vbeacon;
namespace fs = std::filesystem;

namespace {

SimTime ms(double v) { return from_ms(v); }

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(f, l);) out.push_back(l);
  return out;
}

std::string find_line(const std::vector<std::string>& ls, const std::string& prefix) {
  for (const auto& l : ls) {
    if (l.rfind(prefix, 0) == 0) return l;
  }
  return {};
}

fs::path scratch(const char* name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

MetricsReport::Settings settings(double duration_ms) {
  MetricsReport::Settings s;
  s.duration_ms = duration_ms;
  return s;
}

}  // namespace

TEST_CASE("nearest-rank statistics") {
  const Stat s = describe({5, 1, 4, 2, 3});
  CHECK(s.count == 5);
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.p50 == 3.0);
  CHECK(s.p95 == 5.0);
  const Stat e = describe({});
  CHECK(e.count == 0);
  CHECK(e.mean == 0.0);
}

TEST_CASE("waiting time is acceptance minus arrival") {
  MetricsReport r(settings(1000));
  AcceptInfo info;
  info.kind = VerifierKind::kCoop;
  r.beacon_received(0);
  r.beacon_accepted(0, 7, ms(100), ms(140), info);
  r.beacon_settled(0, Outcome::kAccepted);
  REQUIRE(r.waiting().size() == 1);
  CHECK(r.waiting()[0].waiting_ms() == doctest::Approx(40.0));
  const Summary s = r.summarize();
  CHECK(s.waiting.mean == doctest::Approx(40.0));
  CHECK(s.coop_ratio == 1.0);
  CHECK(s.expiration_ratio == 0.0);
}

TEST_CASE("expiration ratio and type ratios") {
  MetricsReport r(settings(1000));
  AcceptInfo sig;
  AcceptInfo self;
  self.kind = VerifierKind::kSelf;
  self.mac_assisted = true;
  for (int i = 0; i < 4; ++i) r.beacon_received(1);
  r.beacon_accepted(1, 2, ms(0), ms(10), sig);
  r.beacon_settled(1, Outcome::kAccepted);
  r.beacon_accepted(1, 2, ms(100), ms(101), self);
  r.beacon_settled(1, Outcome::kAccepted);
  r.beacon_settled(1, Outcome::kExpired);
  r.beacon_settled(1, Outcome::kExpired);
  const Summary s = r.summarize();
  CHECK(s.expiration_ratio == doctest::Approx(0.5));
  CHECK(s.sig_ratio == doctest::Approx(0.5));
  CHECK(s.self_ratio == doctest::Approx(0.5));
  CHECK(s.coop_ratio == 0.0);
  CHECK(s.mac_assisted_ratio == doctest::Approx(0.5));
  CHECK(s.sig_ratio + s.self_ratio + s.coop_ratio == doctest::Approx(1.0));
}

TEST_CASE("discovery delay and window") {
  MetricsReport r(settings(10'000));
  r.contact(0, 1, ms(1000));
  r.discovered(0, 1, ms(1300));
  r.contact(0, 2, ms(1000));
  r.discovered(0, 2, ms(1800));
  r.contact(0, 3, ms(2000));  // never discovered
  r.contact(0, 4, ms(9800));  // too late to judge
  r.discovered(0, 1, ms(5000));  // later discoveries do not move the first

  CHECK(*r.contacts().at({0, 1}).discovered_ms == doctest::Approx(1300.0));
  const Summary s = r.summarize();
  CHECK(s.discovery_pairs == 3);
  CHECK(s.discovered_within_window == doctest::Approx(1.0 / 3.0));
  CHECK(s.discovery_delay.count == 2);

  const auto dir = scratch("vbeacon_test_discovery");
  r.write(dir, nlohmann::json::object());
  const auto cdf = lines(dir / "cdf.csv");
  CHECK(find_line(cdf, "discovery_delay_ms,all,300.000,") == "discovery_delay_ms,all,300.000,0.333333");
  CHECK(find_line(cdf, "discovery_delay_ms,all,500.000,") == "discovery_delay_ms,all,500.000,0.333333");
  CHECK(find_line(cdf, "discovery_delay_ms,all,800.000,") == "discovery_delay_ms,all,800.000,0.666667");
  CHECK(find_line(cdf, "discovery_delay_ms,all,2000.000,") == "discovery_delay_ms,all,2000.000,0.666667");
  const auto disc = lines(dir / "discovery.csv");
  CHECK(find_line(disc, "0,1,") == "0,1,1000.000,1300.000,300.000,1");
  CHECK(find_line(disc, "0,3,") == "0,3,2000.000,,,1");
  CHECK(find_line(disc, "0,4,") == "0,4,9800.000,,,0");
  fs::remove_all(dir);
}

TEST_CASE("affected counts are net of retractions and include zero pairs") {
  MetricsReport r(settings(1000));
  r.add_affected_pair(0, 10);
  r.add_affected_pair(1, 10);
  r.add_affected_pair(2, 10);
  for (int i = 0; i < 6; ++i) r.affected(1, 10, +1);
  r.affected(1, 10, -2);
  for (int i = 0; i < 9; ++i) r.affected(2, 10, +1);
  CHECK(r.affected().at({1, 10}).net() == 4);
  const Summary s = r.summarize();
  CHECK(s.affected_pairs == 3);
  CHECK(s.affected_median == 4.0);
  CHECK(s.affected_max == 9);
  CHECK(s.affected_total == 13);
}

TEST_CASE("event acceptance and waiting from creation") {
  MetricsReport r(settings(1000));
  r.event_received(0, 42, 3, 100, ms(150));
  r.event_received(0, 42, 3, 100, ms(170));  // duplicate reception
  r.event_accepted(0, 42, ms(250));
  r.event_received(1, 42, 3, 100, ms(160));
  const Summary s = r.summarize();
  CHECK(s.events_received == 2);
  CHECK(s.events_accepted == 1);
  CHECK(s.event_acceptance == doctest::Approx(0.5));
  CHECK(s.event_waiting.mean == doctest::Approx(150.0));
}

TEST_CASE("cpu utilization excludes overrun and counts only measured nodes") {
  MetricsReport r(settings(1000));
  r.beacon_received(0);
  CpuRecord c;
  c.verify_ms = 900;
  c.light_ms = 150;
  c.overrun_ms = 50;
  c.time_d_ms = 300;
  c.time_nd_ms = 100;
  c.beacon_frames_rx = 400;
  r.set_cpu(0, c);
  CpuRecord other;
  other.verify_ms = 10;
  r.set_cpu(5, other);  // no outcomes: not a measured receiver
  const Summary s = r.summarize();
  CHECK(s.cpu_utilization == doctest::Approx(1.0));
  CHECK(s.d_share == doctest::Approx(0.75));
  CHECK(r.loaded(0));
  CHECK_FALSE(r.loaded(5));
  CHECK(s.loaded_nodes == 1);
}

TEST_CASE("empty report writes every file") {
  const MetricsReport r(settings(0));
  const Summary s = r.summarize();
  CHECK(s.beacons.received == 0);
  CHECK(s.expiration_ratio == 0.0);
  const auto dir = scratch("vbeacon_test_empty");
  r.write(dir, nlohmann::json{{"seed", 1}});
  for (const auto& f : report_files()) CHECK(fs::exists(dir / f));
  for (const char* f : {"beacon_waiting.csv", "beacon_outcomes.csv", "validation_types.csv", "discovery.csv",
                        "affected.csv", "events.csv", "revocations.csv", "cpu.csv"}) {
    INFO(f);
    CHECK(lines(dir / f).size() == 1);
  }
  std::ifstream js(dir / "summary.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j["config"]["seed"] == 1);
  CHECK(j["summary"].contains("expiration_ratio"));
  fs::remove_all(dir);
}

TEST_CASE("per-node csv rows recompute the summary") {
  MetricsReport r(settings(2000));
  AcceptInfo info;
  for (int node = 0; node < 3; ++node) {
    for (int b = 0; b < 5; ++b) {
      r.beacon_received(node);
      if (b < node + 2) {
        r.beacon_accepted(node, 9, ms(100.0 * b), ms(100.0 * b + 3 * node + b), info);
        r.beacon_settled(node, Outcome::kAccepted);
      } else {
        r.beacon_settled(node, Outcome::kExpired);
      }
    }
  }
  const Summary s = r.summarize();
  const auto dir = scratch("vbeacon_test_recompute");
  r.write(dir, nlohmann::json::object());
  std::uint64_t received = 0;
  std::uint64_t expired = 0;
  const auto rows = lines(dir / "beacon_outcomes.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::vector<std::string> cols;
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    received += std::stoull(cols[1]);
    expired += std::stoull(cols[5]);
  }
  CHECK(received == s.beacons.received);
  CHECK(expired == s.beacons.expired);
  CHECK(static_cast<double>(expired) / static_cast<double>(received) == doctest::Approx(s.expiration_ratio));
  double sum = 0;
  const auto w = lines(dir / "beacon_waiting.csv");
  for (std::size_t i = 1; i < w.size(); ++i) {
    std::stringstream ss(w[i]);
    std::vector<std::string> cols;
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    sum += std::stod(cols[4]);
  }
  CHECK(w.size() - 1 == s.waiting.count);
  CHECK(sum / static_cast<double>(s.waiting.count) == doctest::Approx(s.waiting.mean));
  fs::remove_all(dir);
}
