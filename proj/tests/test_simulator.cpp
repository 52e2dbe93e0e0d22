// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vbeacon/simulator.hpp"

using namespace vbeacon;
namespace fs = std::filesystem;

namespace {

SimConfig small(double duration_ms = 3000) {
  SimConfig c = preset("benign");
  c.duration_ms = duration_ms;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void check_conservation(const MetricsReport& r) {
  for (const auto& [node, c] : r.outcomes()) {
    INFO("node " << node);
    CHECK(c.received == c.dropped + c.accepted + c.rejected + c.expired + c.pending_at_end);
  }
  const auto& ch = r.channel();
  CHECK(ch.frames_dropped <= ch.frames);
  for (const auto& [node, c] : r.cpu()) {
    INFO("node " << node);
    CHECK(c.busy_ms() <= r.settings().duration_ms + 1e-6);
    CHECK(c.overrun_ms >= 0.0);
  }
}

}  // namespace

TEST_CASE("invalid configurations are refused") {
  SimConfig c = small();
  c.protocol.ratio_d = 0.9;
  CHECK_THROWS_AS(run(c), ConfigError);
}

TEST_CASE("zero duration yields an empty report") {
  const MetricsReport r = run(small(0));
  const Summary s = r.summarize();
  CHECK(s.beacons.received == 0);
  CHECK(s.waiting.count == 0);
  CHECK(s.events_received == 0);
}

TEST_CASE("same config gives identical output") {
  SimConfig c = preset("dos-mixed");
  c.duration_ms = 2000;
  c.nodes.arrival_spread_ms = 500;
  const auto a = fs::temp_directory_path() / "vbeacon_det_a";
  const auto b = fs::temp_directory_path() / "vbeacon_det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  run(c).write(a, to_json(c));
  run(c).write(b, to_json(c));
  for (const auto& f : report_files()) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  c.seed += 1;
  const auto other = fs::temp_directory_path() / "vbeacon_det_c";
  fs::remove_all(other);
  run(c).write(other, to_json(c));
  CHECK(slurp(a / "beacon_waiting.csv") != slurp(other / "beacon_waiting.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(other);
}

TEST_CASE("benign network") {
  const SimConfig c = small();
  const MetricsReport r = run(c);
  const Summary s = r.summarize();
  check_conservation(r);
  CHECK(s.beacons.received > 0);
  CHECK(s.expiration_ratio < 0.01);
  CHECK(s.waiting.mean < 20.0);
  CHECK(s.discovered_within_window > 0.99);
  CHECK(s.audit.forged_accepts == 0);
  CHECK(s.audit.provenance_failures == 0);
  CHECK(s.revocations == 0);
  CHECK(s.sig_ratio > 0.5);  // spare CPU: most beacons are verified before a verifier arrives

  SimConfig base = c;
  base.scheme = Scheme::kBaselineFcfs;
  const Summary sb = run(base).summarize();
  CHECK(sb.expiration_ratio < 0.05);
  CHECK(sb.self_ratio == 0.0);
  CHECK(sb.coop_ratio == 0.0);
}

TEST_CASE("saturated receivers lean on cheap verifiers") {
  SimConfig c = preset("benign-loaded");
  c.duration_ms = 6000;
  const Summary s = run(c).summarize();
  CHECK(s.cpu_utilization > 0.95);
  CHECK(s.expiration_ratio < 0.01);
  CHECK(s.self_ratio + s.coop_ratio > 0.2);

  c.scheme = Scheme::kBaselineFcfs;
  CHECK(run(c).summarize().expiration_ratio > 0.1);
}

TEST_CASE("flooded network keeps its invariants") {
  for (const char* name : {"dos-beacons", "dos-denms-only", "collusion-full"}) {
    INFO(name);
    SimConfig c = preset(name);
    c.duration_ms = 4000;
    c.nodes.arrival_spread_ms = 1000;
    const MetricsReport r = run(c);
    check_conservation(r);
    const Summary s = r.summarize();
    CHECK(s.audit.forged_accepts == 0);
    CHECK(s.audit.provenance_failures == 0);
    CHECK(s.audit.forged_events_verified == 0);
    CHECK(s.audit.forged_beacons_rx + s.audit.forged_events_rx > 0);
  }
}

TEST_CASE("penetration leaves vehicles idle") {
  SimConfig c = small();
  c.nodes.penetration = 0.4;
  const MetricsReport r = run(c);
  CHECK(r.outcomes().size() == 10);
}
