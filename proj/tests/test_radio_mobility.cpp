// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <sstream>

#include "vbeacon/mobility.hpp"
#include "vbeacon/radio.hpp"

using namespace vbeacon;

TEST_CASE("airtime") {
  CHECK(airtime(300, 6e6) == SimTime(400));
  CHECK(airtime(1, 6e6) == SimTime(2));  // 1.33 us rounds up
  CHECK(airtime(0, 6e6) == SimTime(0));
}

TEST_CASE("frames share one fifo and reach receivers in range") {
  RadioParams p;
  Channel ch(p, 1);
  const auto a = ch.transmit({0, 0}, 300, SimTime(0), 3);
  const auto b = ch.transmit({10, 0}, 300, SimTime(100), 3);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(*a == SimTime(400));
  CHECK(*b == SimTime(800));
  CHECK(ch.backlog({0, 0}, SimTime(500)) == 1);
  CHECK(ch.receive({0, 0}, {199, 0}) == Channel::Rx::kDelivered);
  CHECK(ch.receive({0, 0}, {201, 0}) == Channel::Rx::kOutOfRange);
  CHECK(ch.counters().delivered == 1);
  CHECK(ch.counters().range_filtered == 1);
}

TEST_CASE("overload is tail-dropped at channel capacity") {
  RadioParams p;
  p.backlog_frames = 50;
  Channel ch(p, 1);
  // 300 B at 6 Mb/s is 2500 frames/s; offer twice that for one second.
  int sent = 0;
  for (int i = 0; i < 5000; ++i) {
    if (ch.transmit({0, 0}, 300, SimTime(200 * i), 1)) ++sent;
  }
  const auto& c = ch.counters();
  CHECK(c.frames == 5000);
  CHECK(c.frames_dropped + static_cast<std::uint64_t>(sent) == 5000);
  CHECK(static_cast<double>(c.frames_dropped) / 5000.0 == doctest::Approx(0.5).epsilon(0.03));
  CHECK(c.channel_dropped == c.frames_dropped);
}

TEST_CASE("random loss") {
  RadioParams p;
  p.loss_probability = 0.25;
  Channel ch(p, 7);
  int lost = 0;
  for (int i = 0; i < 20000; ++i) lost += ch.receive({0, 0}, {10, 0}) == Channel::Rx::kLost ? 1 : 0;
  CHECK(lost / 20000.0 == doctest::Approx(0.25).epsilon(0.05));
  const auto& c = ch.counters();
  CHECK(c.delivered + c.loss_dropped == 20000);
}

TEST_CASE("cells have independent fifos") {
  RadioParams p;
  p.cell_size_m = 100;
  Channel ch(p, 1);
  CHECK(*ch.transmit({10, 10}, 300, SimTime(0), 1) == SimTime(400));
  CHECK(*ch.transmit({150, 10}, 300, SimTime(0), 1) == SimTime(400));
  CHECK(*ch.transmit({20, 20}, 300, SimTime(0), 1) == SimTime(800));
}

TEST_CASE("static grid") {
  const auto g = static_grid(25, 5, 50.0);
  REQUIRE(g.size() == 25);
  CHECK(g[0].at(0) == Vec2{0, 0});
  CHECK(g[6].at(1e6) == Vec2{50, 50});
  CHECK(distance(g[0].at(0), g[24].at(0)) > 200.0);  // opposite corners out of range
  CHECK(distance(g[0].at(0), g[4].at(0)) <= 200.0);
}

TEST_CASE("trajectory interpolation and clamping") {
  const Trajectory t({{0, {0, 0}}, {1000, {100, 0}}, {2000, {100, 50}}});
  CHECK(t.at(-5) == Vec2{0, 0});
  CHECK(t.at(500) == Vec2{50, 0});
  CHECK(t.at(1500).y == doctest::Approx(25.0));
  CHECK(t.at(9000) == Vec2{100, 50});
}

TEST_CASE("trace round trip") {
  const Trajectory a({{0, {0, 0}}, {1000, {10, 20}}});
  const Trajectory b(std::vector<Waypoint>{{500, {5, 5}}});
  std::stringstream ss;
  write_trace(ss, {a, b});
  const auto back = load_trace(ss, 2);
  REQUIRE(back.size() == 2);
  CHECK(back[0].at(500).x == doctest::Approx(5.0));
  CHECK(back[0].at(500).y == doctest::Approx(10.0));
  CHECK(back[1].at(0) == Vec2{5, 5});
}

TEST_CASE("malformed traces are rejected") {
  std::stringstream unknown_node("node_id,t_ms,x_m,y_m\n3,0,0,0\n");
  CHECK_THROWS_AS(load_trace(unknown_node, 2), MobilityError);
  std::stringstream backwards("0,100,0,0\n0,50,1,1\n");
  CHECK_THROWS_AS(load_trace(backwards, 1), MobilityError);
  std::stringstream garbage("0,abc,0,0\n");
  CHECK_THROWS_AS(load_trace(garbage, 1), MobilityError);
}

TEST_CASE("random waypoint stays in the region at bounded speed") {
  Rng rng(3);
  const Rect region{0, 0, 300, 200};
  const auto paths = random_waypoint(10, region, 5.0, 15.0, 1000.0, 60'000.0, rng);
  REQUIRE(paths.size() == 10);
  for (const auto& t : paths) {
    const auto& pts = t.points();
    REQUIRE(pts.size() >= 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(region.contains(pts[i].p));
      if (i == 0) continue;
      const double dt = pts[i].t_ms - pts[i - 1].t_ms;
      REQUIRE(dt > 0);
      const double v = distance(pts[i].p, pts[i - 1].p) / (dt / 1000.0);
      if (v > 0) {
        CHECK(v >= 5.0 - 1e-6);
        CHECK(v <= 15.0 + 1e-6);
      }
    }
    CHECK(pts.back().t_ms >= 60'000.0);
  }
}
