// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace vbeacon {

Trajectory::Trajectory(std::vector<Waypoint> pts) : pts_(std::move(pts)) {
  if (pts_.empty()) throw MobilityError("empty trajectory");
}

Vec2 Trajectory::at(double t_ms) const {
  if (t_ms <= pts_.front().t_ms) return pts_.front().p;
  if (t_ms >= pts_.back().t_ms) return pts_.back().p;
  auto hi = std::upper_bound(pts_.begin(), pts_.end(), t_ms,
                             [](double t, const Waypoint& w) { return t < w.t_ms; });
  auto lo = hi - 1;
  const double f = (t_ms - lo->t_ms) / (hi->t_ms - lo->t_ms);
  return Vec2{lo->p.x + f * (hi->p.x - lo->p.x), lo->p.y + f * (hi->p.y - lo->p.y)};
}

std::vector<Trajectory> static_grid(int n, int cols, double spacing_m, Vec2 origin) {
  if (cols <= 0) throw MobilityError("grid needs at least one column");
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const Vec2 p{origin.x + spacing_m * (i % cols), origin.y + spacing_m * (i / cols)};
    out.emplace_back(std::vector<Waypoint>{{0.0, p}});
  }
  return out;
}

std::vector<Trajectory> random_waypoint(int n, const Rect& region, double speed_min_mps,
                                        double speed_max_mps, double pause_ms, double duration_ms,
                                        Rng& rng) {
  if (speed_min_mps <= 0 || speed_max_mps < speed_min_mps) throw MobilityError("bad speed range");
  const auto random_point = [&] {
    return Vec2{rng.uniform(region.x0, region.x1), rng.uniform(region.y0, region.y1)};
  };
  std::vector<Trajectory> out;
  for (int i = 0; i < n; ++i) {
    std::vector<Waypoint> pts{{0.0, random_point()}};
    while (pts.back().t_ms < duration_ms) {
      const Vec2 to = random_point();
      const double v = rng.uniform(speed_min_mps, speed_max_mps);
      const double travel = distance(pts.back().p, to) / v * 1000.0;
      pts.push_back({pts.back().t_ms + std::max(travel, 1e-3), to});
      if (pause_ms > 0) pts.push_back({pts.back().t_ms + pause_ms, to});
    }
    out.emplace_back(std::move(pts));
  }
  return out;
}

std::vector<Trajectory> load_trace(std::istream& in, int n) {
  std::vector<std::vector<Waypoint>> pts(static_cast<std::size_t>(std::max(n, 0)));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.starts_with("node_id")) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    long long id = 0;
    Waypoint w;
    if (!(ss >> id >> w.t_ms >> w.p.x >> w.p.y)) {
      throw MobilityError("trace line " + std::to_string(lineno) + ": malformed row");
    }
    if (id < 0 || id >= n) {
      throw MobilityError("trace line " + std::to_string(lineno) + ": unknown node " + std::to_string(id));
    }
    auto& v = pts[static_cast<std::size_t>(id)];
    if (!v.empty() && w.t_ms <= v.back().t_ms) {
      throw MobilityError("trace line " + std::to_string(lineno) + ": time not increasing for node " +
                          std::to_string(id));
    }
    v.push_back(w);
  }
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].empty()) throw MobilityError("trace has no rows for node " + std::to_string(i));
    out.emplace_back(std::move(pts[i]));
  }
  return out;
}

void write_trace(std::ostream& out, const std::vector<Trajectory>& nodes) {
  out << "node_id,t_ms,x_m,y_m\n";
  out.precision(17);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& w : nodes[i].points()) out << i << ',' << w.t_ms << ',' << w.p.x << ',' << w.p.y << '\n';
  }
}

}  // namespace vbeacon
