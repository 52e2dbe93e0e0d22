// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "vbeacon/rng.hpp"

namespace vbeacon {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

class MobilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Waypoint {
  double t_ms = 0.0;
  Vec2 p;
};

/// Piecewise-linear path; held constant before the first and after the last point.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Waypoint> pts);

  Vec2 at(double t_ms) const;
  const std::vector<Waypoint>& points() const { return pts_; }

 private:
  std::vector<Waypoint> pts_;
};

/// Row-major grid starting at `origin`.
std::vector<Trajectory> static_grid(int n, int cols, double spacing_m, Vec2 origin = {});

std::vector<Trajectory> random_waypoint(int n, const Rect& region, double speed_min_mps,
                                        double speed_max_mps, double pause_ms, double duration_ms,
                                        Rng& rng);

/// CSV rows `node_id,t_ms,x_m,y_m` (header optional). Node ids must be 0..n-1,
/// each with strictly increasing times.
std::vector<Trajectory> load_trace(std::istream& in, int n);
void write_trace(std::ostream& out, const std::vector<Trajectory>& nodes);

}  // namespace vbeacon
