// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/radio.hpp"

#include <algorithm>
#include <cmath>

namespace vbeacon {

SimTime airtime(std::size_t bytes, double bitrate_bps) {
  const double us = static_cast<double>(bytes) * 8.0 / bitrate_bps * 1e6;
  return SimTime(static_cast<std::int64_t>(std::ceil(us - 1e-9)));
}

Channel::Cell& Channel::cell_of(Vec2 p) {
  if (params_.cell_size_m <= 0) return cells_[{0, 0}];
  const auto cx = static_cast<std::int64_t>(std::floor(p.x / params_.cell_size_m));
  const auto cy = static_cast<std::int64_t>(std::floor(p.y / params_.cell_size_m));
  return cells_[{cx, cy}];
}

std::size_t Channel::backlog(Vec2 at, SimTime now) {
  Cell& c = cell_of(at);
  while (!c.ends.empty() && c.ends.front() <= now) c.ends.pop_front();
  return c.ends.size();
}

std::optional<SimTime> Channel::transmit(Vec2 at, std::size_t bytes, SimTime now,
                                         std::size_t potential_receivers) {
  ++counters_.frames;
  Cell& c = cell_of(at);
  while (!c.ends.empty() && c.ends.front() <= now) c.ends.pop_front();
  if (c.ends.size() >= static_cast<std::size_t>(std::max(params_.backlog_frames, 1))) {
    ++counters_.frames_dropped;
    counters_.channel_dropped += potential_receivers;
    return std::nullopt;
  }
  const SimTime end = std::max(now, c.busy_until) + airtime(bytes, params_.bitrate_bps);
  c.busy_until = end;
  c.ends.push_back(end);
  return end;
}

Channel::Rx Channel::receive(Vec2 tx, Vec2 rx) {
  if (distance(tx, rx) > params_.range_m) {
    ++counters_.range_filtered;
    return Rx::kOutOfRange;
  }
  if (params_.loss_probability > 0 && rng_.bernoulli(params_.loss_probability)) {
    ++counters_.loss_dropped;
    return Rx::kLost;
  }
  ++counters_.delivered;
  return Rx::kDelivered;
}

}  // namespace vbeacon
