// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <deque>
#include <map>
#include <optional>

#include "vbeacon/mobility.hpp"
#include "vbeacon/rng.hpp"
#include "vbeacon/types.hpp"

namespace vbeacon {

struct RadioParams {
  double range_m = 200.0;
  double bitrate_bps = 6e6;
  double loss_probability = 0.0;
  int backlog_frames = 400;  // queued frames per cell before tail-drop
  double cell_size_m = 0.0;  // 0: one cell for the whole region
};

/// Airtime rounded up to the microsecond.
SimTime airtime(std::size_t bytes, double bitrate_bps);

struct ChannelCounters {
  std::uint64_t frames = 0;          // transmissions offered
  std::uint64_t frames_dropped = 0;  // tail-dropped transmissions
  // Per potential receiver; these four always add up.
  std::uint64_t delivered = 0;
  std::uint64_t range_filtered = 0;
  std::uint64_t loss_dropped = 0;
  std::uint64_t channel_dropped = 0;
};

/// Abstract broadcast medium: transmissions in the same cell share one FIFO
/// of airtime; a frame reaches everyone in range when its airtime ends.
class Channel {
 public:
  enum class Rx : std::uint8_t { kDelivered, kOutOfRange, kLost };

  Channel(const RadioParams& params, std::uint64_t seed) : params_(params), rng_(seed) {}

  /// Books a transmission. Returns the delivery time, or nothing if the cell's
  /// backlog is full (counted against every potential receiver).
  std::optional<SimTime> transmit(Vec2 at, std::size_t bytes, SimTime now, std::size_t potential_receivers);

  /// Fate of a delivered frame at one potential receiver.
  Rx receive(Vec2 tx, Vec2 rx);

  const ChannelCounters& counters() const { return counters_; }
  std::size_t backlog(Vec2 at, SimTime now);

 private:
  struct Cell {
    SimTime busy_until{0};
    std::deque<SimTime> ends;  // end of airtime of frames not yet finished
  };
  Cell& cell_of(Vec2 p);

  RadioParams params_;
  Rng rng_;
  std::map<std::pair<std::int64_t, std::int64_t>, Cell> cells_;
  ChannelCounters counters_;
};

}  // namespace vbeacon
