// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vbeacon/frame.hpp"
#include "vbeacon/rng.hpp"
#include "vbeacon/sender.hpp"

namespace vbeacon {

enum class FloodMix : std::uint8_t { kBeacons, kDenms, kMixed };

std::string_view to_string(FloodMix m);
FloodMix flood_mix_from_string(std::string_view s);

/// External clogging attacker: random pseudonym, key and signature on every
/// frame. Generation cost is not modeled.
class Flooder {
 public:
  Flooder(int node, FloodMix mix, std::uint64_t seed) : node_(node), mix_(mix), rng_(seed) {}

  FloodMix mix() const { return mix_; }

  BeaconPtr bogus_beacon(SimTime now, const Status& status);
  EventPtr bogus_denm(SimTime now, std::int64_t lifetime_ms);

  /// Next frame of the flood. kMixed alternates beacons and DENMs.
  struct Frame {
    BeaconPtr beacon;
    EventPtr event;
  };
  Frame next(SimTime now, const Status& status, std::int64_t denm_lifetime_ms);

 private:
  int node_;
  FloodMix mix_;
  Rng rng_;
  std::uint64_t sent_ = 0;
};

/// Overhears an honest beacon and replays its pseudonym, bid and disclosed key
/// under a forged body in the same slot. The MAC key is not known yet, so the
/// MAC is random.
BeaconPtr masquerade(const BeaconFrame& overheard, int node, Rng& rng);

/// Channel between colluding senders and validators: every forged beacon is
/// posted here so that partner validators can vouch for it.
class CollusionBoard {
 public:
  void post(int sender_node, const VerifiedEntry& e) { posts_.push_back({sender_node, e}); }

  /// Posts by `sender_node` since the cursor, advancing it.
  std::vector<VerifiedEntry> take(int sender_node, std::size_t& cursor) const;

 private:
  struct Post {
    int sender;
    VerifiedEntry entry;
  };
  std::vector<Post> posts_;
};

}  // namespace vbeacon
