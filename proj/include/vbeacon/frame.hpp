// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <memory>

#include "vbeacon/codec.hpp"
#include "vbeacon/types.hpp"

namespace vbeacon {

enum class Origin : std::uint8_t {
  kHonest,
  kMaliciousSender,
  kMaliciousValidator,
  kFlooder,
  kMasquerader,
};

/// Ground truth attached by the simulator. Protocol code never reads it;
/// metrics and property audits do.
struct FrameTruth {
  int node = -1;
  Origin origin = Origin::kHonest;
  bool authentic_signature = true;
  bool forged_pc = false;
};

/// A transmitted beacon as it travels through the radio. The digest is computed
/// once at the sender and shared by every receiver.
struct BeaconFrame {
  Message msg;
  Digest digest{};
  std::size_t wire_bytes = kDefaultFrameSize;
  FrameTruth truth;
};

struct EventFrame {
  EventMessage ev;
  Digest digest{};
  std::size_t wire_bytes = kDefaultFrameSize;
  FrameTruth truth;
};

using BeaconPtr = std::shared_ptr<const BeaconFrame>;
using EventPtr = std::shared_ptr<const EventFrame>;

inline BeaconPtr make_beacon_frame(Message msg, FrameTruth truth) {
  auto f = std::make_shared<BeaconFrame>();
  f->digest = beacon_digest(msg.body, msg.signature);
  f->wire_bytes = encoded_size(msg);
  f->msg = std::move(msg);
  f->truth = truth;
  return f;
}

inline EventPtr make_event_frame(EventMessage ev, FrameTruth truth) {
  auto f = std::make_shared<EventFrame>();
  f->digest = event_digest(ev);
  f->wire_bytes = encoded_event_size(ev);
  f->ev = std::move(ev);
  f->truth = truth;
  return f;
}

}  // namespace vbeacon
