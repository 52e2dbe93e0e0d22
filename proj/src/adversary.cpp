// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/adversary.hpp"

#include <stdexcept>

namespace vbeacon {

std::string_view to_string(FloodMix m) {
  switch (m) {
    case FloodMix::kBeacons:
      return "beacons";
    case FloodMix::kDenms:
      return "denms";
    case FloodMix::kMixed:
      return "mixed";
  }
  return "beacons";
}

FloodMix flood_mix_from_string(std::string_view s) {
  if (s == "beacons") return FloodMix::kBeacons;
  if (s == "denms") return FloodMix::kDenms;
  if (s == "mixed") return FloodMix::kMixed;
  throw std::invalid_argument("unknown flood mix: " + std::string(s));
}

BeaconPtr Flooder::bogus_beacon(SimTime now, const Status& status) {
  Message m;
  m.body.status = status;
  m.body.pcid = Pcid{static_cast<std::uint32_t>(rng_.next())};
  m.body.bid = static_cast<std::uint32_t>(rng_.below(1u << 20));
  m.body.timestamp_ms = now.count() / 1000;
  m.body.disclosed_key = rng_.bytes<kDigestSize>();
  m.signature = rng_.bytes<kSignatureSize>();
  m.mac = rng_.bytes<kDigestSize>();
  return make_beacon_frame(std::move(m), FrameTruth{node_, Origin::kFlooder, false, true});
}

EventPtr Flooder::bogus_denm(SimTime now, std::int64_t lifetime_ms) {
  EventMessage ev;
  ev.event_id = rng_.next();
  ev.kind = EventKind::kDenm;
  ev.created_at_ms = now.count() / 1000;
  ev.lifetime_ms = lifetime_ms;
  const auto body = rng_.bytes<16>();
  ev.body.assign(body.begin(), body.end());
  ev.pc.pcid = Pcid{static_cast<std::uint32_t>(rng_.next())};
  ev.pc.public_key = rng_.bytes<kPublicKeySize>();
  ev.pc.valid_from_ms = ev.created_at_ms - 60'000;
  ev.pc.valid_to_ms = ev.created_at_ms + 240'000;
  ev.pc.issuer = IssuerTag::kForged;
  ev.signature = rng_.bytes<kSignatureSize>();
  return make_event_frame(std::move(ev), FrameTruth{node_, Origin::kFlooder, false, true});
}

Flooder::Frame Flooder::next(SimTime now, const Status& status, std::int64_t denm_lifetime_ms) {
  const bool denm = mix_ == FloodMix::kDenms || (mix_ == FloodMix::kMixed && sent_ % 2 == 1);
  ++sent_;
  if (denm) return Frame{nullptr, bogus_denm(now, denm_lifetime_ms)};
  return Frame{bogus_beacon(now, status), nullptr};
}

BeaconPtr masquerade(const BeaconFrame& overheard, int node, Rng& rng) {
  Message m;
  m.body = overheard.msg.body;
  m.body.status.x_m += static_cast<float>(rng.uniform(-50.0, 50.0));
  m.body.status.speed_mps += static_cast<float>(rng.uniform(1.0, 10.0));
  m.signature = rng.bytes<kSignatureSize>();
  m.mac = rng.bytes<kDigestSize>();
  return make_beacon_frame(std::move(m), FrameTruth{node, Origin::kMasquerader, false, false});
}

std::vector<VerifiedEntry> CollusionBoard::take(int sender_node, std::size_t& cursor) const {
  std::vector<VerifiedEntry> out;
  for (; cursor < posts_.size(); ++cursor) {
    if (posts_[cursor].sender == sender_node) out.push_back(posts_[cursor].entry);
  }
  return out;
}

}  // namespace vbeacon
