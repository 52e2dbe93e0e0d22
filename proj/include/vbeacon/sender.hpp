// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vbeacon/key_chain.hpp"
#include "vbeacon/params.hpp"
#include "vbeacon/rng.hpp"
#include "vbeacon/signature.hpp"
#include "vbeacon/types.hpp"

namespace vbeacon {

class ChainExhausted : public std::runtime_error {
 public:
  ChainExhausted() : std::runtime_error("key chain exhausted") {}
};

/// A foreign beacon this node verified by signature (or found bogus).
struct VerifiedEntry {
  Pcid pcid;
  std::uint32_t bid = 0;
  bool validity = true;
  Digest digest{};
  std::int64_t timestamp_ms = 0;

  bool operator==(const VerifiedEntry&) const = default;
};

/// Orders by timestamp, then (pcid, bid).
inline bool fresher(const VerifiedEntry& a, const VerifiedEntry& b) {
  if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms > b.timestamp_ms;
  if (a.pcid != b.pcid) return a.pcid > b.pcid;
  return a.bid > b.bid;
}

struct EventTransmission {
  SimTime at;
  EventMessage ev;
};

struct SenderOutput {
  Message msg;
  std::vector<EventTransmission> events;
};

class BeaconSender {
 public:
  BeaconSender(const ProtocolParams& params, PseudonymDirectory& directory, Credential cred,
               KeyChain chain);

  const Credential& credential() const { return cred_; }
  const KeyChain& chain() const { return chain_; }

  /// Builds, signs and MACs the beacon for the slot containing `now`.
  SenderOutput next_beacon(SimTime now, const Status& status);

  void note_verified(const VerifiedEntry& e);
  const std::vector<VerifiedEntry>& recent_verified() const { return recent_; }

  /// Advertised once, ahead of genuinely verified entries.
  void pin(const VerifiedEntry& e) { pinned_.push_back(e); }

  /// Signs and queues an event for facilitated dissemination.
  void schedule_event(EventMessage ev, SimTime now);
  std::size_t pending_plans() const { return denm_plans_.size() + evidence_plans_.size(); }

  /// From now on, emit random signatures (keys and MACs stay correct).
  void forge_with(Rng* rng) { forge_rng_ = rng; }

  std::uint32_t last_bid() const { return last_bid_; }

 private:
  struct Plan {
    EventMessage ev;
    Digest digest{};
    int attachments_left = 0;
    bool awaiting_disclosure = false;
  };

  void advance_plans(std::deque<Plan>& plans, SimTime now, std::int64_t now_ms,
                     std::vector<EventTransmission>& out);
  std::optional<Digest> attach(std::deque<Plan>& plans);

  const ProtocolParams& params_;
  PseudonymDirectory& directory_;
  Credential cred_;
  KeyChain chain_;
  std::optional<std::int64_t> last_slot_;
  std::uint32_t last_bid_ = 0;
  std::vector<VerifiedEntry> recent_;  // freshest first
  std::vector<VerifiedEntry> pinned_;
  std::deque<std::pair<std::uint32_t, Digest>> own_recent_;  // newest first
  std::deque<Plan> denm_plans_;
  std::deque<Plan> evidence_plans_;
  Rng* forge_rng_ = nullptr;
};

}  // namespace vbeacon
