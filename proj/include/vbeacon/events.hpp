// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstring>
#include <deque>
#include <functional>
#include <list>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "vbeacon/cpu.hpp"
#include "vbeacon/frame.hpp"
#include "vbeacon/params.hpp"
#include "vbeacon/signature.hpp"

namespace vbeacon {

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h = 0;
    std::memcpy(&h, d.data(), sizeof(h));
    return h;
  }
};

/// Event digests announced by accepted beacons. TTL-bounded, LRU-evicted.
class FacilitatorCache {
 public:
  struct Entry {
    Pcid source;
    EventKind kind = EventKind::kDenm;
    SimTime expires{0};
  };

  FacilitatorCache(SimTime ttl, std::size_t capacity) : ttl_(ttl), capacity_(capacity) {}

  void insert(const Digest& d, EventKind kind, Pcid source, SimTime now);
  /// Hit refreshes recency but not the TTL.
  std::optional<Entry> lookup(const Digest& d, SimTime now);
  std::size_t size() const { return map_.size(); }

 private:
  using Lru = std::list<Digest>;
  struct Slot {
    Entry e;
    Lru::iterator pos;
  };
  SimTime ttl_;
  std::size_t capacity_;
  Lru lru_;  // most recent first
  std::unordered_map<Digest, Slot, DigestHash> map_;
};

/// Misbehavior evidence: the bogus beacon and the beacon that vouched for it.
struct EvidencePair {
  Message bogus;
  Message validating;
};

std::vector<std::uint8_t> encode_evidence(const Message& bogus, const Message& validating);
std::optional<EvidencePair> decode_evidence(std::span<const std::uint8_t> body);

/// The COOP facilitator in `validating` that vouches for `bogus`, if any.
const Facilitator* vouching_facilitator(const EvidencePair& p);

enum class EventDrop : std::uint8_t { kUnmatched, kDuplicate, kExpired };

class EventObserver {
 public:
  virtual ~EventObserver() = default;
  virtual void on_event_received(const EventFrame&, SimTime) {}
  virtual void on_event_dropped(const EventFrame&, EventDrop, SimTime) {}
  virtual void on_event_verified(const EventFrame&, bool /*valid*/, SimTime) {}
  virtual void on_event_accepted(const EventFrame&, SimTime /*first arrival*/, SimTime) {}
  /// Evidence checked out; the validator is revoked locally.
  virtual void on_evidence_accepted(const EventFrame&, Pcid /*validator*/, SimTime) {}
  /// Evidence that does not prove anything; the reporter is suspected.
  virtual void on_evidence_rejected(const EventFrame&, Pcid /*reporter*/, SimTime) {}
};

struct EventStats {
  std::uint64_t received = 0;
  std::uint64_t unmatched = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t expired = 0;
  std::uint64_t verifications = 0;  // signature checks, three per evidence
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
};

/// Facilitated event path: only events matching a cached facilitator are
/// queued, and they are verified ahead of any beacon.
class EventProcessor {
 public:
  using RevokeFn = std::function<void(Pcid, SimTime)>;

  EventProcessor(const ProtocolParams& params, PseudonymDirectory& directory, CpuModel& cpu,
                 EventObserver& observer, RevokeFn revoke);

  /// Seeds the cache from a beacon that was just accepted.
  void on_beacon_accepted(const BeaconFrame& f, SimTime now);
  void on_receive(EventPtr ev, SimTime now);

  bool has_work() const { return !queue_.empty(); }
  bool in_flight() const { return inflight_.has_value(); }
  std::optional<SimTime> start_next(SimTime now);
  void complete(SimTime now);

  const EventStats& stats() const { return stats_; }
  const FacilitatorCache& cache() const { return cache_; }

 private:
  struct Item {
    EventPtr f;
    SimTime arrival;
  };
  bool expired(const EventMessage& ev, SimTime now) const;
  void forget_stale(SimTime now);

  const ProtocolParams& params_;
  PseudonymDirectory& directory_;
  CpuModel& cpu_;
  EventObserver& obs_;
  RevokeFn revoke_;
  FacilitatorCache cache_;
  std::deque<Item> queue_;
  std::optional<Item> inflight_;
  // Digests queued or already handled, with the time they can be forgotten.
  std::unordered_map<Digest, SimTime, DigestHash> seen_;
  SimTime next_forget_{0};
  EventStats stats_;
};

/// Full check of an event (three signatures for evidence). Returns whether it is
/// accepted and, for accepted evidence, the validator to revoke.
struct EventCheck {
  bool valid = false;
  std::optional<Pcid> revoke;
};
EventCheck check_event(PseudonymDirectory& directory, const EventMessage& ev);

/// Signature checks spent on one event.
inline int event_verify_count(const EventMessage& ev) {
  return ev.kind == EventKind::kEvidence && decode_evidence(ev.body) ? 3 : 1;
}

}  // namespace vbeacon
