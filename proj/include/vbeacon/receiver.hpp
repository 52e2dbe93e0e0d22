// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vbeacon/cpu.hpp"
#include "vbeacon/events.hpp"
#include "vbeacon/frame.hpp"
#include "vbeacon/key_chain.hpp"
#include "vbeacon/params.hpp"
#include "vbeacon/rng.hpp"
#include "vbeacon/sender.hpp"
#include "vbeacon/signature.hpp"

namespace vbeacon {

using LocalId = std::uint64_t;

enum class DropReason : std::uint8_t {
  kRevoked,    // PC in PRL
  kStale,      // timestamp outside the accepted window
  kLate,       // arrived after its MAC key may have been disclosed
  kReplay,     // discovered PC, slot not newer than the cached one
  kChain,      // disclosed key fails the chain check
  kDuplicateKey,
  kDiscoveryWalk,  // inconsistent with the chain once the PC was discovered
};

enum class Outcome : std::uint8_t { kAccepted, kRejected, kExpired, kPendingAtEnd };

enum class RevocationList : std::uint8_t { kPrl, kKrl };

struct MisbehaviorReport {
  Pcid accused;
  RevocationList list = RevocationList::kPrl;
  SimTime at{0};
  BeaconPtr bogus;       // the beacon whose validity was misrepresented
  BeaconPtr validating;  // the accused's beacon carrying the false claim (PRL only)
};

struct AcceptInfo {
  VerifierKind kind = VerifierKind::kSig;
  std::optional<Pcid> via;        // COOP source
  BeaconPtr via_frame;            // COOP carrier frame
  bool provisional = false;
  bool mac_assisted = false;      // held a positive MAC verifier when accepted
  bool from_check = false;
};

class ReceiverObserver {
 public:
  virtual ~ReceiverObserver() = default;
  virtual void on_received(const BeaconFrame&, SimTime) {}
  virtual void on_dropped(const BeaconFrame&, DropReason, SimTime) {}
  virtual void on_accepted(const BeaconFrame&, SimTime /*arrival*/, SimTime /*now*/, const AcceptInfo&) {}
  virtual void on_retracted(const BeaconFrame&, SimTime, const AcceptInfo&) {}
  /// Called once per queued beacon when it leaves storage.
  virtual void on_settled(const BeaconFrame&, SimTime /*arrival*/, Outcome, SimTime) {}
  virtual void on_discovered(Pcid, SimTime) {}
  virtual void on_signature_checked(const BeaconFrame&, bool /*valid*/, SimTime) {}
  virtual void on_report(const MisbehaviorReport&) {}
  virtual void on_note_verified(const VerifiedEntry&) {}
};

struct ProvenanceRecord {
  LocalId id = 0;
  VerifierKind kind = VerifierKind::kSig;
  std::optional<std::size_t> parent;  // index of the parent's record
};

struct ReceiverStats {
  std::uint64_t received = 0;
  std::uint64_t queued = 0;
  std::map<DropReason, std::uint64_t> dropped;
  std::uint64_t verifications = 0;
  std::uint64_t shortcut_accepts = 0;
  std::uint64_t coop_decisions = 0;     // discovered-PC COOP hits from SIG/SELF carriers
  std::uint64_t coop_checks = 0;        // ... of which routed to queue_check
  std::uint64_t phantom_accepts = 0;    // forged-PC beacons accepted (must stay 0)
  // Signature time by sender class, only for selections where both fresh sets
  // were non-empty. These drive the D/ND split.
  SimTime time_d{0};
  SimTime time_nd{0};
  // All signature time by sender class.
  SimTime total_time_d{0};
  SimTime total_time_nd{0};
};

/// Common interface for the facilitated scheme and the baselines.
class BeaconPipeline {
 public:
  virtual ~BeaconPipeline() = default;
  virtual void on_receive(BeaconPtr frame, SimTime now) = 0;
  virtual bool has_work() const = 0;
  virtual bool in_flight() const = 0;
  /// Picks the next message and books its verification on the CPU.
  /// Returns the completion time, or nothing if no verification was started.
  virtual std::optional<SimTime> start_next(SimTime now) = 0;
  virtual void complete(SimTime now) = 0;
  virtual std::size_t expire_sweep(SimTime now) = 0;
  virtual void finish(SimTime now) = 0;
  virtual const ReceiverStats& stats() const = 0;
  virtual bool revoked(Pcid) const { return false; }
};

class FacilitatedReceiver final : public BeaconPipeline {
 public:
  enum class Queue : std::uint8_t { kNone, kRecv, kCheck, kInflight };
  enum class Verdict : std::uint8_t { kPending, kAccepted, kRejected };
  enum class CheckReason : std::uint8_t { kNone, kDiscovery, kProbabilistic, kConflict };

  struct VerEntry {
    Verifier v;
    BeaconPtr carrier;
    std::optional<LocalId> carrier_id;
    bool carrier_definitive = false;
  };

  struct RxBeacon {
    LocalId id = 0;
    BeaconPtr f;
    SimTime arrival{0};
    std::int64_t slot = 0;
    Queue q = Queue::kNone;
    Verdict verdict = Verdict::kPending;
    bool definitive = false;
    bool def_validity = false;
    bool provisional = false;
    CheckReason reason = CheckReason::kNone;
    bool chain_ok = false;
    bool mac_checked = false;
    AcceptInfo accept;
    std::vector<VerEntry> ver;

    const Message& msg() const { return f->msg; }
    Pcid pcid() const { return f->msg.body.pcid; }
  };

  struct PcEntry {
    bool discovered = false;
    std::int64_t latest_slot = 0;
    Digest latest_key{};
    std::optional<LocalId> latest_id;
    std::set<LocalId> bs;
    std::multimap<std::uint32_t, LocalId> by_bid;
  };

  FacilitatedReceiver(const ProtocolParams& params, PseudonymDirectory& directory, CpuModel& cpu,
                      Rng& rng, ReceiverObserver& observer);

  void on_receive(BeaconPtr frame, SimTime now) override;
  bool has_work() const override { return !queue_recv_.empty() || check_live_ > 0; }
  bool in_flight() const override { return inflight_.has_value(); }
  std::optional<SimTime> start_next(SimTime now) override;
  void complete(SimTime now) override;
  std::size_t expire_sweep(SimTime now) override;
  void finish(SimTime now) override;
  const ReceiverStats& stats() const override { return stats_; }
  bool revoked(Pcid p) const override { return prl_.contains(p); }

  // Introspection for tests and audits.
  const RxBeacon* find(LocalId id) const;
  std::optional<LocalId> find_by_digest(const Digest& d) const;
  bool discovered(Pcid p) const;
  bool in_krl(Pcid p) const { return krl_.contains(p); }
  std::size_t queue_recv_size() const { return queue_recv_.size(); }
  std::size_t queue_check_size() const { return check_live_; }
  std::size_t stored() const { return msgs_.size(); }
  std::size_t pc_entries() const { return pcs_.size(); }
  const std::vector<ProvenanceRecord>& provenance() const { return provenance_; }
  /// Every accepted beacon traces back through definitive links to a signature check.
  bool audit_provenance() const;

  /// Seeds the PRL (authority-distributed or evidence-driven revocation).
  void revoke(Pcid p, SimTime now);

 private:
  RxBeacon* get(LocalId id);
  void drop(const BeaconFrame& f, DropReason reason, SimTime now);
  LocalId enqueue(BeaconPtr frame, SimTime now, std::int64_t slot, bool chain_ok);
  void erase(LocalId id);
  void drop_queued(LocalId id, DropReason reason, SimTime now);
  SimTime begin(RxBeacon& m, bool discovered, SimTime now);
  void move_to_check(RxBeacon& m, CheckReason reason);
  void leave_queues(RxBeacon& m);

  void accept(RxBeacon& m, AcceptInfo info, std::optional<LocalId> parent, SimTime now);
  void record_provenance(const RxBeacon& m, VerifierKind kind, std::optional<LocalId> parent);
  void reject(RxBeacon& m, SimTime now);
  void set_definitive(RxBeacon& m, bool validity, Verifier v, SimTime now);
  void add_verifier(RxBeacon& m, const VerEntry& e, SimTime now);
  bool attributes(const RxBeacon& m) const;
  void convict(Pcid accused, const RxBeacon& m, const BeaconPtr& carrier, SimTime now);
  void krl_add(const RxBeacon& m, SimTime now);

  void discover(PcEntry& pe, RxBeacon& v, SimTime now);
  void validate_mac(RxBeacon& m, const Digest& newer_key, std::int64_t newer_slot,
                    std::uint32_t newer_bid, SimTime now);
  void cascade(LocalId root, VerifierKind kind, SimTime now);
  void apply_self(RxBeacon& carrier, std::vector<std::pair<LocalId, VerifierKind>>& work, SimTime now);
  void apply_coop(RxBeacon& carrier, VerifierKind type, SimTime now);
  void note_verified(const RxBeacon& m, bool validity);

  std::optional<LocalId> pick_from_recv(SimTime now);

  const ProtocolParams& params_;
  PseudonymDirectory& directory_;
  CpuModel& cpu_;
  Rng& rng_;
  ReceiverObserver& obs_;

  LocalId next_id_ = 1;
  std::map<LocalId, RxBeacon> msgs_;
  std::set<LocalId> queue_recv_;
  std::deque<LocalId> queue_check_;
  std::size_t check_live_ = 0;
  std::unordered_map<Pcid, PcEntry> pcs_;
  std::unordered_set<Pcid> prl_;
  std::unordered_set<Pcid> krl_;
  std::optional<LocalId> inflight_;
  bool inflight_discovered_ = false;
  std::vector<ProvenanceRecord> provenance_;
  std::unordered_map<LocalId, std::size_t> provenance_index_;
  ReceiverStats stats_;
};

/// Verify-everything baseline, first-come or last-come first-served. Event
/// messages share the same queue.
class BaselineReceiver final : public BeaconPipeline {
 public:
  enum class Order { kFcfs, kLcfs };

  BaselineReceiver(Order order, const ProtocolParams& params, PseudonymDirectory& directory,
                   CpuModel& cpu, ReceiverObserver& observer, EventObserver* events = nullptr);

  void on_receive(BeaconPtr frame, SimTime now) override;
  void on_receive_event(EventPtr frame, SimTime now);
  const EventStats& event_stats() const { return event_stats_; }
  bool has_work() const override { return !queue_.empty(); }
  bool in_flight() const override { return inflight_.has_value(); }
  std::optional<SimTime> start_next(SimTime now) override;
  void complete(SimTime now) override;
  std::size_t expire_sweep(SimTime now) override;
  void finish(SimTime now) override;
  const ReceiverStats& stats() const override { return stats_; }

 private:
  struct Item {
    BeaconPtr f;
    EventPtr ev;
    SimTime arrival;
  };
  bool expired(const Item& it, SimTime now) const;
  void settle_expired(const Item& it, SimTime now);

  Order order_;
  const ProtocolParams& params_;
  PseudonymDirectory& directory_;
  CpuModel& cpu_;
  ReceiverObserver& obs_;
  EventObserver* ev_obs_;
  std::deque<Item> queue_;
  std::optional<Item> inflight_;
  std::unordered_set<Pcid> discovered_;
  std::unordered_set<Digest, DigestHash> events_seen_;
  ReceiverStats stats_;
  EventStats event_stats_;
};

}  // namespace vbeacon
