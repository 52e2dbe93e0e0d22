// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <memory>
#include <vector>

#include "vbeacon/frame.hpp"
#include "vbeacon/receiver.hpp"
#include "vbeacon/sender.hpp"

namespace vbeacon::testing {

inline SimTime ms(double v) { return from_ms(v); }

/// Honest (or scripted malicious) sender with its own credential and chain.
struct TestNode {
  int index = 0;
  std::unique_ptr<BeaconSender> tx;
  Rng forge_rng{0};
  Origin origin = Origin::kHonest;

  Pcid pcid() const { return tx->credential().pc.pcid; }

  BeaconPtr beacon(SimTime at, std::vector<EventTransmission>* events = nullptr) {
    auto out = tx->next_beacon(at, Status{static_cast<float>(index), 0, 0, 0});
    if (events != nullptr) *events = out.events;
    FrameTruth truth{index, origin, origin != Origin::kMaliciousSender, false};
    return make_beacon_frame(std::move(out.msg), truth);
  }

  void forge() {
    origin = Origin::kMaliciousSender;
    tx->forge_with(&forge_rng);
  }
};

struct World {
  ProtocolParams params;
  PseudonymDirectory dir{make_backend(CryptoMode::kSimulated)};
  std::vector<std::unique_ptr<TestNode>> nodes;

  World() = default;
  explicit World(ProtocolParams p) : params(p) {}

  /// Chain anchored one slot before t=0 so the first beacon can disclose a key.
  TestNode& add_node(std::uint64_t seed = 0) {
    Rng r(seed == 0 ? 1000 + nodes.size() : seed);
    auto n = std::make_unique<TestNode>();
    n->index = static_cast<int>(nodes.size());
    n->forge_rng = Rng(r.next());
    Credential cred = dir.issue(r.bytes<32>(), 0, 3'600'000);
    const auto slot_len = params.slot_len_ms();
    KeyChain chain = KeyChain::generate(r.bytes<32>(), cred.pc.pcid, 3000, -slot_len, slot_len);
    n->tx = std::make_unique<BeaconSender>(params, dir, std::move(cred), std::move(chain));
    nodes.push_back(std::move(n));
    return *nodes.back();
  }
};

/// Beacon signed by nobody the directory knows.
inline BeaconPtr random_pc_beacon(Rng& r, SimTime at) {
  Message m;
  m.body.pcid = Pcid{static_cast<std::uint32_t>(r.next())};
  m.body.bid = static_cast<std::uint32_t>(r.next());
  m.body.timestamp_ms = at.count() / 1000;
  m.body.disclosed_key = r.bytes<kDigestSize>();
  m.signature = r.bytes<kSignatureSize>();
  m.mac = r.bytes<kDigestSize>();
  return make_beacon_frame(std::move(m), FrameTruth{-1, Origin::kFlooder, false, true});
}

/// Drives one receiver and records everything it reports.
class RxHarness : public ReceiverObserver {
 public:
  struct Acceptance {
    Digest digest;
    AcceptInfo info;
    SimTime arrival;
    SimTime at;
  };

  RxHarness(const ProtocolParams& params, PseudonymDirectory& dir, std::uint64_t seed = 7)
      : cpu(from_ms(params.tau_verify_ms), from_ms(params.tau_light_ms)),
        rng(seed),
        rx(params, dir, cpu, rng, *this) {}

  void deliver(const BeaconPtr& f, SimTime at) {
    clock_ = std::max(clock_, at);
    rx.on_receive(f, at);
  }

  /// Moves the clock without running the CPU.
  void skip_to(SimTime t) { clock_ = std::max(clock_, t); }

  /// Runs the verification loop until `until`.
  void pump(SimTime until) {
    SimTime now = clock_;
    while (true) {
      if (pending_) {
        if (*pending_ > until) break;
        now = *pending_;
        pending_.reset();
        rx.complete(now);
      }
      now = std::max({now, cpu.busy_until(), clock_});
      if (now > until || !rx.has_work()) break;
      pending_ = rx.start_next(now);
      if (!pending_ && !rx.has_work()) break;
    }
    clock_ = std::max(clock_, until);
  }

  /// Delivers, then immediately lets the CPU run to `until`.
  void deliver_and_pump(const BeaconPtr& f, SimTime at, SimTime until) {
    pump(at);
    deliver(f, at);
    pump(until);
  }

  bool accepted(const BeaconPtr& f) const {
    for (const auto& a : accepts) {
      if (a.digest == f->digest) return true;
    }
    return false;
  }
  std::optional<Acceptance> acceptance(const BeaconPtr& f) const {
    for (const auto& a : accepts) {
      if (a.digest == f->digest) return a;
    }
    return std::nullopt;
  }
  bool retracted(const BeaconPtr& f) const {
    for (const auto& d : retractions) {
      if (d == f->digest) return true;
    }
    return false;
  }
  std::size_t drops(DropReason r) const {
    auto it = rx.stats().dropped.find(r);
    return it == rx.stats().dropped.end() ? 0 : it->second;
  }

  void on_accepted(const BeaconFrame& f, SimTime arrival, SimTime now, const AcceptInfo& info) override {
    accepts.push_back({f.digest, info, arrival, now});
  }
  void on_retracted(const BeaconFrame& f, SimTime, const AcceptInfo&) override {
    retractions.push_back(f.digest);
  }
  void on_dropped(const BeaconFrame& f, DropReason r, SimTime) override {
    dropped.emplace_back(f.digest, r);
  }
  void on_discovered(Pcid p, SimTime t) override { discoveries.emplace_back(p, t); }
  void on_signature_checked(const BeaconFrame& f, bool valid, SimTime) override {
    checked.emplace_back(f.digest, valid);
  }
  void on_report(const MisbehaviorReport& r) override { reports.push_back(r); }
  void on_note_verified(const VerifiedEntry& e) override { noted.push_back(e); }
  void on_settled(const BeaconFrame& f, SimTime, Outcome o, SimTime) override {
    settled.emplace_back(f.digest, o);
  }

  CpuModel cpu;
  Rng rng;
  FacilitatedReceiver rx;

  std::vector<Acceptance> accepts;
  std::vector<Digest> retractions;
  std::vector<std::pair<Digest, DropReason>> dropped;
  std::vector<std::pair<Pcid, SimTime>> discoveries;
  std::vector<std::pair<Digest, bool>> checked;
  std::vector<MisbehaviorReport> reports;
  std::vector<VerifiedEntry> noted;
  std::vector<std::pair<Digest, Outcome>> settled;

 private:
  std::optional<SimTime> pending_;
  SimTime clock_{0};
};

}  // namespace vbeacon::testing
