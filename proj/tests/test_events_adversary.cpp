// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include "protocol_fixture.hpp"
#include "vbeacon/adversary.hpp"
#include "vbeacon/codec.hpp"
#include "vbeacon/events.hpp"

using namespace vbeacon;
using namespace vbeacon::testing;

namespace {

Digest digest_of(std::uint8_t v) {
  Digest d{};
  d.fill(v);
  return d;
}

EventMessage event(std::uint64_t id, std::int64_t created, EventKind kind = EventKind::kDenm,
                   std::vector<std::uint8_t> body = {1, 2, 3}) {
  EventMessage ev;
  ev.event_id = id;
  ev.kind = kind;
  ev.created_at_ms = created;
  ev.lifetime_ms = 2000;
  ev.body = std::move(body);
  return ev;
}

/// Announces `ev` from `n` and returns the announcing beacon and the first signed copy.
std::pair<BeaconPtr, EventPtr> announce(TestNode& n, EventMessage ev, SimTime at) {
  n.tx->schedule_event(std::move(ev), at);
  const auto b = n.beacon(at + ms(10));
  std::vector<EventTransmission> out;
  for (int i = 1; out.empty() && i < 4; ++i) n.beacon(at + ms(10 + 100 * i), &out);
  REQUIRE_FALSE(out.empty());
  return {b, make_event_frame(out.front().ev, FrameTruth{n.index, Origin::kHonest, true, false})};
}

struct Recorder : EventObserver {
  void on_event_dropped(const EventFrame&, EventDrop d, SimTime) override { drops.push_back(d); }
  void on_event_accepted(const EventFrame& f, SimTime, SimTime) override { accepted.push_back(f.digest); }
  void on_evidence_accepted(const EventFrame&, Pcid v, SimTime) override { convicted.push_back(v); }
  void on_evidence_rejected(const EventFrame&, Pcid r, SimTime) override { suspected.push_back(r); }
  std::vector<EventDrop> drops;
  std::vector<Digest> accepted;
  std::vector<Pcid> convicted;
  std::vector<Pcid> suspected;
};

struct Proc {
  explicit Proc(World& w)
      : cpu(from_ms(w.params.tau_verify_ms), from_ms(w.params.tau_light_ms)),
        p(w.params, w.dir, cpu, rec, [this](Pcid v, SimTime) { revoked.push_back(v); }) {}

  /// Runs every queued event to completion starting at `now`.
  void drain(SimTime now) {
    while (auto done = p.start_next(now)) {
      p.complete(*done);
      now = *done;
    }
  }

  CpuModel cpu;
  Recorder rec;
  std::vector<Pcid> revoked;
  EventProcessor p;
};

/// Bogus beacon from a forging sender and an honest-looking validator beacon vouching for it.
struct Collusion {
  BeaconPtr bogus;
  BeaconPtr validating;
};

Collusion collude(TestNode& s, TestNode& v) {
  s.beacon(ms(10));
  v.beacon(ms(12));
  s.forge();
  Collusion c;
  c.bogus = s.beacon(ms(110));
  const auto& b = c.bogus->msg.body;
  v.tx->note_verified(VerifiedEntry{b.pcid, b.bid, true, c.bogus->digest, b.timestamp_ms});
  c.validating = v.beacon(ms(112));
  return c;
}

}  // namespace

TEST_CASE("facilitator cache") {
  FacilitatorCache c(ms(1000), 2);
  c.insert(digest_of(1), EventKind::kDenm, Pcid{1}, ms(0));
  c.insert(digest_of(2), EventKind::kDenm, Pcid{2}, ms(10));

  SUBCASE("entries expire after the TTL") {
    CHECK(c.lookup(digest_of(1), ms(1000)));
    CHECK_FALSE(c.lookup(digest_of(1), ms(1001)));
    CHECK(c.size() == 1);
  }
  SUBCASE("least recently used is evicted") {
    CHECK(c.lookup(digest_of(1), ms(20)));
    c.insert(digest_of(3), EventKind::kEvidence, Pcid{3}, ms(30));
    CHECK(c.lookup(digest_of(1), ms(40)));
    CHECK_FALSE(c.lookup(digest_of(2), ms(40)));
    CHECK(c.lookup(digest_of(3), ms(40))->kind == EventKind::kEvidence);
  }
}

TEST_CASE("evidence encoding") {
  World w;
  TestNode& s = w.add_node();
  TestNode& v = w.add_node();
  const Collusion c = collude(s, v);
  const auto body = encode_evidence(c.bogus->msg, c.validating->msg);
  const auto pair = decode_evidence(body);
  REQUIRE(pair);
  CHECK(pair->bogus == c.bogus->msg);
  CHECK(pair->validating == c.validating->msg);
  CHECK(vouching_facilitator(*pair) != nullptr);

  std::vector<std::uint8_t> cut(body.begin(), body.end() - 1);
  CHECK_FALSE(decode_evidence(cut));
  std::vector<std::uint8_t> longer = body;
  longer.push_back(0);
  CHECK_FALSE(decode_evidence(longer));

  EvidencePair swapped{c.validating->msg, c.bogus->msg};
  CHECK(vouching_facilitator(swapped) == nullptr);
}

TEST_CASE("event checks") {
  World w;
  TestNode& s = w.add_node();
  TestNode& v = w.add_node();
  TestNode& r = w.add_node();
  const Collusion c = collude(s, v);

  SUBCASE("signed DENM") {
    const auto [b, ev] = announce(r, event(1, 0), ms(0));
    CHECK(check_event(w.dir, ev->ev).valid);
    CHECK(event_verify_count(ev->ev) == 1);
    EventMessage bad = ev->ev;
    bad.body[0] ^= 1;
    CHECK_FALSE(check_event(w.dir, bad).valid);
  }
  SUBCASE("sound evidence convicts the validator") {
    const auto [b, ev] = announce(r, event(2, 200, EventKind::kEvidence, encode_evidence(c.bogus->msg, c.validating->msg)),
                                  ms(200));
    CHECK(event_verify_count(ev->ev) == 3);
    const EventCheck k = check_event(w.dir, ev->ev);
    CHECK(k.valid);
    REQUIRE(k.revoke);
    CHECK(*k.revoke == v.pcid());
  }
  SUBCASE("evidence against an authentic beacon proves nothing") {
    const auto honest = r.beacon(ms(210));
    const auto& hb = honest->msg.body;
    v.tx->note_verified(VerifiedEntry{hb.pcid, hb.bid, true, honest->digest, hb.timestamp_ms});
    const auto vouching = v.beacon(ms(212));
    const auto [b, ev] =
        announce(r, event(3, 300, EventKind::kEvidence, encode_evidence(honest->msg, vouching->msg)), ms(300));
    CHECK_FALSE(check_event(w.dir, ev->ev).valid);
  }
}

TEST_CASE("event processor") {
  World w;
  TestNode& s = w.add_node();
  TestNode& v = w.add_node();
  TestNode& r = w.add_node();
  Proc proc(w);

  SUBCASE("unannounced events are dropped without a signature check") {
    const auto [b, ev] = announce(r, event(1, 0), ms(0));
    proc.p.on_receive(ev, ms(150));
    CHECK(proc.rec.drops == std::vector<EventDrop>{EventDrop::kUnmatched});
    CHECK_FALSE(proc.p.has_work());
    CHECK(proc.cpu.verifies() == 0);
  }
  SUBCASE("announced DENM is verified once and duplicates are ignored") {
    const auto [b, ev] = announce(r, event(1, 0), ms(0));
    proc.p.on_beacon_accepted(*b, ms(15));
    proc.p.on_receive(ev, ms(150));
    proc.p.on_receive(ev, ms(151));
    CHECK(proc.rec.drops == std::vector<EventDrop>{EventDrop::kDuplicate});
    proc.drain(ms(151));
    CHECK(proc.rec.accepted.size() == 1);
    CHECK(proc.cpu.verifies() == 1);
    CHECK(proc.p.stats().verifications == 1);
  }
  SUBCASE("announcement by another pseudonym does not match") {
    auto [b, ev] = announce(r, event(1, 0), ms(0));
    const auto other = v.beacon(ms(20));
    auto m = other->msg;
    m.body.facilitators = b->msg.body.facilitators;
    proc.p.on_beacon_accepted(*make_beacon_frame(m, other->truth), ms(25));
    proc.p.on_receive(ev, ms(150));
    CHECK(proc.rec.drops == std::vector<EventDrop>{EventDrop::kUnmatched});
  }
  SUBCASE("expired events are dropped") {
    const auto [b, ev] = announce(r, event(1, 0), ms(0));
    proc.p.on_beacon_accepted(*b, ms(15));
    proc.p.on_receive(ev, ms(2500));
    CHECK(proc.rec.drops == std::vector<EventDrop>{EventDrop::kExpired});
  }
  SUBCASE("evidence costs three verifications and revokes the validator") {
    const Collusion c = collude(s, v);
    const auto [b, ev] =
        announce(r, event(2, 200, EventKind::kEvidence, encode_evidence(c.bogus->msg, c.validating->msg)), ms(200));
    proc.p.on_beacon_accepted(*b, ms(215));
    proc.p.on_receive(ev, ms(330));
    const auto done = proc.p.start_next(ms(330));
    REQUIRE(done);
    CHECK(*done == ms(330) + 3 * from_ms(w.params.tau_verify_ms));
    proc.p.complete(*done);
    CHECK(proc.revoked == std::vector<Pcid>{v.pcid()});
    CHECK(proc.rec.convicted == std::vector<Pcid>{v.pcid()});
  }
}

TEST_CASE("flooder") {
  World w;
  Flooder f(9, FloodMix::kMixed, 5);
  int beacons = 0;
  int denms = 0;
  for (int i = 0; i < 10; ++i) {
    const auto fr = f.next(ms(100 * i), Status{}, 2000);
    CHECK((fr.beacon == nullptr) != (fr.event == nullptr));
    if (fr.beacon) {
      ++beacons;
      CHECK(fr.beacon->truth.origin == Origin::kFlooder);
      CHECK(fr.beacon->truth.forged_pc);
      CHECK(fr.beacon->wire_bytes == 300);
    } else {
      ++denms;
      CHECK_FALSE(check_event(w.dir, fr.event->ev).valid);
    }
  }
  CHECK(beacons == 5);
  CHECK(denms == 5);
  const auto a = Flooder(1, FloodMix::kBeacons, 1).bogus_beacon(ms(0), Status{});
  const auto b = Flooder(1, FloodMix::kBeacons, 2).bogus_beacon(ms(0), Status{});
  CHECK(a->msg.body.pcid != b->msg.body.pcid);
}

TEST_CASE("masquerade replays the pseudonym under a forged body") {
  World w;
  TestNode& x = w.add_node();
  x.beacon(ms(10));
  const auto honest = x.beacon(ms(110));
  Rng rng(4);
  const auto fake = masquerade(*honest, 3, rng);
  CHECK(fake->msg.body.pcid == honest->msg.body.pcid);
  CHECK(fake->msg.body.bid == honest->msg.body.bid);
  CHECK(fake->msg.body.disclosed_key == honest->msg.body.disclosed_key);
  CHECK(fake->digest != honest->digest);
  CHECK_FALSE(w.dir.verify(fake->msg.body.pcid, encode_body(fake->msg.body), fake->msg.signature));
  CHECK(fake->truth.origin == Origin::kMasquerader);
}

TEST_CASE("collusion board") {
  CollusionBoard board;
  board.post(1, VerifiedEntry{Pcid{1}, 1, true, digest_of(1), 0});
  board.post(2, VerifiedEntry{Pcid{2}, 1, true, digest_of(2), 0});
  board.post(1, VerifiedEntry{Pcid{1}, 2, true, digest_of(3), 100});
  std::size_t cursor = 0;
  const auto first = board.take(1, cursor);
  REQUIRE(first.size() == 2);
  CHECK(first[1].bid == 2);
  CHECK(board.take(1, cursor).empty());
  board.post(1, VerifiedEntry{Pcid{1}, 3, true, digest_of(4), 200});
  CHECK(board.take(1, cursor).size() == 1);
}
