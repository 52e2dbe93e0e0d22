// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <algorithm>

#include "protocol_fixture.hpp"
#include "vbeacon/codec.hpp"

using namespace vbeacon;
using namespace vbeacon::testing;

namespace {

int count_kind(const BeaconBody& b, FacilitatorKind k) {
  return static_cast<int>(std::count_if(b.facilitators.begin(), b.facilitators.end(),
                                        [k](const Facilitator& f) { return f.kind == k; }));
}

VerifiedEntry entry(std::uint32_t pcid, std::uint32_t bid, std::int64_t t, bool valid = true) {
  Digest d{};
  d[0] = static_cast<std::uint8_t>(pcid);
  d[1] = static_cast<std::uint8_t>(bid);
  return VerifiedEntry{Pcid{pcid}, bid, valid, d, t};
}

EventMessage denm(std::uint64_t id, std::int64_t created) {
  EventMessage ev;
  ev.event_id = id;
  ev.created_at_ms = created;
  ev.lifetime_ms = 2000;
  ev.body = {1, 2, 3};
  return ev;
}

std::vector<double> transmission_times(int beta1, int beta2) {
  ProtocolParams p;
  p.beta1 = beta1;
  p.beta2 = beta2;
  World w(p);
  TestNode& n = w.add_node();
  n.tx->schedule_event(denm(1, 0), ms(0));
  std::vector<double> times;
  for (int i = 0; i < 6; ++i) {
    std::vector<EventTransmission> ev;
    n.beacon(ms(10 + 100 * i), &ev);
    for (const auto& e : ev) times.push_back(to_ms(e.at));
  }
  return times;
}

}  // namespace

TEST_CASE("first beacon carries no SELF facilitators and discloses the previous slot key") {
  World w;
  TestNode& n = w.add_node();
  const auto out = n.tx->next_beacon(ms(250), Status{});
  const std::int64_t slot = 2;
  CHECK(count_kind(out.msg.body, FacilitatorKind::kSelf) == 0);
  CHECK(out.msg.body.facilitators.empty());
  CHECK(out.msg.body.disclosed_key == n.tx->chain().key_for_slot(slot - 1));
  CHECK(out.msg.body.bid == slot - n.tx->chain().base_slot());
  CHECK(out.msg.mac == compute_mac(mac_key(n.tx->chain().key_for_slot(slot)), out.msg.body, out.msg.signature));
  CHECK(w.dir.verify(n.pcid(), encode_body(out.msg.body), out.msg.signature));
}

TEST_CASE("steady state carries alpha COOP and k SELF facilitators in a 300 byte frame") {
  World w;
  TestNode& n = w.add_node();
  for (std::uint32_t i = 0; i < 5; ++i) n.tx->note_verified(entry(10 + i, i, 5 + i));
  BeaconPtr last;
  for (int i = 0; i < 4; ++i) last = n.beacon(ms(10 + 100 * i));
  const auto& b = last->msg.body;
  CHECK(count_kind(b, FacilitatorKind::kCoop) == 3);
  CHECK(count_kind(b, FacilitatorKind::kSelf) == 3);
  CHECK(b.facilitators.size() == 6);
  CHECK(last->wire_bytes == 300);
}

TEST_CASE("pending DENM displaces one COOP slot") {
  World w;
  TestNode& n = w.add_node();
  for (std::uint32_t i = 0; i < 3; ++i) n.tx->note_verified(entry(10 + i, i, 5 + i));
  for (int i = 0; i < 3; ++i) n.beacon(ms(10 + 100 * i));
  n.tx->schedule_event(denm(9, 300), ms(300));
  const auto b = n.beacon(ms(310))->msg.body;
  CHECK(count_kind(b, FacilitatorKind::kEvent) == 1);
  CHECK(count_kind(b, FacilitatorKind::kCoop) == 2);
  CHECK(count_kind(b, FacilitatorKind::kSelf) == 3);

  SUBCASE("evidence and DENM together displace two") {
    EventMessage ev = denm(10, 400);
    ev.kind = EventKind::kEvidence;
    n.tx->schedule_event(ev, ms(400));
    n.tx->schedule_event(denm(11, 400), ms(400));
    n.tx->note_verified(entry(20, 1, 390));
    const auto b2 = n.beacon(ms(410))->msg.body;
    CHECK(count_kind(b2, FacilitatorKind::kEvidence) == 1);
    CHECK(count_kind(b2, FacilitatorKind::kEvent) == 1);
    CHECK(count_kind(b2, FacilitatorKind::kCoop) == 1);
  }
}

TEST_CASE("event facilitator references the signed event digest") {
  World w;
  TestNode& n = w.add_node();
  n.tx->schedule_event(denm(5, 0), ms(0));
  const auto b = n.beacon(ms(10))->msg.body;
  std::vector<EventTransmission> ev;
  n.beacon(ms(110), &ev);
  REQUIRE(ev.size() == 3);
  REQUIRE(count_kind(b, FacilitatorKind::kEvent) == 1);
  CHECK(b.facilitators.back().digest == event_digest(ev[0].ev));
  CHECK(ev[0].ev.pc == n.tx->credential().pc);
  CHECK(w.dir.verify(ev[0].ev.pc, event_signed_bytes(ev[0].ev), ev[0].ev.signature));
}

TEST_CASE("dissemination schedule") {
  SUBCASE("beta1=1 beta2=3: three copies 20 ms apart after the disclosing beacon") {
    CHECK(transmission_times(1, 3) == std::vector<double>{130, 150, 170});
  }
  SUBCASE("beta1=2 beta2=2: four copies across two beacon cycles") {
    CHECK(transmission_times(2, 2) == std::vector<double>{130, 150, 230, 250});
  }
  SUBCASE("beta1=1 beta2=1: single copy") {
    CHECK(transmission_times(1, 1) == std::vector<double>{130});
  }
  SUBCASE("expired events are not scheduled") {
    World w;
    TestNode& n = w.add_node();
    n.tx->schedule_event(denm(1, 0), ms(2500));
    CHECK(n.tx->pending_plans() == 0);
  }
}

TEST_CASE("recent verified ring") {
  World w;
  TestNode& n = w.add_node();
  SUBCASE("four verifications evict the oldest") {
    for (std::uint32_t i = 0; i < 4; ++i) n.tx->note_verified(entry(10 + i, 1, 100 + i));
    const auto& r = n.tx->recent_verified();
    REQUIRE(r.size() == 3);
    CHECK(r[0].timestamp_ms == 103);
    CHECK(r[2].timestamp_ms == 101);
  }
  SUBCASE("negative entries are kept") {
    n.tx->note_verified(entry(10, 1, 100, false));
    REQUIRE(n.tx->recent_verified().size() == 1);
    CHECK_FALSE(n.tx->recent_verified()[0].validity);
  }
  SUBCASE("timestamp ties resolve independently of insertion order") {
    const auto a = entry(10, 4, 100);
    const auto b = entry(10, 5, 100);
    const auto c = entry(11, 1, 100);
    const auto d = entry(9, 9, 100);
    n.tx->note_verified(a);
    n.tx->note_verified(b);
    n.tx->note_verified(c);
    n.tx->note_verified(d);
    const auto first = n.tx->recent_verified();
    World w2;
    TestNode& m = w2.add_node();
    for (const auto& e : {d, c, b, a}) m.tx->note_verified(e);
    CHECK(first == m.tx->recent_verified());
    CHECK(first == std::vector<VerifiedEntry>{c, b, a});
  }
  SUBCASE("duplicates ignored") {
    n.tx->note_verified(entry(10, 1, 100));
    n.tx->note_verified(entry(10, 1, 100));
    CHECK(n.tx->recent_verified().size() == 1);
  }
}

TEST_CASE("disclosure safety and facilitator budget over a long trace") {
  World w;
  TestNode& n = w.add_node();
  Rng r(3);
  std::uint32_t prev_bid = 0;
  for (int i = 0; i < 500; ++i) {
    if (r.bernoulli(0.3)) n.tx->note_verified(entry(static_cast<std::uint32_t>(r.below(50)), i, 100 * i));
    if (r.bernoulli(0.05)) n.tx->schedule_event(denm(i, 100 * i), ms(100.0 * i));
    const SimTime at = ms(100.0 * i + 37);
    const auto b = n.beacon(at)->msg.body;
    const std::int64_t slot = slot_of(b.timestamp_ms, 100);
    // The disclosed key is for the previous slot, never the current one.
    CHECK(b.disclosed_key == n.tx->chain().key_for_slot(slot - 1));
    CHECK(b.disclosed_key != n.tx->chain().key_for_slot(slot));
    if (i > 0) CHECK(b.bid > prev_bid);
    prev_bid = b.bid;
    const int events = count_kind(b, FacilitatorKind::kEvent) + count_kind(b, FacilitatorKind::kEvidence);
    CHECK(count_kind(b, FacilitatorKind::kCoop) <= 3 - events);
    CHECK(count_kind(b, FacilitatorKind::kSelf) <= 3);
  }
}

TEST_CASE("sender errors") {
  World w;
  TestNode& n = w.add_node();
  n.beacon(ms(10));
  CHECK_THROWS_AS(n.beacon(ms(90)), std::logic_error);
  CHECK_THROWS_AS(n.tx->next_beacon(ms(100.0 * 5000), Status{}), ChainExhausted);
}

TEST_CASE("forging sender keeps chain and MAC intact") {
  World w;
  TestNode& n = w.add_node();
  n.forge();
  const auto f = n.beacon(ms(10));
  CHECK_FALSE(w.dir.verify(n.pcid(), encode_body(f->msg.body), f->msg.signature));
  CHECK(f->msg.mac == compute_mac(mac_key(n.tx->chain().key_for_slot(0)), f->msg.body, f->msg.signature));
}
