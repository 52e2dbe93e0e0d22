// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/sender.hpp"

#include <algorithm>

#include "vbeacon/codec.hpp"

namespace vbeacon {

BeaconSender::BeaconSender(const ProtocolParams& params, PseudonymDirectory& directory,
                           Credential cred, KeyChain chain)
    : params_(params), directory_(directory), cred_(std::move(cred)), chain_(std::move(chain)) {}

void BeaconSender::note_verified(const VerifiedEntry& e) {
  for (const auto& r : recent_) {
    if (r.pcid == e.pcid && r.bid == e.bid) return;
  }
  recent_.push_back(e);
  std::sort(recent_.begin(), recent_.end(), fresher);
  const auto cap = static_cast<std::size_t>(std::max(params_.alpha, 0));
  if (recent_.size() > cap) recent_.resize(cap);
}

void BeaconSender::schedule_event(EventMessage ev, SimTime now) {
  if (to_ms(now) > static_cast<double>(ev.created_at_ms + ev.lifetime_ms)) return;
  ev.pc = cred_.pc;
  ev.signature = directory_.sign(cred_, event_signed_bytes(ev));
  Plan p;
  p.digest = event_digest(ev);
  p.attachments_left = std::max(params_.beta1, 1);
  const bool evidence = ev.kind == EventKind::kEvidence;
  p.ev = std::move(ev);
  (evidence ? evidence_plans_ : denm_plans_).push_back(std::move(p));
}

void BeaconSender::advance_plans(std::deque<Plan>& plans, SimTime now, std::int64_t now_ms,
                                 std::vector<EventTransmission>& out) {
  if (plans.empty()) return;
  Plan& p = plans.front();
  if (p.awaiting_disclosure) {
    // This beacon discloses the key of the one that carried the facilitator.
    p.awaiting_disclosure = false;
    const SimTime spacing = from_ms(params_.event_spacing_ms);
    for (int i = 1; i <= std::max(params_.beta2, 1); ++i) {
      out.push_back({now + spacing * i, p.ev});
    }
    if (p.attachments_left == 0) plans.pop_front();
  }
  // Drop plans that can no longer be delivered.
  while (!plans.empty() && !plans.front().awaiting_disclosure &&
         now_ms > plans.front().ev.created_at_ms + plans.front().ev.lifetime_ms) {
    plans.pop_front();
  }
}

std::optional<Digest> BeaconSender::attach(std::deque<Plan>& plans) {
  if (plans.empty()) return std::nullopt;
  Plan& p = plans.front();
  if (p.attachments_left == 0) return std::nullopt;
  --p.attachments_left;
  p.awaiting_disclosure = true;
  return p.digest;
}

SenderOutput BeaconSender::next_beacon(SimTime now, const Status& status) {
  const auto now_ms = static_cast<std::int64_t>(now.count() / 1000);
  const std::int64_t slot = slot_of(now_ms, chain_.slot_len_ms());
  if (last_slot_ && slot <= *last_slot_) throw std::logic_error("two beacons in one slot");
  if (!chain_.covers_slot(slot) || !chain_.covers_slot(slot - 1)) throw ChainExhausted();
  if (now_ms >= cred_.pc.valid_to_ms) throw ChainExhausted();

  SenderOutput out;
  advance_plans(denm_plans_, now, now_ms, out.events);
  advance_plans(evidence_plans_, now, now_ms, out.events);

  // Entries older than a beacon lifetime are no longer useful to neighbors.
  const auto horizon = now_ms - static_cast<std::int64_t>(params_.t_blife_ms);
  std::erase_if(recent_, [&](const VerifiedEntry& e) { return e.timestamp_ms < horizon; });
  std::erase_if(pinned_, [&](const VerifiedEntry& e) { return e.timestamp_ms < horizon; });

  BeaconBody& body = out.msg.body;
  body.status = status;
  body.pcid = cred_.pc.pcid;
  body.bid = static_cast<std::uint32_t>(slot - chain_.base_slot());
  body.timestamp_ms = now_ms;
  body.disclosed_key = chain_.key_for_slot(slot - 1);

  std::vector<Facilitator> events;
  if (auto d = attach(denm_plans_)) events.push_back(Facilitator::event(*d));
  if (auto d = attach(evidence_plans_)) events.push_back(Facilitator::evidence(*d));

  const int coop_slots = std::max(params_.alpha - static_cast<int>(events.size()), 0);
  int used = 0;
  while (used < coop_slots && !pinned_.empty()) {
    const auto& e = pinned_.front();
    body.facilitators.push_back(Facilitator::coop(e.pcid, e.bid, e.validity, e.digest));
    pinned_.erase(pinned_.begin());
    ++used;
  }
  for (const auto& e : recent_) {
    if (used >= coop_slots) break;
    body.facilitators.push_back(Facilitator::coop(e.pcid, e.bid, e.validity, e.digest));
    ++used;
  }
  for (const auto& [bid, digest] : own_recent_) {
    if (static_cast<int>(body.facilitators.size()) - used >= params_.k) break;
    body.facilitators.push_back(Facilitator::self(bid, digest));
  }
  body.facilitators.insert(body.facilitators.end(), events.begin(), events.end());

  if (forge_rng_ != nullptr) {
    out.msg.signature = forge_rng_->bytes<kSignatureSize>();
  } else {
    out.msg.signature = directory_.sign(cred_, encode_body(body));
  }
  out.msg.mac = compute_mac(mac_key(chain_.key_for_slot(slot)), body, out.msg.signature);

  own_recent_.emplace_front(body.bid, beacon_digest(body, out.msg.signature));
  while (own_recent_.size() > static_cast<std::size_t>(std::max(params_.k, 0))) own_recent_.pop_back();
  last_slot_ = slot;
  last_bid_ = body.bid;
  return out;
}

}  // namespace vbeacon
