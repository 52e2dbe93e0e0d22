// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/receiver.hpp"

#include <algorithm>
#include <cassert>

#include "vbeacon/codec.hpp"

namespace vbeacon {

namespace {

std::int64_t ms_floor(SimTime t) {
  const auto us = t.count();
  return us >= 0 ? us / 1000 : -((-us + 999) / 1000);
}

AcceptInfo accepted_as(VerifierKind kind) {
  AcceptInfo info;
  info.kind = kind;
  return info;
}

}  // namespace

FacilitatedReceiver::FacilitatedReceiver(const ProtocolParams& params, PseudonymDirectory& directory,
                                         CpuModel& cpu, Rng& rng, ReceiverObserver& observer)
    : params_(params), directory_(directory), cpu_(cpu), rng_(rng), obs_(observer) {}

FacilitatedReceiver::RxBeacon* FacilitatedReceiver::get(LocalId id) {
  auto it = msgs_.find(id);
  return it == msgs_.end() ? nullptr : &it->second;
}

const FacilitatedReceiver::RxBeacon* FacilitatedReceiver::find(LocalId id) const {
  auto it = msgs_.find(id);
  return it == msgs_.end() ? nullptr : &it->second;
}

std::optional<LocalId> FacilitatedReceiver::find_by_digest(const Digest& d) const {
  for (const auto& [id, m] : msgs_) {
    if (m.f->digest == d) return id;
  }
  return std::nullopt;
}

bool FacilitatedReceiver::discovered(Pcid p) const {
  auto it = pcs_.find(p);
  return it != pcs_.end() && it->second.discovered;
}

void FacilitatedReceiver::drop(const BeaconFrame& f, DropReason reason, SimTime now) {
  ++stats_.dropped[reason];
  obs_.on_dropped(f, reason, now);
}

// --- reception -------------------------------------------------

void FacilitatedReceiver::on_receive(BeaconPtr frame, SimTime now) {
  ++stats_.received;
  obs_.on_received(*frame, now);
  const BeaconBody& b = frame->msg.body;
  if (prl_.contains(b.pcid)) return drop(*frame, DropReason::kRevoked, now);

  const std::int64_t now_ms = ms_floor(now);
  const auto skew = static_cast<std::int64_t>(std::llround(params_.clock_skew_ms));
  const auto life = static_cast<std::int64_t>(std::llround(params_.t_blife_ms));
  if (b.timestamp_ms > now_ms + skew || b.timestamp_ms < now_ms - life) {
    return drop(*frame, DropReason::kStale, now);
  }
  const std::int64_t slot_len = params_.slot_len_ms();
  const std::int64_t slot = slot_of(b.timestamp_ms, slot_len);
  // The slot's MAC key is disclosed by the next beacon; anything arriving
  // after that point could have been MACed by an eavesdropper.
  if (slot_of(now_ms - skew, slot_len) > slot) return drop(*frame, DropReason::kLate, now);

  PcEntry& pe = pcs_[b.pcid];
  if (pe.discovered) {
    const std::int64_t gap = slot - pe.latest_slot;
    if (gap < 1) return drop(*frame, DropReason::kReplay, now);
    if (gap <= params_.max_chain_gap_slots) {
      const auto cc = chain_check(b.disclosed_key, pe.latest_key, gap, params_.max_chain_gap_slots);
      cpu_.charge_hashes(now, cc.hashes);
      if (!cc.ok()) return drop(*frame, DropReason::kChain, now);
      const LocalId id = enqueue(frame, now, slot, true);
      const auto prev = pe.latest_id;
      pe.latest_slot = slot;
      pe.latest_key = b.disclosed_key;
      pe.latest_id = id;
      if (prev) {
        if (RxBeacon* p = get(*prev)) validate_mac(*p, b.disclosed_key, slot, b.bid, now);
      }
      return;
    }
    // Silent for too long: start over as a new contact.
    pe.discovered = false;
    pe.latest_id.reset();
  }
  for (LocalId id : pe.bs) {
    if (msgs_.at(id).msg().body.disclosed_key == b.disclosed_key) {
      return drop(*frame, DropReason::kDuplicateKey, now);
    }
  }
  enqueue(frame, now, slot, false);
}

LocalId FacilitatedReceiver::enqueue(BeaconPtr frame, SimTime now, std::int64_t slot, bool chain_ok) {
  const LocalId id = next_id_++;
  RxBeacon m;
  m.id = id;
  m.arrival = now;
  m.slot = slot;
  m.q = Queue::kRecv;
  m.chain_ok = chain_ok;
  const Pcid pcid = frame->msg.body.pcid;
  const std::uint32_t bid = frame->msg.body.bid;
  m.f = std::move(frame);
  msgs_.emplace(id, std::move(m));
  queue_recv_.insert(id);
  PcEntry& pe = pcs_[pcid];
  pe.bs.insert(id);
  pe.by_bid.emplace(bid, id);
  ++stats_.queued;
  return id;
}

void FacilitatedReceiver::erase(LocalId id) {
  auto it = msgs_.find(id);
  if (it == msgs_.end()) return;
  RxBeacon& m = it->second;
  assert(m.q != Queue::kInflight);
  leave_queues(m);
  auto pit = pcs_.find(m.pcid());
  if (pit != pcs_.end()) {
    PcEntry& pe = pit->second;
    pe.bs.erase(id);
    auto [lo, hi] = pe.by_bid.equal_range(m.msg().body.bid);
    for (auto b = lo; b != hi; ++b) {
      if (b->second == id) {
        pe.by_bid.erase(b);
        break;
      }
    }
    if (pe.latest_id == id) pe.latest_id.reset();
    if (!pe.discovered && pe.bs.empty()) pcs_.erase(pit);
  }
  msgs_.erase(it);
}

void FacilitatedReceiver::drop_queued(LocalId id, DropReason reason, SimTime now) {
  RxBeacon* m = get(id);
  if (m == nullptr) return;
  if (m->verdict == Verdict::kAccepted) obs_.on_retracted(*m->f, now, m->accept);
  drop(*m->f, reason, now);
  erase(id);
}

void FacilitatedReceiver::leave_queues(RxBeacon& m) {
  if (m.q == Queue::kRecv) {
    queue_recv_.erase(m.id);
  } else if (m.q == Queue::kCheck) {
    --check_live_;
  }
  if (m.q != Queue::kInflight) m.q = Queue::kNone;
}

void FacilitatedReceiver::move_to_check(RxBeacon& m, CheckReason reason) {
  if (m.q == Queue::kCheck || m.q == Queue::kInflight) return;
  if (m.q == Queue::kRecv) queue_recv_.erase(m.id);
  m.q = Queue::kCheck;
  m.reason = reason;
  queue_check_.push_back(m.id);
  ++check_live_;
}

// --- verdicts and verifier bookkeeping --------------------------------------

void FacilitatedReceiver::accept(RxBeacon& m, AcceptInfo info, std::optional<LocalId> parent,
                                 SimTime now) {
  if (m.verdict == Verdict::kAccepted) {
    if (is_definitive(info.kind) && m.provisional) {
      m.provisional = false;
      m.accept.provisional = false;
    }
    if (!m.provisional) leave_queues(m);
    // Later links hang off the definitive record, never the cooperative one.
    auto rit = provenance_index_.find(m.id);
    if (is_definitive(info.kind) && rit != provenance_index_.end() &&
        !is_definitive(provenance_[rit->second].kind)) {
      record_provenance(m, info.kind, parent);
    }
    return;
  }
  info.mac_assisted = std::any_of(m.ver.begin(), m.ver.end(), [](const VerEntry& e) {
    return e.v.kind == VerifierKind::kMac && e.v.validity;
  });
  m.verdict = Verdict::kAccepted;
  m.provisional = info.provisional;
  m.accept = info;
  if (!info.provisional) leave_queues(m);
  if (m.f->truth.forged_pc) ++stats_.phantom_accepts;

  record_provenance(m, info.kind, parent);
  obs_.on_accepted(*m.f, m.arrival, now, m.accept);
}

void FacilitatedReceiver::record_provenance(const RxBeacon& m, VerifierKind kind,
                                            std::optional<LocalId> parent) {
  ProvenanceRecord rec;
  rec.id = m.id;
  rec.kind = kind;
  if (parent) {
    auto pit = provenance_index_.find(*parent);
    if (pit != provenance_index_.end()) rec.parent = pit->second;
  }
  provenance_index_[m.id] = provenance_.size();
  provenance_.push_back(rec);
}

void FacilitatedReceiver::reject(RxBeacon& m, SimTime now) {
  if (m.verdict == Verdict::kAccepted) obs_.on_retracted(*m.f, now, m.accept);
  m.verdict = Verdict::kRejected;
  m.provisional = false;
  leave_queues(m);
}

bool FacilitatedReceiver::attributes(const RxBeacon& m) const {
  return params_.cross_check || m.reason == CheckReason::kProbabilistic;
}

void FacilitatedReceiver::set_definitive(RxBeacon& m, bool validity, Verifier v, SimTime now) {
  if (attributes(m)) {
    for (const VerEntry& e : m.ver) {
      if (e.v.validity == validity) continue;
      if (e.v.kind == VerifierKind::kCoop && e.v.source_pcid) {
        convict(*e.v.source_pcid, m, e.carrier, now);
      } else if (e.v.kind == VerifierKind::kMac && e.v.validity && !validity) {
        krl_add(m, now);
      }
    }
  }
  v.validity = validity;
  m.ver.clear();
  m.ver.push_back(VerEntry{v, nullptr, std::nullopt, true});
  m.definitive = true;
  m.def_validity = validity;
}

void FacilitatedReceiver::add_verifier(RxBeacon& m, const VerEntry& e, SimTime now) {
  if (m.definitive) {
    if (e.v.validity != m.def_validity && params_.cross_check) {
      if (e.v.kind == VerifierKind::kCoop && e.v.source_pcid) {
        convict(*e.v.source_pcid, m, e.carrier, now);
      } else if (e.v.kind == VerifierKind::kMac && e.v.validity) {
        krl_add(m, now);
      }
    }
    return;
  }
  bool conflict = false;
  for (const VerEntry& x : m.ver) {
    if (x.v.kind == e.v.kind && x.v.source_pcid == e.v.source_pcid && x.v.source_bid == e.v.source_bid) {
      return;
    }
    conflict = conflict || x.v.validity != e.v.validity;
  }
  if (m.ver.size() >= static_cast<std::size_t>(std::max(params_.verifier_cap, 1))) {
    m.ver.erase(m.ver.begin());
  }
  m.ver.push_back(e);
  if (params_.cross_check && conflict && m.q != Queue::kCheck && m.q != Queue::kInflight) {
    if (m.verdict == Verdict::kAccepted) {
      m.provisional = true;
      m.accept.provisional = true;
    }
    move_to_check(m, CheckReason::kConflict);
  }
}

void FacilitatedReceiver::convict(Pcid accused, const RxBeacon& m, const BeaconPtr& carrier,
                                  SimTime now) {
  if (!prl_.insert(accused).second) return;
  MisbehaviorReport r;
  r.accused = accused;
  r.list = RevocationList::kPrl;
  r.at = now;
  r.bogus = m.f;
  r.validating = carrier;
  obs_.on_report(r);
}

void FacilitatedReceiver::krl_add(const RxBeacon& m, SimTime now) {
  if (!krl_.insert(m.pcid()).second) return;
  MisbehaviorReport r;
  r.accused = m.pcid();
  r.list = RevocationList::kKrl;
  r.at = now;
  r.bogus = m.f;
  obs_.on_report(r);
}

void FacilitatedReceiver::revoke(Pcid p, SimTime) { prl_.insert(p); }

void FacilitatedReceiver::note_verified(const RxBeacon& m, bool validity) {
  const BeaconBody& b = m.msg().body;
  obs_.on_note_verified(VerifiedEntry{b.pcid, b.bid, validity, m.f->digest, b.timestamp_ms});
}

// --- MAC validation -------------------------------------------

void FacilitatedReceiver::validate_mac(RxBeacon& m, const Digest& newer_key, std::int64_t newer_slot,
                                       std::uint32_t newer_bid, SimTime now) {
  if (m.mac_checked) return;
  const std::int64_t steps = (newer_slot - 1) - m.slot;
  if (steps < 0) return;
  m.mac_checked = true;
  const Digest key = chain_walk(newer_key, steps);
  cpu_.charge_hashes(now, static_cast<std::uint64_t>(steps) + 2);
  const bool valid = compute_mac(mac_key(key), m.msg().body, m.msg().signature) == m.msg().mac;
  const LocalId id = m.id;
  if (valid && !krl_.contains(m.pcid())) apply_coop(m, VerifierKind::kMac, now);
  if (RxBeacon* again = get(id)) {
    add_verifier(*again, VerEntry{Verifier{again->pcid(), newer_bid, valid, VerifierKind::kMac},
                                  nullptr, std::nullopt, false},
                 now);
  }
}

// --- self-chained and cooperative verification ------------

void FacilitatedReceiver::cascade(LocalId root, VerifierKind kind, SimTime now) {
  std::vector<std::pair<LocalId, VerifierKind>> work{{root, kind}};
  while (!work.empty()) {
    const auto [id, k] = work.back();
    work.pop_back();
    RxBeacon* c = get(id);
    if (c == nullptr) continue;
    apply_self(*c, work, now);
    if ((c = get(id)) != nullptr) apply_coop(*c, k, now);
  }
}

void FacilitatedReceiver::apply_self(RxBeacon& carrier,
                                     std::vector<std::pair<LocalId, VerifierKind>>& work, SimTime now) {
  auto pit = pcs_.find(carrier.pcid());
  if (pit == pcs_.end()) return;
  const LocalId cid = carrier.id;
  const Pcid cpcid = carrier.pcid();
  const std::uint32_t cbid = carrier.msg().body.bid;
  const BeaconPtr cframe = carrier.f;  // keeps the facilitators alive across cascades
  for (const Facilitator& f : cframe->msg.body.facilitators) {
    if (f.kind != FacilitatorKind::kSelf) continue;
    std::vector<LocalId> ids;
    auto [lo, hi] = pit->second.by_bid.equal_range(f.bid);
    for (auto b = lo; b != hi; ++b) ids.push_back(b->second);
    for (LocalId j : ids) {
      if (j == cid) continue;
      RxBeacon* jm = get(j);
      if (jm == nullptr || jm->definitive || jm->q == Queue::kInflight) continue;
      cpu_.charge_hashes(now, 1);
      const bool valid = jm->f->digest == f.digest;
      set_definitive(*jm, valid, Verifier{cpcid, cbid, valid, VerifierKind::kSelf}, now);
      if (valid) {
        accept(*jm, accepted_as(VerifierKind::kSelf), cid, now);
        work.emplace_back(j, VerifierKind::kSelf);
      } else {
        reject(*jm, now);
      }
    }
  }
}

void FacilitatedReceiver::apply_coop(RxBeacon& carrier, VerifierKind type, SimTime now) {
  const LocalId cid = carrier.id;
  const Pcid cpcid = carrier.pcid();
  const std::uint32_t cbid = carrier.msg().body.bid;
  const BeaconPtr cframe = carrier.f;
  const bool carrier_definitive = carrier.definitive && carrier.def_validity;
  const bool trusted = type == VerifierKind::kSig || type == VerifierKind::kSelf;
  for (const Facilitator& f : cframe->msg.body.facilitators) {
    if (f.kind != FacilitatorKind::kCoop) continue;
    auto pit = pcs_.find(f.pcid);
    if (pit == pcs_.end()) continue;
    std::vector<LocalId> ids;
    auto [lo, hi] = pit->second.by_bid.equal_range(f.bid);
    for (auto b = lo; b != hi; ++b) ids.push_back(b->second);
    for (LocalId j : ids) {
      RxBeacon* jm = get(j);
      if (jm == nullptr || j == cid) continue;
      cpu_.charge_hashes(now, 1);
      if (jm->f->digest != f.digest) continue;
      const VerEntry entry{Verifier{cpcid, cbid, f.validity, VerifierKind::kCoop}, cframe, cid,
                           carrier_definitive};
      if (jm->q == Queue::kRecv) {
        const bool pc_known = pcs_.at(f.pcid).discovered;
        AcceptInfo info{VerifierKind::kCoop, cpcid, cframe};
        if (!pc_known) {
          if (f.validity) move_to_check(*jm, CheckReason::kDiscovery);
        } else if (trusted) {
          ++stats_.coop_decisions;
          if (rng_.bernoulli(params_.pr_check)) {
            ++stats_.coop_checks;
            if (f.validity) {
              info.provisional = true;
              accept(*jm, info, cid, now);
            }
            move_to_check(*jm, CheckReason::kProbabilistic);
          } else if (f.validity) {
            accept(*jm, info, cid, now);
          } else {
            reject(*jm, now);
          }
        }
      }
      add_verifier(*jm, entry, now);
    }
  }
}

// --- discovery walk ---------------------------------------------------------

void FacilitatedReceiver::discover(PcEntry& pe, RxBeacon& v, SimTime now) {
  pe.discovered = true;
  pe.latest_slot = v.slot;
  pe.latest_key = v.msg().body.disclosed_key;
  pe.latest_id = v.id;
  v.chain_ok = true;
  obs_.on_discovered(v.pcid(), now);

  const Pcid pcid = v.pcid();
  const Digest v_key = v.msg().body.disclosed_key;
  const std::int64_t v_slot = v.slot;
  const std::uint32_t v_bid = v.msg().body.bid;
  std::vector<std::pair<std::int64_t, LocalId>> others;
  for (LocalId id : pe.bs) {
    if (id != v.id) others.emplace_back(msgs_.at(id).slot, id);
  }
  std::sort(others.begin(), others.end());

  for (const auto& [slot, id] : others) {
    RxBeacon* j = get(id);
    if (j == nullptr) continue;
    if (slot < v_slot) {
      const auto cc = chain_check(v_key, j->msg().body.disclosed_key, v_slot - slot,
                                  params_.max_chain_gap_slots);
      cpu_.charge_hashes(now, cc.hashes);
      if (!cc.ok()) {
        drop_queued(id, DropReason::kDiscoveryWalk, now);
        continue;
      }
      j->chain_ok = true;
      validate_mac(*j, v_key, v_slot, v_bid, now);
    } else if (slot == v_slot) {
      drop_queued(id, DropReason::kDiscoveryWalk, now);
    } else {
      PcEntry& cur = pcs_.at(pcid);
      const std::int64_t gap = slot - cur.latest_slot;
      const auto cc = chain_check(j->msg().body.disclosed_key, cur.latest_key, gap,
                                  params_.max_chain_gap_slots);
      cpu_.charge_hashes(now, cc.hashes);
      if (gap < 1 || !cc.ok()) {
        drop_queued(id, DropReason::kDiscoveryWalk, now);
        continue;
      }
      j->chain_ok = true;
      const auto prev = cur.latest_id;
      cur.latest_slot = slot;
      cur.latest_key = j->msg().body.disclosed_key;
      cur.latest_id = id;
      const Digest jkey = j->msg().body.disclosed_key;
      const std::uint32_t jbid = j->msg().body.bid;
      if (prev) {
        if (RxBeacon* p = get(*prev)) validate_mac(*p, jkey, slot, jbid, now);
      }
    }
  }
}

// --- selection and signature path -----------------------------

SimTime FacilitatedReceiver::begin(RxBeacon& m, bool pc_discovered, SimTime now) {
  m.q = Queue::kInflight;
  inflight_ = m.id;
  inflight_discovered_ = pc_discovered;
  ++stats_.verifications;
  (pc_discovered ? stats_.total_time_d : stats_.total_time_nd) += cpu_.tau_verify();
  return cpu_.begin_verify(now);
}

std::optional<LocalId> FacilitatedReceiver::pick_from_recv(SimTime now) {
  if (queue_recv_.empty()) return std::nullopt;
  const SimTime slot_len = from_ms(static_cast<double>(params_.slot_len_ms()));
  const SimTime arrival_floor = now - slot_len - from_ms(params_.clock_skew_ms);
  const std::int64_t now_us = now.count();
  std::vector<LocalId> d;
  std::vector<LocalId> nd;
  for (auto it = queue_recv_.rbegin(); it != queue_recv_.rend(); ++it) {
    const RxBeacon& m = msgs_.at(*it);
    if (m.arrival <= arrival_floor) break;
    if (m.msg().body.timestamp_ms * 1000 + slot_len.count() <= now_us) continue;
    (pcs_.at(m.pcid()).discovered ? d : nd).push_back(*it);
  }
  if (d.empty() && nd.empty()) {
    const LocalId newest = *queue_recv_.rbegin();
    if (now - msgs_.at(newest).arrival > from_ms(params_.t_blife_ms)) {
      expire_sweep(now);
      return std::nullopt;
    }
    return newest;
  }
  const SimTime total = stats_.time_d + stats_.time_nd;
  const double share = total.count() == 0 ? 0.0
                                          : static_cast<double>(stats_.time_d.count()) /
                                                static_cast<double>(total.count());
  const bool pick_d = !d.empty() && (nd.empty() || share <= params_.ratio_d);
  if (!d.empty() && !nd.empty()) {
    (pick_d ? stats_.time_d : stats_.time_nd) += cpu_.tau_verify();
  }
  const auto& set = pick_d ? d : nd;
  return set[rng_.below(set.size())];
}

std::optional<SimTime> FacilitatedReceiver::start_next(SimTime now) {
  if (inflight_ || !cpu_.idle(now)) return std::nullopt;
  while (!queue_check_.empty()) {
    const LocalId id = queue_check_.front();
    queue_check_.pop_front();
    RxBeacon* m = get(id);
    if (m == nullptr || m->q != Queue::kCheck) continue;
    --check_live_;
    m->q = Queue::kNone;
    const bool pc_known = pcs_.at(m->pcid()).discovered;
    if (m->reason == CheckReason::kDiscovery && pc_known && m->verdict == Verdict::kPending) {
      const VerEntry* support = nullptr;
      for (const VerEntry& e : m->ver) {
        if (e.v.kind == VerifierKind::kCoop && e.v.validity && e.carrier_definitive) {
          support = &e;
          break;
        }
      }
      if (support != nullptr && !rng_.bernoulli(params_.pr_check)) {
        ++stats_.shortcut_accepts;
        AcceptInfo info{VerifierKind::kCoop, support->v.source_pcid, support->carrier};
        info.from_check = true;
        accept(*m, info, support->carrier_id, now);
        continue;
      }
    }
    return begin(*m, pc_known, now);
  }
  const auto pick = pick_from_recv(now);
  if (!pick) return std::nullopt;
  RxBeacon& m = msgs_.at(*pick);
  queue_recv_.erase(m.id);
  m.q = Queue::kNone;
  return begin(m, pcs_.at(m.pcid()).discovered, now);
}

void FacilitatedReceiver::complete(SimTime now) {
  if (!inflight_) return;
  const LocalId id = *inflight_;
  inflight_.reset();
  RxBeacon* m = get(id);
  if (m == nullptr) return;
  m->q = Queue::kNone;
  const BeaconBody& b = m->msg().body;
  const bool valid = directory_.verify(b.pcid, encode_body(b), m->msg().signature);
  obs_.on_signature_checked(*m->f, valid, now);
  if (valid) {
    set_definitive(*m, true, Verifier{std::nullopt, std::nullopt, true, VerifierKind::kSig}, now);
    AcceptInfo info = accepted_as(VerifierKind::kSig);
    info.from_check = m->reason != CheckReason::kNone;
    accept(*m, info, std::nullopt, now);
    PcEntry& pe = pcs_.at(b.pcid);
    if (!pe.discovered) discover(pe, *m, now);
    note_verified(*m, true);
    cascade(id, VerifierKind::kSig, now);
  } else {
    set_definitive(*m, false, Verifier{std::nullopt, std::nullopt, false, VerifierKind::kSig}, now);
    reject(*m, now);
    if (pcs_.at(b.pcid).discovered && m->chain_ok) note_verified(*m, false);
  }
}

std::size_t FacilitatedReceiver::expire_sweep(SimTime now) {
  const SimTime cutoff = now - from_ms(params_.t_blife_ms);
  std::size_t expired = 0;
  for (auto it = msgs_.begin(); it != msgs_.end() && it->second.arrival < cutoff;) {
    RxBeacon& m = it->second;
    ++it;
    if (m.q == Queue::kInflight) continue;
    Outcome o = Outcome::kExpired;
    if (m.verdict == Verdict::kAccepted) {
      o = Outcome::kAccepted;
    } else if (m.verdict == Verdict::kRejected) {
      o = Outcome::kRejected;
    } else {
      ++expired;
    }
    obs_.on_settled(*m.f, m.arrival, o, now);
    erase(m.id);
  }
  return expired;
}

void FacilitatedReceiver::finish(SimTime now) {
  for (auto& [id, m] : msgs_) {
    Outcome o = now - m.arrival > from_ms(params_.t_blife_ms) ? Outcome::kExpired : Outcome::kPendingAtEnd;
    if (m.verdict == Verdict::kAccepted) o = Outcome::kAccepted;
    if (m.verdict == Verdict::kRejected) o = Outcome::kRejected;
    obs_.on_settled(*m.f, m.arrival, o, now);
  }
  msgs_.clear();
  queue_recv_.clear();
  queue_check_.clear();
  check_live_ = 0;
  pcs_.clear();
  inflight_.reset();
}

bool FacilitatedReceiver::audit_provenance() const {
  for (std::size_t i = 0; i < provenance_.size(); ++i) {
    std::size_t cur = i;
    while (provenance_[cur].kind != VerifierKind::kSig) {
      const auto parent = provenance_[cur].parent;
      if (!parent || *parent >= cur) return false;
      if (!is_definitive(provenance_[*parent].kind)) return false;
      cur = *parent;
    }
  }
  return true;
}

// --- baselines --------------------------------------------------------------

BaselineReceiver::BaselineReceiver(Order order, const ProtocolParams& params,
                                   PseudonymDirectory& directory, CpuModel& cpu,
                                   ReceiverObserver& observer, EventObserver* events)
    : order_(order), params_(params), directory_(directory), cpu_(cpu), obs_(observer), ev_obs_(events) {}

bool BaselineReceiver::expired(const Item& it, SimTime now) const {
  if (it.ev) {
    return now > from_ms(static_cast<double>(it.ev->ev.created_at_ms + it.ev->ev.lifetime_ms));
  }
  return now - it.arrival > from_ms(params_.t_blife_ms);
}

void BaselineReceiver::settle_expired(const Item& it, SimTime now) {
  if (it.ev) {
    ++event_stats_.expired;
    if (ev_obs_ != nullptr) ev_obs_->on_event_dropped(*it.ev, EventDrop::kExpired, now);
  } else {
    obs_.on_settled(*it.f, it.arrival, Outcome::kExpired, now);
  }
}

void BaselineReceiver::on_receive(BeaconPtr frame, SimTime now) {
  ++stats_.received;
  ++stats_.queued;
  obs_.on_received(*frame, now);
  queue_.push_back(Item{std::move(frame), nullptr, now});
}

void BaselineReceiver::on_receive_event(EventPtr frame, SimTime now) {
  ++event_stats_.received;
  if (ev_obs_ != nullptr) ev_obs_->on_event_received(*frame, now);
  // Byte-identical copies of an event already queued or verified are skipped.
  if (events_seen_.contains(frame->digest)) {
    ++event_stats_.duplicates;
    if (ev_obs_ != nullptr) ev_obs_->on_event_dropped(*frame, EventDrop::kDuplicate, now);
    return;
  }
  events_seen_.insert(frame->digest);
  queue_.push_back(Item{nullptr, std::move(frame), now});
}

std::optional<SimTime> BaselineReceiver::start_next(SimTime now) {
  if (inflight_ || !cpu_.idle(now)) return std::nullopt;
  while (!queue_.empty()) {
    Item it;
    if (order_ == Order::kFcfs) {
      it = std::move(queue_.front());
      queue_.pop_front();
    } else {
      it = std::move(queue_.back());
      queue_.pop_back();
    }
    if (expired(it, now)) {
      settle_expired(it, now);
      continue;
    }
    if (it.ev) {
      ++event_stats_.verifications;
    } else {
      ++stats_.verifications;
      (discovered_.contains(it.f->msg.body.pcid) ? stats_.total_time_d : stats_.total_time_nd) +=
          cpu_.tau_verify();
    }
    inflight_ = std::move(it);
    return cpu_.begin_verify(now);
  }
  return std::nullopt;
}

void BaselineReceiver::complete(SimTime now) {
  if (!inflight_) return;
  Item it = std::move(*inflight_);
  inflight_.reset();
  if (it.ev) {
    const bool valid = directory_.verify(it.ev->ev.pc, event_signed_bytes(it.ev->ev), it.ev->ev.signature);
    if (ev_obs_ != nullptr) ev_obs_->on_event_verified(*it.ev, valid, now);
    if (valid) {
      ++event_stats_.accepted;
      if (ev_obs_ != nullptr) ev_obs_->on_event_accepted(*it.ev, it.arrival, now);
    } else {
      ++event_stats_.rejected;
    }
    return;
  }
  const BeaconBody& b = it.f->msg.body;
  const bool valid = directory_.verify(b.pcid, encode_body(b), it.f->msg.signature);
  obs_.on_signature_checked(*it.f, valid, now);
  if (valid) {
    if (discovered_.insert(b.pcid).second) obs_.on_discovered(b.pcid, now);
    obs_.on_accepted(*it.f, it.arrival, now, accepted_as(VerifierKind::kSig));
    if (it.f->truth.forged_pc) ++stats_.phantom_accepts;
    obs_.on_settled(*it.f, it.arrival, Outcome::kAccepted, now);
  } else {
    obs_.on_settled(*it.f, it.arrival, Outcome::kRejected, now);
  }
}

std::size_t BaselineReceiver::expire_sweep(SimTime now) {
  std::size_t n = 0;
  // Beacons in arrival order: expired ones form a prefix (events may sit among them).
  while (!queue_.empty() && expired(queue_.front(), now)) {
    settle_expired(queue_.front(), now);
    if (!queue_.front().ev) ++n;
    queue_.pop_front();
  }
  return n;
}

void BaselineReceiver::finish(SimTime now) {
  for (const Item& it : queue_) {
    if (it.f) obs_.on_settled(*it.f, it.arrival, expired(it, now) ? Outcome::kExpired : Outcome::kPendingAtEnd, now);
  }
  if (inflight_ && inflight_->f) {
    obs_.on_settled(*inflight_->f, inflight_->arrival, Outcome::kPendingAtEnd, now);
  }
  queue_.clear();
  inflight_.reset();
}

}  // namespace vbeacon
