// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/events.hpp"

#include "vbeacon/codec.hpp"

namespace vbeacon {

void FacilitatorCache::insert(const Digest& d, EventKind kind, Pcid source, SimTime now) {
  if (capacity_ == 0) return;
  auto it = map_.find(d);
  if (it != map_.end()) {
    it->second.e = Entry{source, kind, now + ttl_};
    lru_.splice(lru_.begin(), lru_, it->second.pos);
    return;
  }
  while (map_.size() >= capacity_) {
    map_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(d);
  map_.emplace(d, Slot{Entry{source, kind, now + ttl_}, lru_.begin()});
}

std::optional<FacilitatorCache::Entry> FacilitatorCache::lookup(const Digest& d, SimTime now) {
  auto it = map_.find(d);
  if (it == map_.end()) return std::nullopt;
  if (it->second.e.expires < now) {
    lru_.erase(it->second.pos);
    map_.erase(it);
    return std::nullopt;
  }
  lru_.splice(lru_.begin(), lru_, it->second.pos);
  return it->second.e;
}

// --- evidence ---------------------------------------------------------------

std::vector<std::uint8_t> encode_evidence(const Message& bogus, const Message& validating) {
  std::vector<std::uint8_t> out;
  for (const Message* m : {&bogus, &validating}) {
    const auto bytes = encode_message(*m);
    out.push_back(static_cast<std::uint8_t>(bytes.size() & 0xFF));
    out.push_back(static_cast<std::uint8_t>(bytes.size() >> 8));
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

std::optional<EvidencePair> decode_evidence(std::span<const std::uint8_t> body) {
  Message parts[2];
  std::size_t pos = 0;
  for (Message& m : parts) {
    if (body.size() < pos + 2) return std::nullopt;
    const std::size_t len = body[pos] | (static_cast<std::size_t>(body[pos + 1]) << 8);
    pos += 2;
    if (body.size() < pos + len) return std::nullopt;
    try {
      m = decode_message(body.subspan(pos, len));
    } catch (const CodecError&) {
      return std::nullopt;
    }
    pos += len;
  }
  if (pos != body.size()) return std::nullopt;
  return EvidencePair{std::move(parts[0]), std::move(parts[1])};
}

const Facilitator* vouching_facilitator(const EvidencePair& p) {
  const Digest d = beacon_digest(p.bogus.body, p.bogus.signature);
  for (const Facilitator& f : p.validating.body.facilitators) {
    if (f.kind == FacilitatorKind::kCoop && f.validity && f.pcid == p.bogus.body.pcid &&
        f.bid == p.bogus.body.bid && f.digest == d) {
      return &f;
    }
  }
  return nullptr;
}

EventCheck check_event(PseudonymDirectory& directory, const EventMessage& ev) {
  EventCheck r;
  const bool outer = directory.verify(ev.pc, event_signed_bytes(ev), ev.signature);
  if (ev.kind != EventKind::kEvidence) {
    r.valid = outer;
    return r;
  }
  const auto pair = decode_evidence(ev.body);
  if (!pair) return r;
  const Message& v = pair->validating;
  const Message& b = pair->bogus;
  // Both inner signatures are always replayed; the cost was booked up front.
  const bool validating_signed = directory.verify(v.body.pcid, encode_body(v.body), v.signature);
  const bool bogus_signed = directory.verify(b.body.pcid, encode_body(b.body), b.signature);
  if (outer && validating_signed && !bogus_signed && vouching_facilitator(*pair) != nullptr) {
    r.valid = true;
    r.revoke = v.body.pcid;
  }
  return r;
}

// --- processor --------------------------------------------------------------

EventProcessor::EventProcessor(const ProtocolParams& params, PseudonymDirectory& directory,
                               CpuModel& cpu, EventObserver& observer, RevokeFn revoke)
    : params_(params),
      directory_(directory),
      cpu_(cpu),
      obs_(observer),
      revoke_(std::move(revoke)),
      cache_(from_ms(params.facilitator_ttl_ms),
             static_cast<std::size_t>(std::max(params.facilitator_cache_capacity, 0))) {}

bool EventProcessor::expired(const EventMessage& ev, SimTime now) const {
  return now > from_ms(static_cast<double>(ev.created_at_ms + ev.lifetime_ms));
}

void EventProcessor::on_beacon_accepted(const BeaconFrame& f, SimTime now) {
  for (const Facilitator& fac : f.msg.body.facilitators) {
    if (fac.kind == FacilitatorKind::kEvent) {
      cache_.insert(fac.digest, EventKind::kDenm, f.msg.body.pcid, now);
    } else if (fac.kind == FacilitatorKind::kEvidence) {
      cache_.insert(fac.digest, EventKind::kEvidence, f.msg.body.pcid, now);
    }
  }
}

void EventProcessor::forget_stale(SimTime now) {
  if (now < next_forget_) return;
  std::erase_if(seen_, [now](const auto& kv) { return kv.second < now; });
  next_forget_ = now + from_ms(1000);
}

void EventProcessor::on_receive(EventPtr f, SimTime now) {
  ++stats_.received;
  obs_.on_event_received(*f, now);
  const EventMessage& ev = f->ev;
  if (expired(ev, now)) {
    ++stats_.expired;
    obs_.on_event_dropped(*f, EventDrop::kExpired, now);
    return;
  }
  const auto hit = cache_.lookup(f->digest, now);
  if (!hit || hit->kind != ev.kind || hit->source != ev.pc.pcid) {
    ++stats_.unmatched;
    obs_.on_event_dropped(*f, EventDrop::kUnmatched, now);
    return;
  }
  forget_stale(now);
  const SimTime forget_at = from_ms(static_cast<double>(ev.created_at_ms + ev.lifetime_ms));
  if (!seen_.emplace(f->digest, forget_at).second) {
    ++stats_.duplicates;
    obs_.on_event_dropped(*f, EventDrop::kDuplicate, now);
    return;
  }
  queue_.push_back(Item{std::move(f), now});
}

std::optional<SimTime> EventProcessor::start_next(SimTime now) {
  if (inflight_ || !cpu_.idle(now)) return std::nullopt;
  while (!queue_.empty()) {
    Item it = std::move(queue_.front());
    queue_.pop_front();
    if (expired(it.f->ev, now)) {
      ++stats_.expired;
      obs_.on_event_dropped(*it.f, EventDrop::kExpired, now);
      continue;
    }
    SimTime done = now;
    const int n = event_verify_count(it.f->ev);
    for (int i = 0; i < n; ++i) done = cpu_.begin_verify(now);
    stats_.verifications += static_cast<std::uint64_t>(n);
    inflight_ = std::move(it);
    return done;
  }
  return std::nullopt;
}

void EventProcessor::complete(SimTime now) {
  if (!inflight_) return;
  Item it = std::move(*inflight_);
  inflight_.reset();
  const EventCheck r = check_event(directory_, it.f->ev);
  obs_.on_event_verified(*it.f, r.valid, now);
  if (!r.valid) {
    ++stats_.rejected;
    if (it.f->ev.kind == EventKind::kEvidence) obs_.on_evidence_rejected(*it.f, it.f->ev.pc.pcid, now);
    return;
  }
  ++stats_.accepted;
  obs_.on_event_accepted(*it.f, it.arrival, now);
  if (r.revoke) {
    if (revoke_) revoke_(*r.revoke, now);
    obs_.on_evidence_accepted(*it.f, *r.revoke, now);
  }
}

}  // namespace vbeacon
