// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/codec.hpp"

#include <algorithm>
#include <bit>

#include "vbeacon/hash.hpp"

namespace vbeacon {
namespace {

constexpr std::uint8_t kTagCoopPos = 0x01;
constexpr std::uint8_t kTagCoopNeg = 0x02;
constexpr std::uint8_t kTagSelf = 0x03;
constexpr std::uint8_t kTagEvent = 0x04;
constexpr std::uint8_t kTagEvidence = 0x05;

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void zeros(std::size_t n) { out_.insert(out_.end(), n, 0); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  template <std::size_t N>
  std::array<std::uint8_t, N> arr() {
    std::array<std::uint8_t, N> a{};
    auto s = take(N);
    std::copy(s.begin(), s.end(), a.begin());
    return a;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > in_.size()) throw CodecError("truncated frame");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::uint64_t le(int n) {
    auto s = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_facilitator(Writer& w, const Facilitator& f) {
  switch (f.kind) {
    case FacilitatorKind::kCoop:
      w.u8(f.validity ? kTagCoopPos : kTagCoopNeg);
      w.u32(f.pcid.value);
      w.u32(f.bid);
      break;
    case FacilitatorKind::kSelf:
      w.u8(kTagSelf);
      w.u32(f.bid);
      break;
    case FacilitatorKind::kEvent:
      w.u8(kTagEvent);
      break;
    case FacilitatorKind::kEvidence:
      w.u8(kTagEvidence);
      break;
  }
  w.bytes(f.digest);
}

Facilitator read_facilitator(Reader& r) {
  const std::uint8_t tag = r.u8();
  Facilitator f;
  switch (tag) {
    case kTagCoopPos:
    case kTagCoopNeg:
      f.kind = FacilitatorKind::kCoop;
      f.validity = tag == kTagCoopPos;
      f.pcid = Pcid{r.u32()};
      f.bid = r.u32();
      break;
    case kTagSelf:
      f.kind = FacilitatorKind::kSelf;
      f.bid = r.u32();
      break;
    case kTagEvent:
      f.kind = FacilitatorKind::kEvent;
      break;
    case kTagEvidence:
      f.kind = FacilitatorKind::kEvidence;
      break;
    default:
      throw CodecError("unknown facilitator tag");
  }
  f.digest = r.arr<kDigestSize>();
  return f;
}

void write_body(Writer& w, const BeaconBody& body, const CodecLimits& limits) {
  if (body.facilitators.size() > std::min(limits.max_facilitators, kMaxFacilitators)) {
    throw CodecError("facilitator overflow");
  }
  w.u8(static_cast<std::uint8_t>((static_cast<unsigned>(FrameKind::kBeacon) << 6) |
                                 body.facilitators.size()));
  w.u32(body.pcid.value);
  w.f32(body.status.x_m);
  w.f32(body.status.y_m);
  w.f32(body.status.speed_mps);
  w.f32(body.status.heading_rad);
  w.u32(body.bid);
  w.i64(body.timestamp_ms);
  w.bytes(body.disclosed_key);
  for (const auto& f : body.facilitators) write_facilitator(w, f);
}

void pad(std::vector<std::uint8_t>& out, std::size_t padded_size) {
  if (out.size() < padded_size) out.resize(padded_size, 0);
}

}  // namespace

std::size_t facilitator_wire_size(FacilitatorKind kind) {
  switch (kind) {
    case FacilitatorKind::kCoop:
      return 1 + 4 + 4 + kDigestSize;
    case FacilitatorKind::kSelf:
      return 1 + 4 + kDigestSize;
    case FacilitatorKind::kEvent:
    case FacilitatorKind::kEvidence:
      return 1 + kDigestSize;
  }
  return 0;
}

std::vector<std::uint8_t> encode_body(const BeaconBody& body, const CodecLimits& limits) {
  std::vector<std::uint8_t> out;
  out.reserve(kDefaultFrameSize);
  Writer w(out);
  write_body(w, body, limits);
  return out;
}

std::size_t structural_size(const Message& msg) {
  std::size_t n = kBeaconHeaderSize + kSignatureSize + kDigestSize;
  for (const auto& f : msg.body.facilitators) n += facilitator_wire_size(f.kind);
  return n;
}

std::vector<std::uint8_t> encode_message(const Message& msg, const CodecLimits& limits) {
  std::vector<std::uint8_t> out;
  out.reserve(kDefaultFrameSize);
  Writer w(out);
  write_body(w, msg.body, limits);
  w.bytes(msg.signature);
  w.bytes(msg.mac);
  pad(out, limits.padded_size);
  return out;
}

Message decode_message(std::span<const std::uint8_t> bytes, const CodecLimits& limits) {
  Reader r(bytes);
  const std::uint8_t header = r.u8();
  if ((header >> 6) != static_cast<unsigned>(FrameKind::kBeacon)) throw CodecError("not a beacon frame");
  const std::size_t count = header & 0x3F;
  if (count > limits.max_facilitators) throw CodecError("facilitator overflow");
  Message m;
  m.body.pcid = Pcid{r.u32()};
  m.body.status.x_m = r.f32();
  m.body.status.y_m = r.f32();
  m.body.status.speed_mps = r.f32();
  m.body.status.heading_rad = r.f32();
  m.body.bid = r.u32();
  m.body.timestamp_ms = r.i64();
  m.body.disclosed_key = r.arr<kDigestSize>();
  m.body.facilitators.reserve(count);
  for (std::size_t i = 0; i < count; ++i) m.body.facilitators.push_back(read_facilitator(r));
  m.signature = r.arr<kSignatureSize>();
  m.mac = r.arr<kDigestSize>();
  return m;
}

Digest beacon_digest(const BeaconBody& body, const Signature& signature) {
  const auto enc = encode_body(body);
  return hash20(HashDomain::kDigest, {enc, signature});
}

std::vector<std::uint8_t> encode_pseudonym(const Pseudonym& pc) {
  std::vector<std::uint8_t> out;
  out.reserve(kPseudonymBlobSize);
  Writer w(out);
  w.u32(pc.pcid.value);
  w.i64(pc.valid_from_ms);
  w.i64(pc.valid_to_ms);
  w.u8(static_cast<std::uint8_t>(pc.issuer));
  w.bytes(pc.public_key);
  w.zeros(kPseudonymBlobSize - out.size());
  return out;
}

Pseudonym decode_pseudonym(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPseudonymBlobSize) throw CodecError("truncated pseudonym");
  Reader r(bytes);
  Pseudonym pc;
  pc.pcid = Pcid{r.u32()};
  pc.valid_from_ms = r.i64();
  pc.valid_to_ms = r.i64();
  const std::uint8_t issuer = r.u8();
  if (issuer != static_cast<std::uint8_t>(IssuerTag::kAuthentic) &&
      issuer != static_cast<std::uint8_t>(IssuerTag::kForged)) {
    throw CodecError("unknown issuer tag");
  }
  pc.issuer = static_cast<IssuerTag>(issuer);
  pc.public_key = r.arr<kPublicKeySize>();
  return pc;
}

std::vector<std::uint8_t> event_signed_bytes(const EventMessage& ev) {
  if (ev.body.size() > 0xFFFF) throw CodecError("event body too large");
  std::vector<std::uint8_t> out;
  out.reserve(kDefaultFrameSize);
  Writer w(out);
  w.u8(static_cast<std::uint8_t>((static_cast<unsigned>(FrameKind::kEvent) << 6) |
                                 static_cast<unsigned>(ev.kind)));
  w.u64(ev.event_id);
  w.i64(ev.created_at_ms);
  w.i64(ev.lifetime_ms);
  w.u16(static_cast<std::uint16_t>(ev.body.size()));
  w.bytes(ev.body);
  w.bytes(encode_pseudonym(ev.pc));
  return out;
}

std::size_t event_structural_size(const EventMessage& ev) {
  return 1 + 8 + 8 + 8 + 2 + ev.body.size() + kPseudonymBlobSize + kSignatureSize;
}

std::vector<std::uint8_t> encode_event(const EventMessage& ev, const CodecLimits& limits) {
  auto out = event_signed_bytes(ev);
  out.insert(out.end(), ev.signature.begin(), ev.signature.end());
  pad(out, limits.padded_size);
  return out;
}

EventMessage decode_event(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint8_t header = r.u8();
  if ((header >> 6) != static_cast<unsigned>(FrameKind::kEvent)) throw CodecError("not an event frame");
  const unsigned kind = header & 0x3F;
  if (kind != static_cast<unsigned>(EventKind::kDenm) &&
      kind != static_cast<unsigned>(EventKind::kEvidence)) {
    throw CodecError("unknown event kind");
  }
  EventMessage ev;
  ev.kind = static_cast<EventKind>(kind);
  ev.event_id = r.u64();
  ev.created_at_ms = r.i64();
  ev.lifetime_ms = r.i64();
  const std::uint16_t len = r.u16();
  auto body = r.take(len);
  ev.body.assign(body.begin(), body.end());
  ev.pc = decode_pseudonym(r.take(kPseudonymBlobSize));
  ev.signature = r.arr<kSignatureSize>();
  return ev;
}

Digest event_digest(const EventMessage& ev) {
  const auto enc = event_signed_bytes(ev);
  return hash20(HashDomain::kDigest, {enc, ev.signature});
}

FrameKind peek_frame_kind(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw CodecError("empty frame");
  const unsigned k = bytes[0] >> 6;
  if (k == static_cast<unsigned>(FrameKind::kBeacon)) return FrameKind::kBeacon;
  if (k == static_cast<unsigned>(FrameKind::kEvent)) return FrameKind::kEvent;
  throw CodecError("unknown frame kind");
}

}  // namespace vbeacon
