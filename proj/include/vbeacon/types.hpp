// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace vbeacon {

/// Simulated time. Integer microseconds keep event ordering exact.
using SimTime = std::chrono::microseconds;

inline SimTime from_ms(double ms) {
  return SimTime{static_cast<std::int64_t>(std::llround(ms * 1000.0))};
}
inline double to_ms(SimTime t) { return static_cast<double>(t.count()) / 1000.0; }

inline constexpr std::size_t kDigestSize = 20;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kPublicKeySize = 65;  // uncompressed P-256 point
inline constexpr std::size_t kSecretSize = 32;

using Digest = std::array<std::uint8_t, kDigestSize>;
using Signature = std::array<std::uint8_t, kSignatureSize>;
using PublicKey = std::array<std::uint8_t, kPublicKeySize>;
using Secret = std::array<std::uint8_t, kSecretSize>;

/// Pseudonym identifier: first four bytes of the hash of the public key.
struct Pcid {
  std::uint32_t value = 0;
  auto operator<=>(const Pcid&) const = default;
};

enum class IssuerTag : std::uint8_t { kForged = 0x00, kAuthentic = 0xA5 };

/// Short-term pseudonymous credential as seen by receivers.
struct Pseudonym {
  Pcid pcid;
  PublicKey public_key{};
  std::int64_t valid_from_ms = 0;
  std::int64_t valid_to_ms = 0;
  IssuerTag issuer = IssuerTag::kAuthentic;

  bool operator==(const Pseudonym&) const = default;
};

/// Vehicle status block carried by every beacon.
struct Status {
  float x_m = 0.0F;
  float y_m = 0.0F;
  float speed_mps = 0.0F;
  float heading_rad = 0.0F;

  bool operator==(const Status&) const = default;
};

enum class FacilitatorKind : std::uint8_t { kCoop, kSelf, kEvent, kEvidence };

/// Beacon-carried verification hint. Which fields are meaningful depends on
/// the kind: COOP uses all of them, SELF uses bid and digest, EVENT and
/// EVIDENCE use the digest only.
struct Facilitator {
  FacilitatorKind kind = FacilitatorKind::kSelf;
  Pcid pcid;
  std::uint32_t bid = 0;
  bool validity = true;
  Digest digest{};

  static Facilitator coop(Pcid pcid, std::uint32_t bid, bool validity, const Digest& digest) {
    return {FacilitatorKind::kCoop, pcid, bid, validity, digest};
  }
  static Facilitator self(std::uint32_t bid, const Digest& digest) {
    return {FacilitatorKind::kSelf, Pcid{}, bid, true, digest};
  }
  static Facilitator event(const Digest& digest) {
    return {FacilitatorKind::kEvent, Pcid{}, 0, true, digest};
  }
  static Facilitator evidence(const Digest& digest) {
    return {FacilitatorKind::kEvidence, Pcid{}, 0, true, digest};
  }

  bool operator==(const Facilitator&) const = default;
};

struct BeaconBody {
  Status status;
  Pcid pcid;
  std::uint32_t bid = 0;
  std::int64_t timestamp_ms = 0;
  Digest disclosed_key{};
  std::vector<Facilitator> facilitators;

  bool operator==(const BeaconBody&) const = default;
};

/// A broadcast beacon: signed body plus its one-time-key MAC.
struct Message {
  BeaconBody body;
  Signature signature{};
  Digest mac{};

  bool operator==(const Message&) const = default;
};

enum class VerifierKind : std::uint8_t { kSig, kSelf, kCoop, kMac };

inline bool is_definitive(VerifierKind kind) {
  return kind == VerifierKind::kSig || kind == VerifierKind::kSelf;
}

/// Validity attestation accumulated for a received beacon.
struct Verifier {
  std::optional<Pcid> source_pcid;
  std::optional<std::uint32_t> source_bid;
  bool validity = true;
  VerifierKind kind = VerifierKind::kSig;

  bool operator==(const Verifier&) const = default;
};

enum class EventKind : std::uint8_t { kDenm = 1, kEvidence = 2 };

struct EventMessage {
  std::uint64_t event_id = 0;
  EventKind kind = EventKind::kDenm;
  std::int64_t created_at_ms = 0;
  std::int64_t lifetime_ms = 0;
  std::vector<std::uint8_t> body;
  Pseudonym pc;
  Signature signature{};

  bool operator==(const EventMessage&) const = default;
};

}  // namespace vbeacon

template <>
struct std::hash<vbeacon::Pcid> {
  std::size_t operator()(const vbeacon::Pcid& p) const noexcept {
    return std::hash<std::uint32_t>{}(p.value);
  }
};
