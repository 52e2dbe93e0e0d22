// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

// Deterministic little-endian wire codec.
//
// Beacon frame:
//   header       1   frame kind (high 2 bits) | facilitator count (low 6 bits)
//   pcid         4
//   status      16   x, y, speed, heading as IEEE-754 float32
//   bid          4
//   timestamp    8   ms
//   key         20   disclosed one-time key
//   facilitators     COOP 29 (tag, pcid, bid, digest; validity in the tag),
//                    SELF 25 (tag, bid, digest), EVENT/EVIDENCE 21 (tag, digest)
//   signature   64
//   mac         20
//   zero padding up to the configured frame size (300 B by default)
//
// Event frame:
//   header 1 | event_id 8 | created 8 | lifetime 8 | body_len 2 | body |
//   pseudonym 96 | signature 64 | zero padding
//
// Pseudonym blob (96 B): pcid 4 | valid_from 8 | valid_to 8 | issuer 1 |
//   public key 65 | reserved 10

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbeacon/types.hpp"

namespace vbeacon {

class CodecError : public std::runtime_error {
 public:
  explicit CodecError(const std::string& what) : std::runtime_error(what) {}
};

enum class FrameKind : std::uint8_t { kBeacon = 1, kEvent = 2 };

inline constexpr std::size_t kDefaultFrameSize = 300;
inline constexpr std::size_t kPseudonymBlobSize = 96;
inline constexpr std::size_t kBeaconHeaderSize = 1 + 4 + 16 + 4 + 8 + kDigestSize;
inline constexpr std::size_t kMaxFacilitators = 63;

struct CodecLimits {
  std::size_t max_facilitators = kMaxFacilitators;
  std::size_t padded_size = kDefaultFrameSize;
};

std::size_t facilitator_wire_size(FacilitatorKind kind);

/// Canonical body bytes: the frame layout up to, not including, the signature.
std::vector<std::uint8_t> encode_body(const BeaconBody& body,
                                      const CodecLimits& limits = {});

/// Sum of declared field widths, without padding.
std::size_t structural_size(const Message& msg);

std::vector<std::uint8_t> encode_message(const Message& msg, const CodecLimits& limits = {});
Message decode_message(std::span<const std::uint8_t> bytes, const CodecLimits& limits = {});

/// Encoded (padded) length used for channel accounting.
inline std::size_t encoded_size(const Message& msg, const CodecLimits& limits = {}) {
  const std::size_t s = structural_size(msg);
  return s > limits.padded_size ? s : limits.padded_size;
}

/// Digest over the signed beacon: canonical body followed by the signature.
Digest beacon_digest(const BeaconBody& body, const Signature& signature);

std::vector<std::uint8_t> encode_pseudonym(const Pseudonym& pc);
Pseudonym decode_pseudonym(std::span<const std::uint8_t> bytes);

/// Event bytes covered by the event signature.
std::vector<std::uint8_t> event_signed_bytes(const EventMessage& ev);
std::size_t event_structural_size(const EventMessage& ev);
std::vector<std::uint8_t> encode_event(const EventMessage& ev, const CodecLimits& limits = {});
EventMessage decode_event(std::span<const std::uint8_t> bytes);
inline std::size_t encoded_event_size(const EventMessage& ev, const CodecLimits& limits = {}) {
  const std::size_t s = event_structural_size(ev);
  return s > limits.padded_size ? s : limits.padded_size;
}
Digest event_digest(const EventMessage& ev);

FrameKind peek_frame_kind(std::span<const std::uint8_t> bytes);

}  // namespace vbeacon
