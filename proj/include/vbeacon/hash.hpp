// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

#include "vbeacon/types.hpp"

namespace vbeacon {

/// One-byte prefixes separating the roles a single hash function plays.
enum class HashDomain : std::uint8_t {
  kChain = 0x01,   // key-chain step
  kMacKey = 0x02,  // derive a MAC key from a chain element
  kMac = 0x03,     // keyed MAC over a signed beacon
  kDigest = 0x04,  // message digest referenced by facilitators
  kAux = 0x05,     // everything else (seeds, simulated signatures, pcids)
};

/// SHA-256 over `domain || parts...`, truncated to 20 bytes.
Digest hash20(HashDomain domain, std::initializer_list<std::span<const std::uint8_t>> parts);

inline Digest hash20(HashDomain domain, std::span<const std::uint8_t> data) {
  return hash20(domain, {data});
}

/// Full 32-byte SHA-256 over `domain || parts...`.
std::array<std::uint8_t, 32> hash32(HashDomain domain,
                                    std::initializer_list<std::span<const std::uint8_t>> parts);

}  // namespace vbeacon
