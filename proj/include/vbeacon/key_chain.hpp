// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vbeacon/types.hpp"

namespace vbeacon {

/// Global slot index. All chains share the same slot grid so a receiver can
/// derive the slot gap between two beacons from their timestamps alone.
inline std::int64_t slot_of(std::int64_t t_ms, std::int64_t slot_len_ms) {
  return t_ms >= 0 ? t_ms / slot_len_ms : -((-t_ms + slot_len_ms - 1) / slot_len_ms);
}

Digest chain_step(const Digest& k);
Digest mac_key(const Digest& chain_key);
Digest compute_mac(const Digest& mac_key, const BeaconBody& body, const Signature& signature);

class KeyChain {
 public:
  KeyChain() = default;

  /// keys_[L] = H(seed), keys_[j] = chain_step(keys_[j+1]).
  static KeyChain generate(const Secret& seed, Pcid pcid, std::size_t length,
                           std::int64_t slot0_time_ms, std::int64_t slot_len_ms);

  Pcid pcid() const { return pcid_; }
  std::size_t length() const { return keys_.empty() ? 0 : keys_.size() - 1; }
  std::int64_t base_slot() const { return base_slot_; }
  std::int64_t slot_len_ms() const { return slot_len_ms_; }
  std::size_t storage_bytes() const { return length() * kDigestSize; }

  bool covers_slot(std::int64_t slot) const {
    return slot >= base_slot_ && slot - base_slot_ <= static_cast<std::int64_t>(length());
  }
  /// Key for a global slot; throws std::out_of_range past either end.
  const Digest& key_for_slot(std::int64_t slot) const;
  const Digest& key(std::size_t j) const { return keys_.at(j); }

 private:
  Pcid pcid_;
  std::int64_t base_slot_ = 0;
  std::int64_t slot_len_ms_ = 100;
  std::vector<Digest> keys_;
};

enum class ChainCheck { kMatch, kMismatch, kGapTooLarge };

struct ChainCheckResult {
  ChainCheck verdict = ChainCheck::kMismatch;
  std::uint32_t hashes = 0;  // chain steps actually computed
  bool ok() const { return verdict == ChainCheck::kMatch; }
};

/// True iff `gap` chain steps applied to `k_new` yield `k_old`.
ChainCheckResult chain_check(const Digest& k_new, const Digest& k_old, std::int64_t gap,
                             std::int64_t max_gap);

/// Applies `steps` chain steps.
Digest chain_walk(Digest k, std::int64_t steps);

}  // namespace vbeacon
