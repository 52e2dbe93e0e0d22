// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/key_chain.hpp"

#include "vbeacon/codec.hpp"
#include "vbeacon/hash.hpp"

namespace vbeacon {

Digest chain_step(const Digest& k) { return hash20(HashDomain::kChain, k); }

Digest mac_key(const Digest& chain_key) { return hash20(HashDomain::kMacKey, chain_key); }

Digest compute_mac(const Digest& key, const BeaconBody& body, const Signature& signature) {
  const auto enc = encode_body(body);
  return hash20(HashDomain::kMac, {key, enc, signature});
}

KeyChain KeyChain::generate(const Secret& seed, Pcid pcid, std::size_t length,
                            std::int64_t slot0_time_ms, std::int64_t slot_len_ms) {
  if (length == 0) throw std::invalid_argument("key chain length must be >= 1");
  if (slot_len_ms <= 0) throw std::invalid_argument("slot length must be positive");
  KeyChain c;
  c.pcid_ = pcid;
  c.slot_len_ms_ = slot_len_ms;
  c.base_slot_ = slot_of(slot0_time_ms, slot_len_ms);
  c.keys_.resize(length + 1);
  c.keys_[length] = hash20(HashDomain::kAux, seed);
  for (std::size_t j = length; j-- > 0;) c.keys_[j] = chain_step(c.keys_[j + 1]);
  return c;
}

const Digest& KeyChain::key_for_slot(std::int64_t slot) const {
  if (!covers_slot(slot)) throw std::out_of_range("slot outside key chain");
  return keys_[static_cast<std::size_t>(slot - base_slot_)];
}

ChainCheckResult chain_check(const Digest& k_new, const Digest& k_old, std::int64_t gap,
                             std::int64_t max_gap) {
  ChainCheckResult r;
  if (gap < 0 || gap > max_gap) {
    r.verdict = ChainCheck::kGapTooLarge;
    return r;
  }
  Digest k = k_new;
  for (std::int64_t i = 0; i < gap; ++i) k = chain_step(k);
  r.hashes = static_cast<std::uint32_t>(gap);
  r.verdict = k == k_old ? ChainCheck::kMatch : ChainCheck::kMismatch;
  return r;
}

Digest chain_walk(Digest k, std::int64_t steps) {
  for (std::int64_t i = 0; i < steps; ++i) k = chain_step(k);
  return k;
}

}  // namespace vbeacon
