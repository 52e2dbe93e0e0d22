// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>

#include "vbeacon/types.hpp"

namespace vbeacon {

enum class CryptoMode { kSimulated, kReal };

std::string_view to_string(CryptoMode mode);
CryptoMode crypto_mode_from_string(std::string_view s);

/// Key material held by the pseudonym owner.
struct Credential {
  Pseudonym pc;
  Secret secret{};
};

Pcid pcid_of(const PublicKey& pk);

class SignatureBackend {
 public:
  virtual ~SignatureBackend() = default;

  virtual CryptoMode mode() const = 0;
  /// Derives a key pair from `seed`. Deterministic per seed.
  virtual Credential make_credential(const Secret& seed, std::int64_t valid_from_ms,
                                     std::int64_t valid_to_ms) = 0;
  virtual Signature sign(const Credential& cred, std::span<const std::uint8_t> bytes) = 0;
  /// Counts every call, valid or not.
  bool verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes, const Signature& sig) {
    ++verify_calls_;
    return do_verify(pc, bytes, sig);
  }
  std::uint64_t verify_calls() const { return verify_calls_; }

 protected:
  virtual bool do_verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes,
                         const Signature& sig) = 0;

 private:
  std::uint64_t verify_calls_ = 0;
};

/// Signature = keyed hash under the credential secret. Verification looks the
/// secret up by public key, so only the holder can produce a valid signature.
class SimulatedBackend final : public SignatureBackend {
 public:
  CryptoMode mode() const override { return CryptoMode::kSimulated; }
  Credential make_credential(const Secret& seed, std::int64_t valid_from_ms,
                             std::int64_t valid_to_ms) override;
  Signature sign(const Credential& cred, std::span<const std::uint8_t> bytes) override;

 protected:
  bool do_verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes,
                 const Signature& sig) override;

 private:
  std::unordered_map<Pcid, Secret> secrets_;
};

/// ECDSA P-256 over SHA-256, signature encoded as r || s (32 B each).
class EcdsaBackend final : public SignatureBackend {
 public:
  EcdsaBackend();
  ~EcdsaBackend() override;
  EcdsaBackend(const EcdsaBackend&) = delete;
  EcdsaBackend& operator=(const EcdsaBackend&) = delete;

  CryptoMode mode() const override { return CryptoMode::kReal; }
  Credential make_credential(const Secret& seed, std::int64_t valid_from_ms,
                             std::int64_t valid_to_ms) override;
  Signature sign(const Credential& cred, std::span<const std::uint8_t> bytes) override;

  /// Stateless verification against an uncompressed public point.
  static bool verify_raw(const PublicKey& pk, std::span<const std::uint8_t> bytes,
                         const Signature& sig);

 protected:
  bool do_verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes,
                 const Signature& sig) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<SignatureBackend> make_backend(CryptoMode mode);

/// In-model VPKI: issues authentic pseudonyms and resolves pcids.
class PseudonymDirectory {
 public:
  explicit PseudonymDirectory(std::unique_ptr<SignatureBackend> backend)
      : backend_(std::move(backend)) {}

  /// Issues a credential, re-deriving on pcid collision.
  Credential issue(const Secret& seed, std::int64_t valid_from_ms, std::int64_t valid_to_ms);

  const Pseudonym* resolve(Pcid pcid) const {
    auto it = pcs_.find(pcid);
    return it == pcs_.end() ? nullptr : &it->second;
  }
  bool is_authentic(const Pseudonym& pc) const {
    const Pseudonym* known = resolve(pc.pcid);
    return known != nullptr && *known == pc;
  }

  SignatureBackend& backend() { return *backend_; }
  Signature sign(const Credential& cred, std::span<const std::uint8_t> bytes) {
    return backend_->sign(cred, bytes);
  }
  /// Unknown pcids fail (after the verification cost has been spent by the caller).
  bool verify(Pcid pcid, std::span<const std::uint8_t> bytes, const Signature& sig);
  /// Event messages carry the full pseudonym; it must match the issued one.
  bool verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes, const Signature& sig);
  std::uint64_t verify_calls() const { return backend_->verify_calls() + unresolved_calls_; }

 private:
  std::unique_ptr<SignatureBackend> backend_;
  std::uint64_t unresolved_calls_ = 0;
  std::unordered_map<Pcid, Pseudonym> pcs_;
};

}  // namespace vbeacon
