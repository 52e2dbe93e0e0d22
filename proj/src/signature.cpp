// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/signature.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "vbeacon/hash.hpp"

namespace vbeacon {

std::string_view to_string(CryptoMode mode) {
  return mode == CryptoMode::kReal ? "real" : "simulated";
}

CryptoMode crypto_mode_from_string(std::string_view s) {
  if (s == "simulated") return CryptoMode::kSimulated;
  if (s == "real") return CryptoMode::kReal;
  throw std::invalid_argument("unknown crypto backend: " + std::string(s));
}

Pcid pcid_of(const PublicKey& pk) {
  const Digest d = hash20(HashDomain::kAux, pk);
  return Pcid{static_cast<std::uint32_t>(d[0]) | (static_cast<std::uint32_t>(d[1]) << 8) |
              (static_cast<std::uint32_t>(d[2]) << 16) | (static_cast<std::uint32_t>(d[3]) << 24)};
}

// --- simulated -------------------------------------------------------------

namespace {

constexpr std::uint8_t kTagPubX = 'x';
constexpr std::uint8_t kTagPubY = 'y';
constexpr std::uint8_t kTagSigR = 'r';
constexpr std::uint8_t kTagSigS = 's';

Signature keyed_signature(const Secret& secret, std::span<const std::uint8_t> bytes) {
  const std::uint8_t r_tag[] = {kTagSigR};
  const std::uint8_t s_tag[] = {kTagSigS};
  const auto r = hash32(HashDomain::kAux, {r_tag, secret, bytes});
  const auto s = hash32(HashDomain::kAux, {s_tag, secret, bytes});
  Signature sig{};
  std::copy(r.begin(), r.end(), sig.begin());
  std::copy(s.begin(), s.end(), sig.begin() + 32);
  return sig;
}

}  // namespace

Credential SimulatedBackend::make_credential(const Secret& seed, std::int64_t valid_from_ms,
                                             std::int64_t valid_to_ms) {
  Credential c;
  c.secret = hash32(HashDomain::kAux, {seed});
  const std::uint8_t x_tag[] = {kTagPubX};
  const std::uint8_t y_tag[] = {kTagPubY};
  const auto x = hash32(HashDomain::kAux, {x_tag, c.secret});
  const auto y = hash32(HashDomain::kAux, {y_tag, c.secret});
  c.pc.public_key[0] = 0x04;
  std::copy(x.begin(), x.end(), c.pc.public_key.begin() + 1);
  std::copy(y.begin(), y.end(), c.pc.public_key.begin() + 33);
  c.pc.pcid = pcid_of(c.pc.public_key);
  c.pc.valid_from_ms = valid_from_ms;
  c.pc.valid_to_ms = valid_to_ms;
  c.pc.issuer = IssuerTag::kAuthentic;
  secrets_.emplace(c.pc.pcid, c.secret);
  return c;
}

Signature SimulatedBackend::sign(const Credential& cred, std::span<const std::uint8_t> bytes) {
  return keyed_signature(cred.secret, bytes);
}

bool SimulatedBackend::do_verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes,
                                 const Signature& sig) {
  auto it = secrets_.find(pc.pcid);
  if (it == secrets_.end()) return false;
  return keyed_signature(it->second, bytes) == sig;
}

// --- ECDSA P-256 ------------------------------------------------------------

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_free(b); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

[[noreturn]] void ossl_fail(const char* what) {
  throw std::runtime_error(std::string("openssl: ") + what);
}

PkeyPtr pkey_from_params(OSSL_PARAM* params, int selection) {
  EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr);
  if (ctx == nullptr) ossl_fail("EVP_PKEY_CTX_new_from_name");
  EVP_PKEY* pkey = nullptr;
  const bool ok = EVP_PKEY_fromdata_init(ctx) == 1 &&
                  EVP_PKEY_fromdata(ctx, &pkey, selection, params) == 1;
  EVP_PKEY_CTX_free(ctx);
  if (!ok) return nullptr;
  return PkeyPtr(pkey);
}

PkeyPtr public_pkey(const PublicKey& pk) {
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_PKEY_PARAM_GROUP_NAME,
                                       const_cast<char*>("prime256v1"), 0),
      OSSL_PARAM_construct_octet_string(OSSL_PKEY_PARAM_PUB_KEY,
                                        const_cast<std::uint8_t*>(pk.data()), pk.size()),
      OSSL_PARAM_construct_end()};
  return pkey_from_params(params, EVP_PKEY_PUBLIC_KEY);
}

/// Private scalar in [1, n-1] derived from the seed, plus its public point.
std::pair<PkeyPtr, PublicKey> keypair_from_seed(const Secret& seed) {
  EC_GROUP* group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
  if (group == nullptr) ossl_fail("EC_GROUP_new_by_curve_name");
  BN_CTX* bn_ctx = BN_CTX_new();
  const auto h = hash32(HashDomain::kAux, {seed});
  BnPtr priv(BN_bin2bn(h.data(), static_cast<int>(h.size()), nullptr));
  BnPtr n_minus_1(BN_dup(EC_GROUP_get0_order(group)));
  BN_sub_word(n_minus_1.get(), 1);
  BN_mod(priv.get(), priv.get(), n_minus_1.get(), bn_ctx);
  BN_add_word(priv.get(), 1);

  EC_POINT* pub = EC_POINT_new(group);
  PublicKey pk{};
  const bool point_ok =
      EC_POINT_mul(group, pub, priv.get(), nullptr, nullptr, bn_ctx) == 1 &&
      EC_POINT_point2oct(group, pub, POINT_CONVERSION_UNCOMPRESSED, pk.data(), pk.size(),
                         bn_ctx) == pk.size();
  EC_POINT_free(pub);
  BN_CTX_free(bn_ctx);
  EC_GROUP_free(group);
  if (!point_ok) ossl_fail("EC_POINT_mul");

  OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
  OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0);
  OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_PRIV_KEY, priv.get());
  OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY, pk.data(), pk.size());
  OSSL_PARAM* params = OSSL_PARAM_BLD_to_param(bld);
  PkeyPtr pkey = pkey_from_params(params, EVP_PKEY_KEYPAIR);
  OSSL_PARAM_free(params);
  OSSL_PARAM_BLD_free(bld);
  if (!pkey) ossl_fail("EVP_PKEY_fromdata keypair");
  return {std::move(pkey), pk};
}

}  // namespace

struct EcdsaBackend::Impl {
  std::unordered_map<Pcid, PkeyPtr> signing;
  std::unordered_map<Pcid, PkeyPtr> verifying;
};

EcdsaBackend::EcdsaBackend() : impl_(std::make_unique<Impl>()) {}
EcdsaBackend::~EcdsaBackend() = default;

Credential EcdsaBackend::make_credential(const Secret& seed, std::int64_t valid_from_ms,
                                         std::int64_t valid_to_ms) {
  auto [pkey, pk] = keypair_from_seed(seed);
  Credential c;
  c.secret = seed;
  c.pc.public_key = pk;
  c.pc.pcid = pcid_of(pk);
  c.pc.valid_from_ms = valid_from_ms;
  c.pc.valid_to_ms = valid_to_ms;
  c.pc.issuer = IssuerTag::kAuthentic;
  impl_->signing.emplace(c.pc.pcid, std::move(pkey));
  return c;
}

Signature EcdsaBackend::sign(const Credential& cred, std::span<const std::uint8_t> bytes) {
  auto it = impl_->signing.find(cred.pc.pcid);
  if (it == impl_->signing.end()) {
    auto [pkey, pk] = keypair_from_seed(cred.secret);
    it = impl_->signing.emplace(cred.pc.pcid, std::move(pkey)).first;
  }
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  std::size_t der_len = 0;
  std::vector<std::uint8_t> der(80);
  bool ok = EVP_DigestSignInit(md, nullptr, EVP_sha256(), nullptr, it->second.get()) == 1;
  der_len = der.size();
  ok = ok && EVP_DigestSign(md, der.data(), &der_len, bytes.data(), bytes.size()) == 1;
  EVP_MD_CTX_free(md);
  if (!ok) ossl_fail("EVP_DigestSign");

  const std::uint8_t* p = der.data();
  ECDSA_SIG* es = d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der_len));
  if (es == nullptr) ossl_fail("d2i_ECDSA_SIG");
  Signature sig{};
  BN_bn2binpad(ECDSA_SIG_get0_r(es), sig.data(), 32);
  BN_bn2binpad(ECDSA_SIG_get0_s(es), sig.data() + 32, 32);
  ECDSA_SIG_free(es);
  return sig;
}

namespace {

bool verify_with(EVP_PKEY* pkey, std::span<const std::uint8_t> bytes, const Signature& sig) {
  ECDSA_SIG* es = ECDSA_SIG_new();
  BIGNUM* r = BN_bin2bn(sig.data(), 32, nullptr);
  BIGNUM* s = BN_bin2bn(sig.data() + 32, 32, nullptr);
  ECDSA_SIG_set0(es, r, s);
  unsigned char* der = nullptr;
  const int der_len = i2d_ECDSA_SIG(es, &der);
  ECDSA_SIG_free(es);
  if (der_len <= 0) return false;

  EVP_MD_CTX* md = EVP_MD_CTX_new();
  const bool ok =
      EVP_DigestVerifyInit(md, nullptr, EVP_sha256(), nullptr, pkey) == 1 &&
      EVP_DigestVerify(md, der, static_cast<std::size_t>(der_len), bytes.data(), bytes.size()) == 1;
  EVP_MD_CTX_free(md);
  OPENSSL_free(der);
  return ok;
}

}  // namespace

bool EcdsaBackend::verify_raw(const PublicKey& pk, std::span<const std::uint8_t> bytes,
                              const Signature& sig) {
  PkeyPtr pkey = public_pkey(pk);
  if (!pkey) return false;
  return verify_with(pkey.get(), bytes, sig);
}

bool EcdsaBackend::do_verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes,
                             const Signature& sig) {
  auto it = impl_->verifying.find(pc.pcid);
  if (it == impl_->verifying.end()) {
    PkeyPtr pkey = public_pkey(pc.public_key);
    if (!pkey) return false;
    it = impl_->verifying.emplace(pc.pcid, std::move(pkey)).first;
  }
  return verify_with(it->second.get(), bytes, sig);
}

std::unique_ptr<SignatureBackend> make_backend(CryptoMode mode) {
  if (mode == CryptoMode::kReal) return std::make_unique<EcdsaBackend>();
  return std::make_unique<SimulatedBackend>();
}

// --- directory --------------------------------------------------------------

Credential PseudonymDirectory::issue(const Secret& seed, std::int64_t valid_from_ms,
                                     std::int64_t valid_to_ms) {
  if (valid_from_ms >= valid_to_ms) throw std::invalid_argument("empty pseudonym lifetime");
  Secret s = seed;
  for (;;) {
    Credential c = backend_->make_credential(s, valid_from_ms, valid_to_ms);
    if (pcs_.emplace(c.pc.pcid, c.pc).second) return c;
    s = hash32(HashDomain::kAux, {s});
  }
}

bool PseudonymDirectory::verify(Pcid pcid, std::span<const std::uint8_t> bytes,
                                const Signature& sig) {
  const Pseudonym* pc = resolve(pcid);
  if (pc == nullptr) {
    ++unresolved_calls_;
    return false;
  }
  return backend_->verify(*pc, bytes, sig);
}

bool PseudonymDirectory::verify(const Pseudonym& pc, std::span<const std::uint8_t> bytes,
                                const Signature& sig) {
  if (!is_authentic(pc)) {
    ++unresolved_calls_;
    return false;
  }
  return backend_->verify(pc, bytes, sig);
}

}  // namespace vbeacon
