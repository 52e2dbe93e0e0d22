// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include <set>

#include "doctest.h"
#include "test_util.hpp"
#include "vbeacon/codec.hpp"
#include "vbeacon/cpu.hpp"
#include "vbeacon/hash.hpp"
#include "vbeacon/key_chain.hpp"
#include "vbeacon/rng.hpp"
#include "vbeacon/signature.hpp"

using namespace vbeacon;
using vbeacon::testing::filled;
using vbeacon::testing::hex;
using vbeacon::testing::unhex;

TEST_CASE("chain hash applied three times") {
  // Independent oracle: SHA-256(0x01 || k) truncated, iterated over 0x77 x 20.
  CHECK(hex(chain_walk(filled<kDigestSize>(0x77), 3)) == "eaf68afff4a76cae246941befd0b8e73b661f4a1");

  const Secret seed = filled<kSecretSize>(3);
  const KeyChain c = KeyChain::generate(seed, Pcid{1}, 3, 0, 100);
  REQUIRE(c.length() == 3);
  Digest k = c.key(3);
  for (int i = 0; i < 3; ++i) k = chain_step(k);
  CHECK(k == c.key(0));
  for (std::size_t j = 0; j < 3; ++j) CHECK(c.key(j) == chain_step(c.key(j + 1)));
}

TEST_CASE("single-step chain") {
  const KeyChain c = KeyChain::generate(filled<kSecretSize>(9), Pcid{1}, 1, 0, 100);
  CHECK(c.key(0) == chain_step(c.key(1)));
  CHECK_THROWS(KeyChain::generate(filled<kSecretSize>(9), Pcid{1}, 0, 0, 100));
}

TEST_CASE("one day of keys at 10 Hz") {
  const std::size_t L = 24 * 3600 * 10;
  CHECK(L == 864000);
  const KeyChain c = KeyChain::generate(filled<kSecretSize>(1), Pcid{1}, L, 0, 100);
  CHECK(c.storage_bytes() == 17'280'000);
  // Reported as roughly 14 MB; same order of magnitude.
  CHECK(c.storage_bytes() > 10'000'000);
  CHECK(c.storage_bytes() < 20'000'000);
}

TEST_CASE("slot indexing") {
  const KeyChain c = KeyChain::generate(filled<kSecretSize>(1), Pcid{1}, 100, 1250, 100);
  CHECK(c.base_slot() == 12);
  CHECK(slot_of(1299, 100) == 12);
  CHECK(slot_of(1300, 100) == 13);
  CHECK(slot_of(-1, 100) == -1);
  CHECK(c.covers_slot(12));
  CHECK(c.covers_slot(112));
  CHECK_FALSE(c.covers_slot(113));
  CHECK(c.key_for_slot(13) == c.key(1));
  CHECK_THROWS_AS(c.key_for_slot(11), std::out_of_range);
}

TEST_CASE("chain_check") {
  const KeyChain c = KeyChain::generate(filled<kSecretSize>(5), Pcid{1}, 50, 0, 100);
  SUBCASE("zero gap") {
    const auto r = chain_check(c.key(4), c.key(4), 0, 100);
    CHECK(r.ok());
    CHECK(r.hashes == 0);
  }
  SUBCASE("consecutive disclosures") {
    for (std::size_t j = 1; j < 50; ++j) {
      const auto r = chain_check(c.key(j), c.key(j - 1), 1, 100);
      CHECK(r.ok());
      CHECK(r.hashes == 1);
    }
  }
  SUBCASE("gap of several slots") { CHECK(chain_check(c.key(30), c.key(10), 20, 100).ok()); }
  SUBCASE("gap beyond bound") {
    CHECK(chain_check(c.key(30), c.key(10), 20, 19).verdict == ChainCheck::kGapTooLarge);
    CHECK(chain_check(c.key(30), c.key(10), -1, 19).verdict == ChainCheck::kGapTooLarge);
  }
  SUBCASE("random keys never pass") {
    Rng rng(77);
    int accepts = 0;
    for (int i = 0; i < 10000; ++i) accepts += chain_check(rng.bytes<kDigestSize>(), c.key(10), 1, 100).ok();
    CHECK(accepts == 0);
  }
}

TEST_CASE("MAC under the slot key") {
  const KeyChain c = KeyChain::generate(filled<kSecretSize>(5), Pcid{1}, 50, 0, 100);
  BeaconBody body;
  body.pcid = Pcid{1};
  body.timestamp_ms = 1234;
  body.disclosed_key = c.key(11);
  const Signature sig = filled<kSignatureSize>(0x42);
  const Digest mac = compute_mac(mac_key(c.key(12)), body, sig);

  // Receiver learns keys[12] from the next beacon and recomputes.
  CHECK(compute_mac(mac_key(c.key(12)), body, sig) == mac);

  const auto enc = encode_body(body);
  for (std::size_t i = 0; i < enc.size(); i += 7) {
    BeaconBody mutated = body;
    // Mutate through the codec so every byte position is exercised.
    auto bytes = encode_message(Message{body, sig, mac});
    bytes[i] ^= 0x01;
    try {
      mutated = decode_message(bytes).body;
    } catch (const CodecError&) {
      continue;
    }
    CHECK(compute_mac(mac_key(c.key(12)), mutated, sig) != mac);
  }

  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Digest k = rng.bytes<kDigestSize>();
    CHECK(mac_key(k) != k);
    CHECK(mac_key(k) != chain_step(k));
  }
}

TEST_CASE("simulated signatures") {
  PseudonymDirectory dir(make_backend(CryptoMode::kSimulated));
  const Credential cred = dir.issue(filled<kSecretSize>(1), 0, 60000);
  const Credential other = dir.issue(filled<kSecretSize>(2), 0, 60000);
  CHECK(cred.pc.pcid != other.pc.pcid);
  CHECK(cred.pc.pcid == pcid_of(cred.pc.public_key));
  const std::vector<std::uint8_t> msg = {1, 2, 3, 4};
  const Signature sig = dir.sign(cred, msg);
  CHECK(dir.verify(cred.pc.pcid, msg, sig));
  CHECK_FALSE(dir.verify(other.pc.pcid, msg, sig));
  CHECK_FALSE(dir.verify(cred.pc.pcid, std::vector<std::uint8_t>{1, 2, 3, 5}, sig));

  Rng rng(1);
  CHECK_FALSE(dir.verify(cred.pc.pcid, msg, rng.bytes<kSignatureSize>()));
  CHECK_FALSE(dir.verify(Pcid{cred.pc.pcid.value ^ 1u}, msg, sig));
  CHECK(dir.verify_calls() == 5);

  Pseudonym forged = cred.pc;
  forged.issuer = IssuerTag::kForged;
  CHECK_FALSE(dir.is_authentic(forged));
  CHECK_FALSE(dir.verify(forged, msg, sig));
  CHECK(dir.verify(cred.pc, msg, sig));
}

TEST_CASE("bogus signature still costs tau") {
  CpuModel cpu(from_ms(4.0), from_ms(0.01));
  PseudonymDirectory dir(make_backend(CryptoMode::kSimulated));
  const Credential cred = dir.issue(filled<kSecretSize>(1), 0, 60000);
  Rng rng(5);
  const std::vector<std::uint8_t> msg = {9};
  const SimTime done = cpu.begin_verify(SimTime{0});
  CHECK_FALSE(dir.verify(cred.pc.pcid, msg, rng.bytes<kSignatureSize>()));
  CHECK(to_ms(done) == doctest::Approx(4.0));
  CHECK(to_ms(cpu.verify_time()) == doctest::Approx(4.0));
}

TEST_CASE("cpu ledger is exact") {
  CpuModel cpu(from_ms(4.0), from_ms(0.01));
  Rng rng(8);
  SimTime now{0};
  for (int i = 0; i < 5000; ++i) {
    now += SimTime{static_cast<std::int64_t>(rng.below(3000))};
    if (rng.bernoulli(0.3)) {
      cpu.begin_verify(now);
    } else {
      cpu.charge_hashes(now, rng.below(5));
    }
  }
  CHECK(cpu.total_time() == cpu.tau_verify() * static_cast<std::int64_t>(cpu.verifies()) +
                                cpu.tau_light() * static_cast<std::int64_t>(cpu.hashes()));
  CHECK(cpu.total_time() <= cpu.busy_until());
}

TEST_CASE("one verification at a time") {
  CpuModel cpu(from_ms(4.0), from_ms(0.01));
  CHECK(cpu.begin_verify(SimTime{0}) == from_ms(4.0));
  CHECK_FALSE(cpu.idle(from_ms(3.9)));
  CHECK(cpu.begin_verify(from_ms(1.0)) == from_ms(8.0));
  CHECK(cpu.idle(from_ms(8.0)));
}

TEST_CASE("ECDSA P-256 known answer") {
  // Deterministic-nonce P-256 / SHA-256 vector for message "sample".
  const auto x = unhex("60fed4ba255a9d31c961eb74c6356d68c049b8923b61fa6ce669622e60f29fb6");
  const auto y = unhex("7903fe1008b8bc99a41ae9e95628bc64f2f1b20c2d7e9f5177a3c294d4462299");
  const auto r = unhex("efd48b2aacb6a8fd1140dd9cd45e81d69d2c877b56aaf991c34d0ea84eaf3716");
  const auto s = unhex("f7cb1c942d657c41d436c7a1b6e29f65f3e900dbb9aff4064dc4ab2f843acda8");
  PublicKey pk{};
  pk[0] = 0x04;
  std::copy(x.begin(), x.end(), pk.begin() + 1);
  std::copy(y.begin(), y.end(), pk.begin() + 33);
  Signature sig{};
  std::copy(r.begin(), r.end(), sig.begin());
  std::copy(s.begin(), s.end(), sig.begin() + 32);
  const std::string sample = "sample";
  const std::span<const std::uint8_t> msg(reinterpret_cast<const std::uint8_t*>(sample.data()), sample.size());
  CHECK(EcdsaBackend::verify_raw(pk, msg, sig));
  sig[63] ^= 1;
  CHECK_FALSE(EcdsaBackend::verify_raw(pk, msg, sig));
}

TEST_CASE("ECDSA backend round trip") {
  PseudonymDirectory dir(make_backend(CryptoMode::kReal));
  const Credential a = dir.issue(filled<kSecretSize>(1), 0, 60000);
  const Credential b = dir.issue(filled<kSecretSize>(2), 0, 60000);
  CHECK(a.pc.public_key[0] == 0x04);
  const std::vector<std::uint8_t> msg(300, 0xAB);
  const Signature sig = dir.sign(a, msg);
  CHECK(dir.verify(a.pc.pcid, msg, sig));
  CHECK_FALSE(dir.verify(b.pc.pcid, msg, sig));
  Rng rng(4);
  CHECK_FALSE(dir.verify(a.pc.pcid, msg, rng.bytes<kSignatureSize>()));
  // Same seed gives the same key pair.
  PseudonymDirectory again(make_backend(CryptoMode::kReal));
  CHECK(again.issue(filled<kSecretSize>(1), 0, 60000).pc == a.pc);
}

TEST_CASE("no digest collisions at test scale") {
  Rng rng(11);
  std::set<Digest> seen;
  const KeyChain c = KeyChain::generate(filled<kSecretSize>(7), Pcid{1}, 20000, 0, 100);
  for (std::size_t j = 0; j <= c.length(); ++j) seen.insert(c.key(j));
  for (int i = 0; i < 20000; ++i) seen.insert(mac_key(rng.bytes<kDigestSize>()));
  CHECK(seen.size() == 40001);
}
