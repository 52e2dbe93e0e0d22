// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/hash.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace vbeacon {
namespace {

struct CtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

// One context per thread; parallel sweep runs hash concurrently.
EVP_MD_CTX* thread_ctx() {
  thread_local std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx{EVP_MD_CTX_new()};
  return ctx.get();
}

std::array<std::uint8_t, 32> sha256(HashDomain domain,
                                    std::initializer_list<std::span<const std::uint8_t>> parts) {
  EVP_MD_CTX* ctx = thread_ctx();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
  const auto tag = static_cast<std::uint8_t>(domain);
  EVP_DigestUpdate(ctx, &tag, 1);
  for (const auto& part : parts) {
    if (!part.empty()) EVP_DigestUpdate(ctx, part.data(), part.size());
  }
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, out.data(), &len);
  return out;
}

}  // namespace

Digest hash20(HashDomain domain, std::initializer_list<std::span<const std::uint8_t>> parts) {
  const auto full = sha256(domain, parts);
  Digest d{};
  std::copy_n(full.begin(), d.size(), d.begin());
  return d;
}

std::array<std::uint8_t, 32> hash32(HashDomain domain,
                                    std::initializer_list<std::span<const std::uint8_t>> parts) {
  return sha256(domain, parts);
}

}  // namespace vbeacon
