// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <cstdint>

#include "vbeacon/types.hpp"

namespace vbeacon {

/// Per-node crypto budget. Signature verifications are serialized; hash-level
/// work is charged to the same timeline so the node never does two things at once.
class CpuModel {
 public:
  CpuModel(SimTime tau_verify, SimTime tau_light) : tau_verify_(tau_verify), tau_light_(tau_light) {}

  SimTime tau_verify() const { return tau_verify_; }
  SimTime tau_light() const { return tau_light_; }

  bool idle(SimTime now) const { return busy_until_ <= now; }
  SimTime busy_until() const { return busy_until_; }

  /// Books one signature verification; returns its completion time.
  SimTime begin_verify(SimTime now) {
    const SimTime start = std::max(now, busy_until_);
    busy_until_ = start + tau_verify_;
    ++verifies_;
    verify_time_ += tau_verify_;
    return busy_until_;
  }

  /// Books `n` hash operations.
  void charge_hashes(SimTime now, std::uint64_t n) {
    if (n == 0) return;
    const SimTime cost = tau_light_ * static_cast<std::int64_t>(n);
    busy_until_ = std::max(now, busy_until_) + cost;
    hashes_ += n;
    light_time_ += cost;
  }

  std::uint64_t verifies() const { return verifies_; }
  std::uint64_t hashes() const { return hashes_; }
  SimTime verify_time() const { return verify_time_; }
  SimTime light_time() const { return light_time_; }
  SimTime total_time() const { return verify_time_ + light_time_; }

 private:
  SimTime tau_verify_;
  SimTime tau_light_;
  SimTime busy_until_{0};
  std::uint64_t verifies_ = 0;
  std::uint64_t hashes_ = 0;
  SimTime verify_time_{0};
  SimTime light_time_{0};
};

}  // namespace vbeacon
