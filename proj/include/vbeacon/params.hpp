// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace vbeacon {

struct ProtocolParams {
  int alpha = 3;                // COOP facilitators per beacon
  int k = 3;                    // SELF facilitators per beacon
  double gamma_hz = 10.0;       // beacon rate
  double gamma_max_hz = 10.0;   // slot rate of the key chain
  double tau_verify_ms = 4.0;
  double tau_light_ms = 0.01;
  double t_blife_ms = 1000.0;
  double pr_check = 0.2;
  double ratio_d = 0.5;
  double ratio_nd = 0.5;
  int beta1 = 1;
  int beta2 = 3;
  bool cross_check = true;
  bool evidence_dissemination = true;
  int max_chain_gap_slots = 100;
  int verifier_cap = 8;
  double clock_skew_ms = 10.0;  // tolerated future timestamps and late arrivals
  double facilitator_ttl_ms = 3000.0;
  int facilitator_cache_capacity = 1024;
  double denm_mean_interval_ms = 30000.0;
  double denm_lifetime_ms = 2000.0;
  double event_spacing_ms = 20.0;

  std::int64_t slot_len_ms() const { return std::llround(1000.0 / gamma_max_hz); }
  std::int64_t beacon_interval_us() const { return std::llround(1e6 / gamma_hz); }
};

}  // namespace vbeacon
