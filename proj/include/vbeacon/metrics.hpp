// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbeacon/radio.hpp"
#include "vbeacon/receiver.hpp"

namespace vbeacon {

struct WaitingSample {
  int node = 0;
  int sender = 0;
  double arrival_ms = 0;
  double accepted_ms = 0;
  VerifierKind kind = VerifierKind::kSig;
  bool mac_assisted = false;
  double waiting_ms() const { return accepted_ms - arrival_ms; }
};

/// Benign beacons at one receiver. Every received beacon ends in exactly one bucket.
struct OutcomeCounts {
  std::uint64_t received = 0;
  std::uint64_t dropped = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t expired = 0;
  std::uint64_t pending_at_end = 0;
};

struct TypeCounts {
  std::uint64_t sig = 0;
  std::uint64_t self = 0;
  std::uint64_t coop = 0;  // includes probabilistically checked acceptances
  std::uint64_t mac_assisted = 0;
  std::uint64_t validated() const { return sig + self + coop; }
};

struct ContactRecord {
  double first_rx_ms = 0;
  std::optional<double> discovered_ms;
};

struct AffectedRecord {
  std::uint64_t accepted = 0;
  std::uint64_t retracted = 0;
  std::int64_t net() const { return static_cast<std::int64_t>(accepted) - static_cast<std::int64_t>(retracted); }
};

struct EventRecord {
  int source = 0;
  double created_ms = 0;
  double first_rx_ms = 0;
  std::optional<double> accepted_ms;
};

struct RevocationRecord {
  int node = 0;
  int accused = -1;  // -1 when the pseudonym belongs to no simulated node
  std::uint32_t pcid = 0;
  RevocationList list = RevocationList::kPrl;
  bool via_evidence = false;
  double at_ms = 0;
};

struct CpuRecord {
  std::uint64_t verifies = 0;
  std::uint64_t hashes = 0;
  double verify_ms = 0;
  double light_ms = 0;
  double overrun_ms = 0;  // booked work that would finish after the run ends
  double busy_ms() const { return verify_ms + light_ms - overrun_ms; }
  double time_d_ms = 0;  // contended selections only
  double time_nd_ms = 0;
  double total_d_ms = 0;
  double total_nd_ms = 0;
  std::uint64_t beacon_frames_rx = 0;  // every beacon frame heard, bogus included
};

struct AuditCounters {
  std::uint64_t forged_beacons_rx = 0;
  std::uint64_t forged_events_rx = 0;
  std::uint64_t forged_accepts = 0;           // forged-pseudonym beacons accepted
  std::uint64_t forged_events_verified = 0;   // bogus events that reached a signature check
  std::uint64_t accepted_audited = 0;
  std::uint64_t provenance_failures = 0;      // receivers whose audit failed
};

struct Stat {
  std::size_t count = 0;
  double mean = 0;
  double p50 = 0;
  double p95 = 0;
};

/// Nearest-rank percentiles over a copy of `v`.
Stat describe(std::vector<double> v);

/// Aggregates over the measured receivers.
struct Summary {
  OutcomeCounts beacons;
  double expiration_ratio = 0;
  Stat waiting;
  Stat waiting_loaded;
  std::size_t loaded_nodes = 0;
  TypeCounts types;
  double sig_ratio = 0;
  double self_ratio = 0;
  double coop_ratio = 0;
  double mac_assisted_ratio = 0;
  std::size_t discovery_pairs = 0;  // contacts made early enough to be judged
  double discovered_within_window = 0;
  Stat discovery_delay;
  std::size_t affected_pairs = 0;
  double affected_median = 0;
  std::int64_t affected_max = 0;
  std::int64_t affected_total = 0;
  std::size_t events_received = 0;
  std::size_t events_accepted = 0;
  double event_acceptance = 0;
  Stat event_waiting;
  double cpu_utilization = 0;
  double d_share = 0;  // contended signature time spent on discovered senders
  double contended_ms = 0;
  std::size_t revocations = 0;
  AuditCounters audit;
};

class MetricsReport {
 public:
  MetricsReport() = default;

  struct Settings {
    double duration_ms = 0;
    double cdf_step_ms = 10;
    double cdf_max_ms = 2000;
    double loaded_threshold_hz = 250;
    double discovery_window_ms = 500;
  };
  explicit MetricsReport(const Settings& s) : settings_(s) {}

  // Recording hooks. Node ids are simulator indices.
  void beacon_received(int node);
  void beacon_dropped(int node);
  void beacon_settled(int node, Outcome o);
  void beacon_accepted(int node, int sender, SimTime arrival, SimTime now, const AcceptInfo& info);
  void contact(int node, int neighbor, SimTime first_rx);
  void discovered(int node, int neighbor, SimTime at);
  void affected(int victim, int validator, int delta);
  void add_affected_pair(int victim, int validator);
  void event_received(int node, std::uint64_t event_id, int source, std::int64_t created_ms, SimTime arrival);
  void event_accepted(int node, std::uint64_t event_id, SimTime at);
  void revocation(const RevocationRecord& r) { revocations_.push_back(r); }
  void set_cpu(int node, const CpuRecord& c) { cpu_[node] = c; }
  void set_channel(const ChannelCounters& c) { channel_ = c; }
  AuditCounters& audit() { return audit_; }

  const Settings& settings() const { return settings_; }
  const std::map<int, OutcomeCounts>& outcomes() const { return outcomes_; }
  const std::vector<WaitingSample>& waiting() const { return waiting_; }
  const std::map<int, TypeCounts>& types() const { return types_; }
  const std::map<std::pair<int, int>, ContactRecord>& contacts() const { return contacts_; }
  const std::map<std::pair<int, int>, AffectedRecord>& affected() const { return affected_; }
  const std::map<std::pair<int, std::uint64_t>, EventRecord>& events() const { return events_; }
  const std::vector<RevocationRecord>& revocations() const { return revocations_; }
  const std::map<int, CpuRecord>& cpu() const { return cpu_; }
  const ChannelCounters& channel() const { return channel_; }
  const AuditCounters& audit() const { return audit_; }

  bool loaded(int node) const;
  /// Contacts old enough that the discovery window fits in the run.
  bool eligible(const ContactRecord& c) const {
    return c.first_rx_ms <= settings_.duration_ms - settings_.discovery_window_ms;
  }

  Summary summarize() const;

  /// Writes every CSV plus summary.json (with `config` embedded) into `dir`.
  void write(const std::filesystem::path& dir, const nlohmann::json& config) const;

 private:
  Settings settings_;
  std::map<int, OutcomeCounts> outcomes_;
  std::vector<WaitingSample> waiting_;
  std::map<int, TypeCounts> types_;
  std::map<std::pair<int, int>, ContactRecord> contacts_;
  std::map<std::pair<int, int>, AffectedRecord> affected_;
  std::map<std::pair<int, std::uint64_t>, EventRecord> events_;
  std::vector<RevocationRecord> revocations_;
  std::map<int, CpuRecord> cpu_;
  ChannelCounters channel_;
  AuditCounters audit_;
};

nlohmann::json to_json(const Summary& s);

/// File names written by MetricsReport::write, in write order.
const std::vector<std::string>& report_files();

}  // namespace vbeacon
