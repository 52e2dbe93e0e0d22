// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vbeacon/adversary.hpp"
#include "vbeacon/mobility.hpp"
#include "vbeacon/params.hpp"
#include "vbeacon/radio.hpp"
#include "vbeacon/signature.hpp"

namespace vbeacon {

enum class Scheme : std::uint8_t { kFacilitated, kBaselineFcfs, kBaselineLcfs };
enum class MobilityMode : std::uint8_t { kStaticGrid, kRandomWaypoint, kTrace };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);
std::string_view to_string(MobilityMode m);
MobilityMode mobility_mode_from_string(std::string_view s);

struct RegionConfig {
  Rect sim{-50, -50, 190, 190};
  Rect beacon{-50, -50, 190, 190};  // only nodes inside send beacons
  Rect result{-50, -50, 190, 190};  // only nodes inside are measured
  Rect attack{-50, -50, 190, 190};  // malicious nodes act only inside
};

struct NodesConfig {
  int count = 25;
  double penetration = 1.0;  // fraction of vehicles that run the protocol
  double arrival_spread_ms = 0.0;  // vehicles enter uniformly over [0, spread]
};

struct MobilityConfig {
  MobilityMode mode = MobilityMode::kStaticGrid;
  int grid_cols = 5;
  double spacing_m = 35.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double speed_min_mps = 5.0;
  double speed_max_mps = 15.0;
  double pause_ms = 0.0;
  std::string trace_file;
};

struct AdversaryConfig {
  int flooders = 0;
  double gamma_dos_hz = 250.0;
  FloodMix flood_mix = FloodMix::kBeacons;
  int flooder_grid_cols = 2;  // flooders sit on a grid inside the attack region
  double ratio_adv = 0.0;     // malicious fraction of the protocol-running vehicles
  double ratio_s = 0.5;
  double ratio_v = 0.5;
  int masqueraders = 0;
  double attack_start_ms = 0.0;
  double validator_lag_ms = 2.0;  // a validator beacons this long after its partner sender
};

struct MetricsConfig {
  double cdf_step_ms = 10.0;
  double cdf_max_ms = 2000.0;
  double loaded_threshold_hz = 250.0;  // nodes receiving more beacons than this form the "loaded" group
  double discovery_window_ms = 500.0;
};

struct SimConfig {
  std::uint64_t seed = 1;
  double duration_ms = 30'000.0;
  Scheme scheme = Scheme::kFacilitated;
  CryptoMode crypto = CryptoMode::kSimulated;
  bool simultaneous_start = false;  // all beacon timers in phase
  double sweep_interval_ms = 100.0;
  bool denms = true;  // honest nodes generate DENMs
  RegionConfig region;
  NodesConfig nodes;
  MobilityConfig mobility;
  RadioParams radio;
  ProtocolParams protocol;
  AdversaryConfig adversary;
  MetricsConfig metrics;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  ConfigError(const std::string& what, std::vector<std::string> problems)
      : std::runtime_error(what), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

nlohmann::json to_json(const SimConfig& c);
/// Fields absent from `j` keep their defaults; unknown fields are errors.
SimConfig config_from_json(const nlohmann::json& j);

/// Sets a dotted path (e.g. "protocol.alpha") from its textual value.
void apply_override(nlohmann::json& j, std::string_view path, std::string_view value);
void apply_override(SimConfig& c, std::string_view path, std::string_view value);

/// Expands a bare leaf name ("alpha") to its dotted path when unambiguous.
std::string resolve_field(std::string_view name);

/// Every violated constraint, empty when the configuration is runnable.
std::vector<std::string> validate(const SimConfig& c);

SimConfig load_config_file(const std::string& path);

struct ScenarioPreset {
  std::string name;
  std::string description;
  SimConfig config;
};

const std::vector<ScenarioPreset>& presets();
/// Throws ConfigError for unknown names.
SimConfig preset(std::string_view name);

}  // namespace vbeacon
