// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "vbeacon/codec.hpp"

namespace vbeacon {

using nlohmann::json;

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kFacilitated:
      return "facilitated";
    case Scheme::kBaselineFcfs:
      return "baseline_fcfs";
    case Scheme::kBaselineLcfs:
      return "baseline_lcfs";
  }
  return "facilitated";
}

Scheme scheme_from_string(std::string_view s) {
  if (s == "facilitated") return Scheme::kFacilitated;
  if (s == "baseline_fcfs") return Scheme::kBaselineFcfs;
  if (s == "baseline_lcfs") return Scheme::kBaselineLcfs;
  throw ConfigError("unknown scheme: " + std::string(s));
}

std::string_view to_string(MobilityMode m) {
  switch (m) {
    case MobilityMode::kStaticGrid:
      return "static-grid";
    case MobilityMode::kRandomWaypoint:
      return "random-waypoint";
    case MobilityMode::kTrace:
      return "trace";
  }
  return "static-grid";
}

MobilityMode mobility_mode_from_string(std::string_view s) {
  if (s == "static-grid") return MobilityMode::kStaticGrid;
  if (s == "random-waypoint") return MobilityMode::kRandomWaypoint;
  if (s == "trace") return MobilityMode::kTrace;
  throw ConfigError("unknown mobility mode: " + std::string(s));
}

namespace {

json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect rect_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(path + ": expected [x0, y0, x1, y1]");
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(path + ": expected numbers");
  }
  return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

const char* type_name(const json& j) { return j.type_name(); }

bool compatible(const json& def, const json& v) {
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  return def.type() == v.type();
}

/// Overlays `user` on `base`, which holds every known field.
void merge_strict(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string here = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown field: " + here);
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), here);
    } else if (!compatible(slot, it.value())) {
      throw ConfigError(here + ": expected " + type_name(slot) + ", got " + type_name(it.value()));
    } else {
      slot = it.value();
    }
  }
}

}  // namespace

json to_json(const SimConfig& c) {
  const auto& p = c.protocol;
  const auto& a = c.adversary;
  const auto& m = c.mobility;
  return json{
      {"seed", c.seed},
      {"duration_ms", c.duration_ms},
      {"scheme", to_string(c.scheme)},
      {"crypto", to_string(c.crypto)},
      {"simultaneous_start", c.simultaneous_start},
      {"sweep_interval_ms", c.sweep_interval_ms},
      {"denms", c.denms},
      {"region",
       {{"sim", rect_json(c.region.sim)},
        {"beacon", rect_json(c.region.beacon)},
        {"result", rect_json(c.region.result)},
        {"attack", rect_json(c.region.attack)}}},
      {"nodes",
       {{"count", c.nodes.count},
        {"penetration", c.nodes.penetration},
        {"arrival_spread_ms", c.nodes.arrival_spread_ms}}},
      {"mobility",
       {{"mode", to_string(m.mode)},
        {"grid_cols", m.grid_cols},
        {"spacing_m", m.spacing_m},
        {"origin_x", m.origin_x},
        {"origin_y", m.origin_y},
        {"speed_min_mps", m.speed_min_mps},
        {"speed_max_mps", m.speed_max_mps},
        {"pause_ms", m.pause_ms},
        {"trace_file", m.trace_file}}},
      {"radio",
       {{"range_m", c.radio.range_m},
        {"bitrate_bps", c.radio.bitrate_bps},
        {"loss_probability", c.radio.loss_probability},
        {"backlog_frames", c.radio.backlog_frames},
        {"cell_size_m", c.radio.cell_size_m}}},
      {"protocol",
       {{"alpha", p.alpha},
        {"k", p.k},
        {"gamma_hz", p.gamma_hz},
        {"gamma_max_hz", p.gamma_max_hz},
        {"tau_verify_ms", p.tau_verify_ms},
        {"tau_light_ms", p.tau_light_ms},
        {"t_blife_ms", p.t_blife_ms},
        {"pr_check", p.pr_check},
        {"ratio_d", p.ratio_d},
        {"ratio_nd", p.ratio_nd},
        {"beta1", p.beta1},
        {"beta2", p.beta2},
        {"cross_check", p.cross_check},
        {"evidence_dissemination", p.evidence_dissemination},
        {"max_chain_gap_slots", p.max_chain_gap_slots},
        {"verifier_cap", p.verifier_cap},
        {"clock_skew_ms", p.clock_skew_ms},
        {"facilitator_ttl_ms", p.facilitator_ttl_ms},
        {"facilitator_cache_capacity", p.facilitator_cache_capacity},
        {"denm_mean_interval_ms", p.denm_mean_interval_ms},
        {"denm_lifetime_ms", p.denm_lifetime_ms},
        {"event_spacing_ms", p.event_spacing_ms}}},
      {"adversary",
       {{"flooders", a.flooders},
        {"gamma_dos_hz", a.gamma_dos_hz},
        {"flood_mix", to_string(a.flood_mix)},
        {"flooder_grid_cols", a.flooder_grid_cols},
        {"ratio_adv", a.ratio_adv},
        {"ratio_s", a.ratio_s},
        {"ratio_v", a.ratio_v},
        {"masqueraders", a.masqueraders},
        {"attack_start_ms", a.attack_start_ms},
        {"validator_lag_ms", a.validator_lag_ms}}},
      {"metrics",
       {{"cdf_step_ms", c.metrics.cdf_step_ms},
        {"cdf_max_ms", c.metrics.cdf_max_ms},
        {"loaded_threshold_hz", c.metrics.loaded_threshold_hz},
        {"discovery_window_ms", c.metrics.discovery_window_ms}}},
  };
}

SimConfig config_from_json(const json& user) {
  json j = to_json(SimConfig{});
  merge_strict(j, user, "");
  SimConfig c;
  try {
    c.seed = j["seed"].get<std::uint64_t>();
    c.duration_ms = j["duration_ms"].get<double>();
    c.scheme = scheme_from_string(j["scheme"].get<std::string>());
    try {
      c.crypto = crypto_mode_from_string(j["crypto"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    c.simultaneous_start = j["simultaneous_start"].get<bool>();
    c.sweep_interval_ms = j["sweep_interval_ms"].get<double>();
    c.denms = j["denms"].get<bool>();
    const auto& r = j["region"];
    c.region.sim = rect_from(r["sim"], "region.sim");
    c.region.beacon = rect_from(r["beacon"], "region.beacon");
    c.region.result = rect_from(r["result"], "region.result");
    c.region.attack = rect_from(r["attack"], "region.attack");
    c.nodes.count = j["nodes"]["count"].get<int>();
    c.nodes.penetration = j["nodes"]["penetration"].get<double>();
    c.nodes.arrival_spread_ms = j["nodes"]["arrival_spread_ms"].get<double>();
    const auto& m = j["mobility"];
    c.mobility.mode = mobility_mode_from_string(m["mode"].get<std::string>());
    c.mobility.grid_cols = m["grid_cols"].get<int>();
    c.mobility.spacing_m = m["spacing_m"].get<double>();
    c.mobility.origin_x = m["origin_x"].get<double>();
    c.mobility.origin_y = m["origin_y"].get<double>();
    c.mobility.speed_min_mps = m["speed_min_mps"].get<double>();
    c.mobility.speed_max_mps = m["speed_max_mps"].get<double>();
    c.mobility.pause_ms = m["pause_ms"].get<double>();
    c.mobility.trace_file = m["trace_file"].get<std::string>();
    const auto& rd = j["radio"];
    c.radio.range_m = rd["range_m"].get<double>();
    c.radio.bitrate_bps = rd["bitrate_bps"].get<double>();
    c.radio.loss_probability = rd["loss_probability"].get<double>();
    c.radio.backlog_frames = rd["backlog_frames"].get<int>();
    c.radio.cell_size_m = rd["cell_size_m"].get<double>();
    const auto& p = j["protocol"];
    auto& q = c.protocol;
    q.alpha = p["alpha"].get<int>();
    q.k = p["k"].get<int>();
    q.gamma_hz = p["gamma_hz"].get<double>();
    q.gamma_max_hz = p["gamma_max_hz"].get<double>();
    q.tau_verify_ms = p["tau_verify_ms"].get<double>();
    q.tau_light_ms = p["tau_light_ms"].get<double>();
    q.t_blife_ms = p["t_blife_ms"].get<double>();
    q.pr_check = p["pr_check"].get<double>();
    q.ratio_d = p["ratio_d"].get<double>();
    q.ratio_nd = p["ratio_nd"].get<double>();
    q.beta1 = p["beta1"].get<int>();
    q.beta2 = p["beta2"].get<int>();
    q.cross_check = p["cross_check"].get<bool>();
    q.evidence_dissemination = p["evidence_dissemination"].get<bool>();
    q.max_chain_gap_slots = p["max_chain_gap_slots"].get<int>();
    q.verifier_cap = p["verifier_cap"].get<int>();
    q.clock_skew_ms = p["clock_skew_ms"].get<double>();
    q.facilitator_ttl_ms = p["facilitator_ttl_ms"].get<double>();
    q.facilitator_cache_capacity = p["facilitator_cache_capacity"].get<int>();
    q.denm_mean_interval_ms = p["denm_mean_interval_ms"].get<double>();
    q.denm_lifetime_ms = p["denm_lifetime_ms"].get<double>();
    q.event_spacing_ms = p["event_spacing_ms"].get<double>();
    const auto& a = j["adversary"];
    auto& b = c.adversary;
    b.flooders = a["flooders"].get<int>();
    b.gamma_dos_hz = a["gamma_dos_hz"].get<double>();
    try {
      b.flood_mix = flood_mix_from_string(a["flood_mix"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    b.flooder_grid_cols = a["flooder_grid_cols"].get<int>();
    b.ratio_adv = a["ratio_adv"].get<double>();
    b.ratio_s = a["ratio_s"].get<double>();
    b.ratio_v = a["ratio_v"].get<double>();
    b.masqueraders = a["masqueraders"].get<int>();
    b.attack_start_ms = a["attack_start_ms"].get<double>();
    b.validator_lag_ms = a["validator_lag_ms"].get<double>();
    const auto& mt = j["metrics"];
    c.metrics.cdf_step_ms = mt["cdf_step_ms"].get<double>();
    c.metrics.cdf_max_ms = mt["cdf_max_ms"].get<double>();
    c.metrics.loaded_threshold_hz = mt["loaded_threshold_hz"].get<double>();
    c.metrics.discovery_window_ms = mt["discovery_window_ms"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

void apply_override(json& j, std::string_view path, std::string_view value) {
  json* node = &j;
  std::string walked;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
    walked += (walked.empty() ? "" : ".") + key;
    if (!node->is_object() || !node->contains(key)) throw ConfigError("unknown field: " + walked);
    node = &(*node)[key];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded() || (node->is_string() && !v.is_string())) v = std::string(value);
  if (node->is_object()) throw ConfigError(walked + ": cannot override a whole section");
  if (!compatible(*node, v)) {
    throw ConfigError(walked + ": expected " + type_name(*node) + ", got '" + std::string(value) + "'");
  }
  *node = v;
}

void apply_override(SimConfig& c, std::string_view path, std::string_view value) {
  json j = to_json(c);
  apply_override(j, path, value);
  c = config_from_json(j);
}

std::string resolve_field(std::string_view name) {
  const json defaults = to_json(SimConfig{});
  const std::string key(name);
  if (key.find('.') != std::string::npos || defaults.contains(key)) return key;
  std::vector<std::string> hits;
  for (auto it = defaults.begin(); it != defaults.end(); ++it) {
    if (it.value().is_object() && it.value().contains(key)) hits.push_back(it.key() + "." + key);
  }
  if (hits.size() == 1) return hits.front();
  if (hits.empty()) throw ConfigError("unknown field: " + key);
  std::string all;
  for (const auto& h : hits) all += (all.empty() ? "" : ", ") + h;
  throw ConfigError("ambiguous field " + key + ": " + all);
}

std::vector<std::string> validate(const SimConfig& c) {
  std::vector<std::string> e;
  const auto positive = [&](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) e.push_back(std::string(name) + " must be positive");
  };
  const auto non_negative = [&](double v, const char* name) {
    if (!(v >= 0) || !std::isfinite(v)) e.push_back(std::string(name) + " must not be negative");
  };
  const auto probability = [&](double v, const char* name) {
    if (!(v >= 0 && v <= 1)) e.push_back(std::string(name) + " must lie in [0, 1]");
  };
  const auto& p = c.protocol;
  non_negative(c.duration_ms, "duration_ms");
  positive(c.sweep_interval_ms, "sweep_interval_ms");
  if (c.nodes.count < 0) e.push_back("nodes.count must not be negative");
  probability(c.nodes.penetration, "nodes.penetration");
  non_negative(c.nodes.arrival_spread_ms, "nodes.arrival_spread_ms");
  for (const auto* r : {&c.region.sim, &c.region.beacon, &c.region.result, &c.region.attack}) {
    if (!(r->x1 >= r->x0 && r->y1 >= r->y0)) e.push_back("regions need x1 >= x0 and y1 >= y0");
  }
  if (c.mobility.grid_cols <= 0) e.push_back("mobility.grid_cols must be positive");
  non_negative(c.mobility.spacing_m, "mobility.spacing_m");
  if (c.mobility.mode == MobilityMode::kRandomWaypoint) {
    positive(c.mobility.speed_min_mps, "mobility.speed_min_mps");
    if (c.mobility.speed_max_mps < c.mobility.speed_min_mps) {
      e.push_back("mobility.speed_max_mps must be at least speed_min_mps");
    }
  }
  if (c.mobility.mode == MobilityMode::kTrace && c.mobility.trace_file.empty()) {
    e.push_back("mobility.trace_file is required in trace mode");
  }
  positive(c.radio.range_m, "radio.range_m");
  positive(c.radio.bitrate_bps, "radio.bitrate_bps");
  probability(c.radio.loss_probability, "radio.loss_probability");
  if (c.radio.backlog_frames <= 0) e.push_back("radio.backlog_frames must be positive");
  non_negative(c.radio.cell_size_m, "radio.cell_size_m");

  if (p.alpha < 0) e.push_back("protocol.alpha must not be negative");
  if (p.k < 0) e.push_back("protocol.k must not be negative");
  if (p.alpha + p.k + 2 > static_cast<int>(kMaxFacilitators)) e.push_back("protocol.alpha + k exceeds the frame limit");
  positive(p.gamma_hz, "protocol.gamma_hz");
  positive(p.gamma_max_hz, "protocol.gamma_max_hz");
  if (p.gamma_hz > p.gamma_max_hz) e.push_back("protocol.gamma_hz must not exceed gamma_max_hz");
  positive(p.tau_verify_ms, "protocol.tau_verify_ms");
  non_negative(p.tau_light_ms, "protocol.tau_light_ms");
  positive(p.t_blife_ms, "protocol.t_blife_ms");
  probability(p.pr_check, "protocol.pr_check");
  probability(p.ratio_d, "protocol.ratio_d");
  probability(p.ratio_nd, "protocol.ratio_nd");
  if (std::abs(p.ratio_d + p.ratio_nd - 1.0) > 1e-9) e.push_back("protocol.ratio_d + ratio_nd must equal 1");
  if (p.beta1 < 1) e.push_back("protocol.beta1 must be at least 1");
  if (p.beta2 < 1) e.push_back("protocol.beta2 must be at least 1");
  if (p.max_chain_gap_slots < 1) e.push_back("protocol.max_chain_gap_slots must be at least 1");
  if (p.verifier_cap < 1) e.push_back("protocol.verifier_cap must be at least 1");
  non_negative(p.clock_skew_ms, "protocol.clock_skew_ms");
  positive(p.facilitator_ttl_ms, "protocol.facilitator_ttl_ms");
  if (p.facilitator_cache_capacity < 0) e.push_back("protocol.facilitator_cache_capacity must not be negative");
  positive(p.denm_mean_interval_ms, "protocol.denm_mean_interval_ms");
  positive(p.denm_lifetime_ms, "protocol.denm_lifetime_ms");
  non_negative(p.event_spacing_ms, "protocol.event_spacing_ms");

  const auto& a = c.adversary;
  if (a.flooders < 0) e.push_back("adversary.flooders must not be negative");
  non_negative(a.gamma_dos_hz, "adversary.gamma_dos_hz");
  const double capacity_fps = c.radio.bitrate_bps / (8.0 * kDefaultFrameSize);
  if (a.gamma_dos_hz > capacity_fps) e.push_back("adversary.gamma_dos_hz exceeds channel capacity");
  if (a.flooder_grid_cols <= 0) e.push_back("adversary.flooder_grid_cols must be positive");
  probability(a.ratio_adv, "adversary.ratio_adv");
  probability(a.ratio_s, "adversary.ratio_s");
  probability(a.ratio_v, "adversary.ratio_v");
  if (std::abs(a.ratio_s + a.ratio_v - 1.0) > 1e-9) e.push_back("adversary.ratio_s + ratio_v must equal 1");
  if (a.masqueraders < 0) e.push_back("adversary.masqueraders must not be negative");
  non_negative(a.attack_start_ms, "adversary.attack_start_ms");
  non_negative(a.validator_lag_ms, "adversary.validator_lag_ms");

  positive(c.metrics.cdf_step_ms, "metrics.cdf_step_ms");
  positive(c.metrics.cdf_max_ms, "metrics.cdf_max_ms");
  positive(c.metrics.loaded_threshold_hz, "metrics.loaded_threshold_hz");
  positive(c.metrics.discovery_window_ms, "metrics.discovery_window_ms");
  return e;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  return config_from_json(j);
}

// --- presets ----------------------------------------------------------------

namespace {

SimConfig desk_base() {
  SimConfig c;
  c.duration_ms = 30'000;
  return c;
}

SimConfig with_flood(FloodMix mix) {
  SimConfig c = desk_base();
  c.adversary.flooders = 2;
  c.adversary.gamma_dos_hz = 250;
  c.adversary.flood_mix = mix;
  // Vehicles keep arriving while the flood is on, so discovery happens under load.
  c.nodes.arrival_spread_ms = 20'000;
  return c;
}

SimConfig collusion(bool pr_check, bool cross_check) {
  SimConfig c = with_flood(FloodMix::kBeacons);
  c.nodes.count = 30;
  c.mobility.grid_cols = 6;
  c.mobility.spacing_m = 28;
  c.adversary.ratio_adv = 0.2;
  c.adversary.attack_start_ms = 2'000;
  // Pairs must be discovered before they turn; a sender that joins after the
  // attack starts never gets a valid signature in and cannot be vouched for.
  c.nodes.arrival_spread_ms = 0;
  c.protocol.pr_check = pr_check ? 0.2 : 0.0;
  c.protocol.cross_check = cross_check;
  c.protocol.evidence_dissemination = cross_check;
  return c;
}

std::vector<ScenarioPreset> build_presets() {
  std::vector<ScenarioPreset> out;
  out.push_back({"benign", "25 honest vehicles in mutual range, no attackers", desk_base()});
  {
    SimConfig c = desk_base();
    c.nodes.count = 36;
    c.mobility.grid_cols = 6;
    c.mobility.spacing_m = 28;
    out.push_back({"benign-loaded", "36 honest vehicles, beacon arrivals above verification capacity", c});
  }
  out.push_back({"dos-beacons", "25 vehicles, 2 flooders sending bogus beacons at 250 Hz each",
                 with_flood(FloodMix::kBeacons)});
  out.push_back({"dos-denms-only", "25 vehicles, 2 flooders sending bogus DENMs at 250 Hz each",
                 with_flood(FloodMix::kDenms)});
  out.push_back({"dos-mixed", "25 vehicles, 2 flooders alternating bogus beacons and DENMs",
                 with_flood(FloodMix::kMixed)});
  out.push_back({"collusion-none", "colluding sender/validator pairs, no probabilistic check, no cross-check",
                 collusion(false, false)});
  out.push_back({"collusion-prob", "colluding pairs, probabilistic check only", collusion(true, false)});
  out.push_back({"collusion-full", "colluding pairs, probabilistic check, cross-check and evidence",
                 collusion(true, true)});
  return out;
}

}  // namespace

const std::vector<ScenarioPreset>& presets() {
  static const std::vector<ScenarioPreset> all = build_presets();
  return all;
}

SimConfig preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.config;
  }
  throw ConfigError("unknown preset: " + std::string(name));
}

}  // namespace vbeacon
