// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace vbeacon {

using nlohmann::json;

Stat describe(std::vector<double> v) {
  Stat s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  const auto rank = [&](double p) {
    const auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(r, 1, v.size()) - 1];
  };
  s.p50 = rank(0.5);
  s.p95 = rank(0.95);
  return s;
}

void MetricsReport::beacon_received(int node) { ++outcomes_[node].received; }
void MetricsReport::beacon_dropped(int node) { ++outcomes_[node].dropped; }

void MetricsReport::beacon_settled(int node, Outcome o) {
  OutcomeCounts& c = outcomes_[node];
  switch (o) {
    case Outcome::kAccepted:
      ++c.accepted;
      break;
    case Outcome::kRejected:
      ++c.rejected;
      break;
    case Outcome::kExpired:
      ++c.expired;
      break;
    case Outcome::kPendingAtEnd:
      ++c.pending_at_end;
      break;
  }
}

void MetricsReport::beacon_accepted(int node, int sender, SimTime arrival, SimTime now, const AcceptInfo& info) {
  waiting_.push_back({node, sender, to_ms(arrival), to_ms(now), info.kind, info.mac_assisted});
  TypeCounts& t = types_[node];
  switch (info.kind) {
    case VerifierKind::kSig:
      ++t.sig;
      break;
    case VerifierKind::kSelf:
      ++t.self;
      break;
    case VerifierKind::kCoop:
    case VerifierKind::kMac:
      ++t.coop;
      break;
  }
  if (info.mac_assisted) ++t.mac_assisted;
}

void MetricsReport::contact(int node, int neighbor, SimTime first_rx) {
  contacts_.try_emplace({node, neighbor}, ContactRecord{to_ms(first_rx), std::nullopt});
}

void MetricsReport::discovered(int node, int neighbor, SimTime at) {
  auto it = contacts_.find({node, neighbor});
  if (it == contacts_.end() || it->second.discovered_ms) return;
  it->second.discovered_ms = to_ms(at);
}

void MetricsReport::affected(int victim, int validator, int delta) {
  AffectedRecord& r = affected_[{victim, validator}];
  if (delta > 0) {
    r.accepted += static_cast<std::uint64_t>(delta);
  } else {
    r.retracted += static_cast<std::uint64_t>(-delta);
  }
}

void MetricsReport::add_affected_pair(int victim, int validator) { affected_.try_emplace({victim, validator}); }

void MetricsReport::event_received(int node, std::uint64_t event_id, int source, std::int64_t created_ms,
                                   SimTime arrival) {
  events_.try_emplace({node, event_id},
                      EventRecord{source, static_cast<double>(created_ms), to_ms(arrival), std::nullopt});
}

void MetricsReport::event_accepted(int node, std::uint64_t event_id, SimTime at) {
  auto it = events_.find({node, event_id});
  if (it == events_.end() || it->second.accepted_ms) return;
  it->second.accepted_ms = to_ms(at);
}

bool MetricsReport::loaded(int node) const {
  auto it = cpu_.find(node);
  if (it == cpu_.end() || settings_.duration_ms <= 0) return false;
  const double rate = static_cast<double>(it->second.beacon_frames_rx) / (settings_.duration_ms / 1000.0);
  return rate > settings_.loaded_threshold_hz;
}

namespace {

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

Summary MetricsReport::summarize() const {
  Summary s;
  for (const auto& [node, c] : outcomes_) {
    s.beacons.received += c.received;
    s.beacons.dropped += c.dropped;
    s.beacons.accepted += c.accepted;
    s.beacons.rejected += c.rejected;
    s.beacons.expired += c.expired;
    s.beacons.pending_at_end += c.pending_at_end;
  }
  s.expiration_ratio = ratio(static_cast<double>(s.beacons.expired), static_cast<double>(s.beacons.received));

  std::vector<double> all;
  std::vector<double> loaded_w;
  for (const auto& w : waiting_) {
    all.push_back(w.waiting_ms());
    if (loaded(w.node)) loaded_w.push_back(w.waiting_ms());
  }
  s.waiting = describe(all);
  s.waiting_loaded = describe(loaded_w);
  for (const auto& [node, c] : cpu_) {
    if (outcomes_.contains(node) && loaded(node)) ++s.loaded_nodes;
  }

  for (const auto& [node, t] : types_) {
    s.types.sig += t.sig;
    s.types.self += t.self;
    s.types.coop += t.coop;
    s.types.mac_assisted += t.mac_assisted;
  }
  const auto validated = static_cast<double>(s.types.validated());
  s.sig_ratio = ratio(static_cast<double>(s.types.sig), validated);
  s.self_ratio = ratio(static_cast<double>(s.types.self), validated);
  s.coop_ratio = ratio(static_cast<double>(s.types.coop), validated);
  s.mac_assisted_ratio = ratio(static_cast<double>(s.types.mac_assisted), validated);

  std::size_t within = 0;
  std::vector<double> delays;
  for (const auto& [key, c] : contacts_) {
    if (c.discovered_ms) delays.push_back(*c.discovered_ms - c.first_rx_ms);
    if (!eligible(c)) continue;
    ++s.discovery_pairs;
    if (c.discovered_ms && *c.discovered_ms - c.first_rx_ms <= settings_.discovery_window_ms) ++within;
  }
  s.discovered_within_window = ratio(static_cast<double>(within), static_cast<double>(s.discovery_pairs));
  s.discovery_delay = describe(delays);

  std::vector<double> nets;
  for (const auto& [key, a] : affected_) {
    nets.push_back(static_cast<double>(a.net()));
    s.affected_max = std::max(s.affected_max, a.net());
    s.affected_total += a.net();
  }
  s.affected_pairs = nets.size();
  if (!nets.empty()) {
    std::sort(nets.begin(), nets.end());
    const std::size_t n = nets.size();
    s.affected_median = n % 2 == 1 ? nets[n / 2] : 0.5 * (nets[n / 2 - 1] + nets[n / 2]);
  }

  std::vector<double> ev_wait;
  for (const auto& [key, e] : events_) {
    ++s.events_received;
    if (e.accepted_ms) {
      ++s.events_accepted;
      ev_wait.push_back(*e.accepted_ms - e.created_ms);
    }
  }
  s.event_acceptance = ratio(static_cast<double>(s.events_accepted), static_cast<double>(s.events_received));
  s.event_waiting = describe(ev_wait);

  double busy = 0;
  double d = 0;
  double nd = 0;
  std::size_t measured = 0;
  for (const auto& [node, c] : cpu_) {
    if (!outcomes_.contains(node)) continue;
    ++measured;
    busy += c.busy_ms();
    d += c.time_d_ms;
    nd += c.time_nd_ms;
  }
  s.cpu_utilization = ratio(busy, settings_.duration_ms * static_cast<double>(measured));
  s.d_share = ratio(d, d + nd);
  s.contended_ms = d + nd;
  s.revocations = revocations_.size();
  s.audit = audit_;
  return s;
}

json to_json(const Summary& s) {
  const auto stat = [](const Stat& st) {
    return json{{"count", st.count}, {"mean", st.mean}, {"p50", st.p50}, {"p95", st.p95}};
  };
  return json{
      {"beacons",
       {{"received", s.beacons.received},
        {"dropped", s.beacons.dropped},
        {"accepted", s.beacons.accepted},
        {"rejected", s.beacons.rejected},
        {"expired", s.beacons.expired},
        {"pending_at_end", s.beacons.pending_at_end}}},
      {"expiration_ratio", s.expiration_ratio},
      {"waiting_ms", stat(s.waiting)},
      {"waiting_loaded_ms", stat(s.waiting_loaded)},
      {"loaded_nodes", s.loaded_nodes},
      {"validation_types",
       {{"sig", s.sig_ratio}, {"self", s.self_ratio}, {"coop", s.coop_ratio}, {"mac_assisted", s.mac_assisted_ratio}}},
      {"discovery",
       {{"pairs", s.discovery_pairs}, {"within_window", s.discovered_within_window}, {"delay_ms", stat(s.discovery_delay)}}},
      {"affected",
       {{"pairs", s.affected_pairs}, {"median", s.affected_median}, {"max", s.affected_max}, {"total", s.affected_total}}},
      {"events",
       {{"received", s.events_received},
        {"accepted", s.events_accepted},
        {"acceptance_ratio", s.event_acceptance},
        {"waiting_ms", stat(s.event_waiting)}}},
      {"cpu", {{"utilization", s.cpu_utilization}, {"d_share", s.d_share}, {"contended_ms", s.contended_ms}}},
      {"revocations", s.revocations},
      {"audit",
       {{"forged_beacons_rx", s.audit.forged_beacons_rx},
        {"forged_events_rx", s.audit.forged_events_rx},
        {"forged_accepts", s.audit.forged_accepts},
        {"forged_events_verified", s.audit.forged_events_verified},
        {"accepted_audited", s.audit.accepted_audited},
        {"provenance_failures", s.audit.provenance_failures}}},
  };
}

// --- CSV output -------------------------------------------------------------

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string frac(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

const char* kind_name(VerifierKind k) {
  switch (k) {
    case VerifierKind::kSig:
      return "sig";
    case VerifierKind::kSelf:
      return "self";
    case VerifierKind::kCoop:
    case VerifierKind::kMac:
      return "coop";
  }
  return "sig";
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const char* header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  template <typename... T>
  void row(const T&... cols) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cols, first = false), ...);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace

const std::vector<std::string>& report_files() {
  static const std::vector<std::string> files = {
      "beacon_waiting.csv", "beacon_outcomes.csv", "validation_types.csv", "discovery.csv",
      "affected.csv",       "events.csv",          "revocations.csv",      "cpu.csv",
      "channel.csv",        "summary.csv",         "cdf.csv",              "summary.json",
  };
  return files;
}

void MetricsReport::write(const std::filesystem::path& dir, const json& config) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const double dur_s = settings_.duration_ms / 1000.0;

  std::vector<WaitingSample> waiting = waiting_;
  std::stable_sort(waiting.begin(), waiting.end(), [](const WaitingSample& a, const WaitingSample& b) {
    if (a.node != b.node) return a.node < b.node;
    if (a.arrival_ms != b.arrival_ms) return a.arrival_ms < b.arrival_ms;
    return a.sender < b.sender;
  });
  {
    Csv f(dir / "beacon_waiting.csv", "node,sender,arrival_ms,accepted_ms,waiting_ms,type,mac_assisted");
    for (const auto& w : waiting) {
      f.row(w.node, w.sender, num(w.arrival_ms), num(w.accepted_ms), num(w.waiting_ms()), kind_name(w.kind),
            w.mac_assisted ? 1 : 0);
    }
  }
  {
    Csv f(dir / "beacon_outcomes.csv",
          "node,received,dropped,accepted,rejected,expired,pending_at_end,expiration_ratio,loaded");
    for (const auto& [node, c] : outcomes_) {
      f.row(node, c.received, c.dropped, c.accepted, c.rejected, c.expired, c.pending_at_end,
            frac(ratio(static_cast<double>(c.expired), static_cast<double>(c.received))), loaded(node) ? 1 : 0);
    }
  }
  {
    Csv f(dir / "validation_types.csv",
          "node,validated,sig,self,coop,mac_assisted,sig_ratio,self_ratio,coop_ratio,mac_assisted_ratio");
    for (const auto& [node, t] : types_) {
      const auto v = static_cast<double>(t.validated());
      f.row(node, t.validated(), t.sig, t.self, t.coop, t.mac_assisted, frac(ratio(static_cast<double>(t.sig), v)),
            frac(ratio(static_cast<double>(t.self), v)), frac(ratio(static_cast<double>(t.coop), v)),
            frac(ratio(static_cast<double>(t.mac_assisted), v)));
    }
  }
  {
    Csv f(dir / "discovery.csv", "node,neighbor,first_rx_ms,discovered_ms,delay_ms,eligible");
    for (const auto& [key, c] : contacts_) {
      const std::optional<double> delay =
          c.discovered_ms ? std::optional<double>(*c.discovered_ms - c.first_rx_ms) : std::nullopt;
      f.row(key.first, key.second, num(c.first_rx_ms), opt(c.discovered_ms), opt(delay), eligible(c) ? 1 : 0);
    }
  }
  {
    Csv f(dir / "affected.csv", "victim,validator,accepted,retracted,net");
    for (const auto& [key, a] : affected_) f.row(key.first, key.second, a.accepted, a.retracted, a.net());
  }
  {
    Csv f(dir / "events.csv", "node,event_id,source,created_ms,first_rx_ms,accepted_ms,waiting_ms");
    for (const auto& [key, e] : events_) {
      const std::optional<double> wait =
          e.accepted_ms ? std::optional<double>(*e.accepted_ms - e.created_ms) : std::nullopt;
      f.row(key.first, key.second, e.source, num(e.created_ms), num(e.first_rx_ms), opt(e.accepted_ms), opt(wait));
    }
  }
  {
    Csv f(dir / "revocations.csv", "node,accused,pcid,list,via,at_ms");
    std::vector<RevocationRecord> revs = revocations_;
    std::stable_sort(revs.begin(), revs.end(), [](const RevocationRecord& a, const RevocationRecord& b) {
      if (a.node != b.node) return a.node < b.node;
      return a.at_ms < b.at_ms;
    });
    for (const auto& r : revs) {
      f.row(r.node, r.accused, r.pcid, r.list == RevocationList::kPrl ? "prl" : "krl",
            r.via_evidence ? "evidence" : "local", num(r.at_ms));
    }
  }
  {
    Csv f(dir / "cpu.csv",
          "node,verifies,hashes,verify_ms,light_ms,overrun_ms,utilization,time_d_ms,time_nd_ms,d_share,total_d_ms,"
          "total_nd_ms,beacon_frames_rx,rx_rate_hz,loaded");
    for (const auto& [node, c] : cpu_) {
      f.row(node, c.verifies, c.hashes, num(c.verify_ms), num(c.light_ms), num(c.overrun_ms),
            frac(ratio(c.busy_ms(), settings_.duration_ms)), num(c.time_d_ms), num(c.time_nd_ms),
            frac(ratio(c.time_d_ms, c.time_d_ms + c.time_nd_ms)), num(c.total_d_ms), num(c.total_nd_ms),
            c.beacon_frames_rx, num(dur_s > 0 ? static_cast<double>(c.beacon_frames_rx) / dur_s : 0.0),
            loaded(node) ? 1 : 0);
    }
  }
  {
    Csv f(dir / "channel.csv", "frames,frames_dropped,delivered,range_filtered,loss_dropped,channel_dropped");
    f.row(channel_.frames, channel_.frames_dropped, channel_.delivered, channel_.range_filtered,
          channel_.loss_dropped, channel_.channel_dropped);
  }

  // Per-node and aggregate sample statistics.
  std::map<int, std::vector<double>> wait_by_node;
  std::vector<double> wait_all;
  std::vector<double> wait_loaded;
  for (const auto& w : waiting) {
    wait_by_node[w.node].push_back(w.waiting_ms());
    wait_all.push_back(w.waiting_ms());
    if (loaded(w.node)) wait_loaded.push_back(w.waiting_ms());
  }
  std::map<int, std::vector<double>> disc_by_node;
  std::vector<double> disc_all;
  std::vector<double> disc_cdf;  // eligible contacts; never discovered counts as infinite
  for (const auto& [key, c] : contacts_) {
    if (c.discovered_ms) {
      disc_by_node[key.first].push_back(*c.discovered_ms - c.first_rx_ms);
      disc_all.push_back(*c.discovered_ms - c.first_rx_ms);
    }
    if (eligible(c)) {
      disc_cdf.push_back(c.discovered_ms ? *c.discovered_ms - c.first_rx_ms
                                         : std::numeric_limits<double>::infinity());
    }
  }
  std::map<int, std::vector<double>> ev_by_node;
  std::vector<double> ev_all;
  for (const auto& [key, e] : events_) {
    if (!e.accepted_ms) continue;
    ev_by_node[key.first].push_back(*e.accepted_ms - e.created_ms);
    ev_all.push_back(*e.accepted_ms - e.created_ms);
  }
  {
    Csv f(dir / "summary.csv", "metric,group,node,count,mean,p50,p95");
    const auto emit = [&](const char* metric, const char* group, const std::string& node, const std::vector<double>& v) {
      const Stat s = describe(v);
      f.row(metric, group, node, s.count, num(s.mean), num(s.p50), num(s.p95));
    };
    for (const auto& [node, v] : wait_by_node) emit("beacon_waiting_ms", "node", std::to_string(node), v);
    emit("beacon_waiting_ms", "all", "", wait_all);
    emit("beacon_waiting_ms", "loaded", "", wait_loaded);
    for (const auto& [node, v] : disc_by_node) emit("discovery_delay_ms", "node", std::to_string(node), v);
    emit("discovery_delay_ms", "all", "", disc_all);
    for (const auto& [node, v] : ev_by_node) emit("event_waiting_ms", "node", std::to_string(node), v);
    emit("event_waiting_ms", "all", "", ev_all);
  }
  {
    Csv f(dir / "cdf.csv", "metric,group,x_ms,fraction");
    const auto emit = [&](const char* metric, const char* group, std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const auto steps = static_cast<std::int64_t>(std::floor(settings_.cdf_max_ms / settings_.cdf_step_ms + 1e-9));
      for (std::int64_t i = 0; i <= steps; ++i) {
        const double x = static_cast<double>(i) * settings_.cdf_step_ms;
        const auto le = std::upper_bound(v.begin(), v.end(), x + 1e-9) - v.begin();
        f.row(metric, group, num(x), frac(ratio(static_cast<double>(le), static_cast<double>(v.size()))));
      }
    };
    emit("beacon_waiting_ms", "all", wait_all);
    emit("beacon_waiting_ms", "loaded", wait_loaded);
    emit("discovery_delay_ms", "all", disc_cdf);
    emit("event_waiting_ms", "all", ev_all);
  }
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    json j{{"config", config}, {"summary", to_json(summarize())}};
    out << j.dump(2) << '\n';
  }
}

}  // namespace vbeacon
