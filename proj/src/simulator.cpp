// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "vbeacon/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "vbeacon/adversary.hpp"
#include "vbeacon/events.hpp"
#include "vbeacon/mobility.hpp"
#include "vbeacon/radio.hpp"
#include "vbeacon/receiver.hpp"
#include "vbeacon/sender.hpp"

namespace vbeacon {
namespace {

enum class Role : std::uint8_t { kIdle, kHonest, kMaliciousSender, kMaliciousValidator, kFlooder, kMasquerader };

enum class Kind : std::uint8_t {
  kBeaconTimer,
  kFloodTimer,
  kDenmTimer,
  kEventTx,
  kDeliverBeacon,
  kDeliverEvent,
  kCpuDone,
  kCpuWake,
  kSweep,
};

struct Item {
  SimTime t{0};
  std::uint64_t seq = 0;
  Kind kind = Kind::kSweep;
  int node = -1;
  Vec2 pos;
  SimTime sent{0};
  BeaconPtr beacon;
  EventPtr event;
};

struct Later {
  bool operator()(const Item& a, const Item& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

// Seed streams derived from the master seed.
enum Stream : std::uint64_t {
  kStreamSetup = 1,
  kStreamChannel = 2,
  kStreamMobility = 3,
  kStreamNode = 1000,
};

class Sim;

struct Hooks final : ReceiverObserver, EventObserver {
  Hooks(Sim& s, int n) : sim(s), node(n) {}
  Sim& sim;
  int node;

  void on_received(const BeaconFrame& f, SimTime now) override;
  void on_dropped(const BeaconFrame& f, DropReason r, SimTime now) override;
  void on_accepted(const BeaconFrame& f, SimTime arrival, SimTime now, const AcceptInfo& info) override;
  void on_retracted(const BeaconFrame& f, SimTime now, const AcceptInfo& info) override;
  void on_settled(const BeaconFrame& f, SimTime arrival, Outcome o, SimTime now) override;
  void on_discovered(Pcid p, SimTime now) override;
  void on_report(const MisbehaviorReport& r) override;
  void on_note_verified(const VerifiedEntry& e) override;

  void on_event_received(const EventFrame& f, SimTime now) override;
  void on_event_verified(const EventFrame& f, bool valid, SimTime now) override;
  void on_event_accepted(const EventFrame& f, SimTime first_arrival, SimTime now) override;
  void on_evidence_accepted(const EventFrame& f, Pcid validator, SimTime now) override;
};

struct Node {
  enum class Busy : std::uint8_t { kNone, kBeacon, kEvent };

  int index = 0;
  Role role = Role::kIdle;
  Trajectory path;
  Rng rng{0};
  Rng forge_rng{0};
  CpuModel cpu{SimTime{0}, SimTime{0}};
  std::unique_ptr<Hooks> hooks;
  std::unique_ptr<BeaconSender> tx;
  std::unique_ptr<FacilitatedReceiver> frx;
  std::unique_ptr<BaselineReceiver> brx;
  BeaconPipeline* rx = nullptr;
  std::unique_ptr<EventProcessor> events;
  std::unique_ptr<Flooder> flooder;
  int partner = -1;
  std::size_t board_cursor = 0;
  bool forging = false;
  Busy busy = Busy::kNone;
  std::optional<SimTime> wake_at;
  std::uint64_t beacon_frames_rx = 0;
  std::uint64_t denm_seq = 0;
  SimTime joins{0};  // enters the road; silent and deaf before

  bool present(SimTime t) const { return t >= joins; }

  bool listens() const { return rx != nullptr || role == Role::kMasquerader; }
  bool beacons() const {
    return role == Role::kHonest || role == Role::kMaliciousSender || role == Role::kMaliciousValidator;
  }
};

class Sim {
 public:
  explicit Sim(const SimConfig& c)
      : cfg_(c),
        params_(c.protocol),
        plain_params_(c.protocol),
        dir_(make_backend(c.crypto)),
        channel_(c.radio, derive_seed(c.seed, kStreamChannel)),
        report_(MetricsReport::Settings{c.duration_ms, c.metrics.cdf_step_ms, c.metrics.cdf_max_ms,
                                        c.metrics.loaded_threshold_hz, c.metrics.discovery_window_ms}) {
    plain_params_.alpha = 0;
    plain_params_.k = 0;
    end_ = from_ms(c.duration_ms);
  }

  MetricsReport run();

  // Hook targets.
  void received(Node& n, const BeaconFrame& f, SimTime now);
  void dropped(Node& n, const BeaconFrame& f, SimTime now);
  void accepted(Node& n, const BeaconFrame& f, SimTime arrival, SimTime now, const AcceptInfo& info);
  void retracted(Node& n, const BeaconFrame& f, const AcceptInfo& info);
  void settled(Node& n, const BeaconFrame& f, SimTime arrival, Outcome o);
  void discovered(Node& n, Pcid p, SimTime now);
  void reported(Node& n, const MisbehaviorReport& r);
  void event_received(Node& n, const EventFrame& f, SimTime now);
  void event_verified(const EventFrame& f);
  void event_accepted(Node& n, const EventFrame& f, SimTime now);
  void evidence_accepted(Node& n, Pcid validator, SimTime now);

  Node& node(int i) { return *nodes_[static_cast<std::size_t>(i)]; }

 private:
  void build();
  std::vector<Trajectory> vehicle_paths(Rng& rng);
  void setup_protocol_node(Node& n);
  Vec2 pos(const Node& n, SimTime t) const { return n.path.at(to_ms(t)); }
  Status status(const Node& n, SimTime t) const;
  bool measured(const Node& n, SimTime t) const {
    return n.role == Role::kHonest && cfg_.region.result.contains(pos(n, t));
  }
  bool attacking(const Node& n, SimTime t) const {
    return to_ms(t) >= cfg_.adversary.attack_start_ms && cfg_.region.attack.contains(pos(n, t));
  }
  int owner(Pcid p) const {
    auto it = owners_.find(p);
    return it == owners_.end() ? -1 : it->second;
  }

  void push(Item it) {
    it.seq = seq_++;
    queue_.push(std::move(it));
  }
  void schedule(Kind k, SimTime t, int node) { push(Item{t, 0, k, node, {}, {}, nullptr, nullptr}); }

  void transmit(Node& from, SimTime now, BeaconPtr beacon, EventPtr event);
  void deliver(const Item& it);
  void pump(Node& n, SimTime now);
  void wake(Node& n, SimTime t);

  void beacon_timer(Node& n, SimTime now);
  void flood_timer(Node& n, SimTime now);
  void denm_timer(Node& n, SimTime now);
  void cpu_done(Node& n, SimTime now);
  void sweep(SimTime now);
  void finish();

  const SimConfig& cfg_;
  ProtocolParams params_;
  ProtocolParams plain_params_;  // standard beacons without facilitators
  PseudonymDirectory dir_;
  Channel channel_;
  MetricsReport report_;
  CollusionBoard board_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<int> listeners_;
  std::unordered_map<Pcid, int> owners_;
  std::priority_queue<Item, std::vector<Item>, Later> queue_;
  std::uint64_t seq_ = 0;
  SimTime end_{0};
};

// --- hooks -------------------------------------------------------------------

void Hooks::on_received(const BeaconFrame& f, SimTime now) { sim.received(sim.node(node), f, now); }
void Hooks::on_dropped(const BeaconFrame& f, DropReason, SimTime now) { sim.dropped(sim.node(node), f, now); }
void Hooks::on_accepted(const BeaconFrame& f, SimTime arrival, SimTime now, const AcceptInfo& info) {
  sim.accepted(sim.node(node), f, arrival, now, info);
}
void Hooks::on_retracted(const BeaconFrame& f, SimTime, const AcceptInfo& info) {
  sim.retracted(sim.node(node), f, info);
}
void Hooks::on_settled(const BeaconFrame& f, SimTime arrival, Outcome o, SimTime) {
  sim.settled(sim.node(node), f, arrival, o);
}
void Hooks::on_discovered(Pcid p, SimTime now) { sim.discovered(sim.node(node), p, now); }
void Hooks::on_report(const MisbehaviorReport& r) { sim.reported(sim.node(node), r); }
void Hooks::on_note_verified(const VerifiedEntry& e) {
  Node& n = sim.node(node);
  if (n.tx) n.tx->note_verified(e);
}
void Hooks::on_event_received(const EventFrame& f, SimTime now) { sim.event_received(sim.node(node), f, now); }
void Hooks::on_event_verified(const EventFrame& f, bool, SimTime) { sim.event_verified(f); }
void Hooks::on_event_accepted(const EventFrame& f, SimTime, SimTime now) {
  sim.event_accepted(sim.node(node), f, now);
}
void Hooks::on_evidence_accepted(const EventFrame&, Pcid validator, SimTime now) {
  sim.evidence_accepted(sim.node(node), validator, now);
}

bool benign(const FrameTruth& t) { return t.origin == Origin::kHonest && t.authentic_signature; }

void Sim::received(Node& n, const BeaconFrame& f, SimTime now) {
  if (f.truth.forged_pc) ++report_.audit().forged_beacons_rx;
  if (!measured(n, now) || !benign(f.truth)) return;
  report_.beacon_received(n.index);
  report_.contact(n.index, f.truth.node, now);
}

void Sim::dropped(Node& n, const BeaconFrame& f, SimTime now) {
  if (measured(n, now) && benign(f.truth)) report_.beacon_dropped(n.index);
}

void Sim::accepted(Node& n, const BeaconFrame& f, SimTime arrival, SimTime now, const AcceptInfo& info) {
  if (n.events) n.events->on_beacon_accepted(f, now);
  if (f.truth.forged_pc) ++report_.audit().forged_accepts;
  if (!measured(n, arrival)) return;
  if (benign(f.truth)) report_.beacon_accepted(n.index, f.truth.node, arrival, now, info);
  if (f.truth.origin == Origin::kMaliciousSender && !f.truth.authentic_signature && info.via) {
    report_.affected(n.index, owner(*info.via), 1);
  }
}

void Sim::retracted(Node& n, const BeaconFrame& f, const AcceptInfo& info) {
  if (f.truth.origin == Origin::kMaliciousSender && !f.truth.authentic_signature && info.via &&
      report_.affected().contains({n.index, owner(*info.via)})) {
    report_.affected(n.index, owner(*info.via), -1);
  }
}

void Sim::settled(Node& n, const BeaconFrame& f, SimTime arrival, Outcome o) {
  if (measured(n, arrival) && benign(f.truth)) report_.beacon_settled(n.index, o);
}

void Sim::discovered(Node& n, Pcid p, SimTime now) {
  const int who = owner(p);
  if (who >= 0 && measured(n, now)) report_.discovered(n.index, who, now);
}

void Sim::reported(Node& n, const MisbehaviorReport& r) {
  report_.revocation({n.index, owner(r.accused), r.accused.value, r.list, false, to_ms(r.at)});
  if (!cfg_.protocol.evidence_dissemination || r.list != RevocationList::kPrl || !r.bogus || !r.validating) return;
  if (!n.tx || cfg_.scheme != Scheme::kFacilitated) return;
  EventMessage ev;
  ev.event_id = (static_cast<std::uint64_t>(n.index + 1) << 32) | (0x80000000U + n.denm_seq++);
  ev.kind = EventKind::kEvidence;
  ev.created_at_ms = r.at.count() / 1000;
  ev.lifetime_ms = std::llround(cfg_.protocol.denm_lifetime_ms);
  ev.body = encode_evidence(r.bogus->msg, r.validating->msg);
  n.tx->schedule_event(std::move(ev), r.at);
}

void Sim::event_received(Node& n, const EventFrame& f, SimTime now) {
  if (f.truth.forged_pc) ++report_.audit().forged_events_rx;
  if (f.ev.kind != EventKind::kDenm || f.truth.origin != Origin::kHonest || !measured(n, now)) return;
  report_.event_received(n.index, f.ev.event_id, f.truth.node, f.ev.created_at_ms, now);
}

void Sim::event_verified(const EventFrame& f) {
  if (f.truth.forged_pc) ++report_.audit().forged_events_verified;
}

void Sim::event_accepted(Node& n, const EventFrame& f, SimTime now) {
  if (f.ev.kind != EventKind::kDenm || f.truth.origin != Origin::kHonest) return;
  report_.event_accepted(n.index, f.ev.event_id, now);
}

void Sim::evidence_accepted(Node& n, Pcid validator, SimTime now) {
  report_.revocation({n.index, owner(validator), validator.value, RevocationList::kPrl, true, to_ms(now)});
}

// --- setup -------------------------------------------------------------------

std::vector<Trajectory> Sim::vehicle_paths(Rng& rng) {
  const auto& m = cfg_.mobility;
  const int n = cfg_.nodes.count;
  switch (m.mode) {
    case MobilityMode::kStaticGrid:
      return static_grid(n, m.grid_cols, m.spacing_m, Vec2{m.origin_x, m.origin_y});
    case MobilityMode::kRandomWaypoint:
      return random_waypoint(n, cfg_.region.sim, m.speed_min_mps, m.speed_max_mps, m.pause_ms,
                             std::max(cfg_.duration_ms, 1.0), rng);
    case MobilityMode::kTrace: {
      std::ifstream in(m.trace_file);
      if (!in) throw ConfigError("cannot read trace file: " + m.trace_file);
      try {
        return load_trace(in, n);
      } catch (const MobilityError& e) {
        throw ConfigError(std::string("trace file: ") + e.what());
      }
    }
  }
  return {};
}

std::vector<Trajectory> attacker_grid(int n, int cols, const Rect& r) {
  std::vector<Trajectory> out;
  if (n <= 0) return out;
  cols = std::max(1, std::min(cols, n));
  const int rows = (n + cols - 1) / cols;
  for (int i = 0; i < n; ++i) {
    const double x = r.x0 + (i % cols + 0.5) * r.width() / cols;
    const double y = r.y0 + (i / cols + 0.5) * r.height() / rows;
    out.emplace_back(std::vector<Waypoint>{{0.0, Vec2{x, y}}});
  }
  return out;
}

void Sim::setup_protocol_node(Node& n) {
  const bool facilitated = cfg_.scheme == Scheme::kFacilitated;
  const ProtocolParams& p = facilitated ? params_ : plain_params_;
  const auto lifetime_ms = static_cast<std::int64_t>(std::ceil(cfg_.duration_ms)) + 60'000;
  Credential cred = dir_.issue(n.rng.bytes<kSecretSize>(), 0, lifetime_ms);
  const std::int64_t slot_len = params_.slot_len_ms();
  const auto length =
      static_cast<std::size_t>(std::ceil(cfg_.duration_ms * params_.gamma_max_hz / 1000.0)) + 2;
  KeyChain chain = KeyChain::generate(n.rng.bytes<kSecretSize>(), cred.pc.pcid, length, -slot_len, slot_len);
  owners_[cred.pc.pcid] = n.index;
  n.tx = std::make_unique<BeaconSender>(p, dir_, std::move(cred), std::move(chain));
  n.hooks = std::make_unique<Hooks>(*this, n.index);
  n.cpu = CpuModel(from_ms(params_.tau_verify_ms), from_ms(params_.tau_light_ms));
  if (facilitated) {
    n.frx = std::make_unique<FacilitatedReceiver>(params_, dir_, n.cpu, n.rng, *n.hooks);
    n.rx = n.frx.get();
    FacilitatedReceiver* frx = n.frx.get();
    n.events = std::make_unique<EventProcessor>(params_, dir_, n.cpu, *n.hooks,
                                                [frx](Pcid who, SimTime t) { frx->revoke(who, t); });
  } else {
    const auto order = cfg_.scheme == Scheme::kBaselineFcfs ? BaselineReceiver::Order::kFcfs
                                                            : BaselineReceiver::Order::kLcfs;
    n.brx = std::make_unique<BaselineReceiver>(order, params_, dir_, n.cpu, *n.hooks, n.hooks.get());
    n.rx = n.brx.get();
  }
}

void Sim::build() {
  Rng setup(derive_seed(cfg_.seed, kStreamSetup));
  Rng mobility(derive_seed(cfg_.seed, kStreamMobility));
  std::vector<Trajectory> paths = vehicle_paths(mobility);
  const int vehicles = cfg_.nodes.count;
  const auto& adv = cfg_.adversary;
  std::vector<Trajectory> floods = attacker_grid(adv.flooders + adv.masqueraders, adv.flooder_grid_cols,
                                                 cfg_.region.attack);

  for (int i = 0; i < vehicles + adv.flooders + adv.masqueraders; ++i) {
    auto n = std::make_unique<Node>();
    n->index = i;
    n->rng = Rng(derive_seed(cfg_.seed, kStreamNode + 2 * static_cast<std::uint64_t>(i)));
    n->forge_rng = Rng(derive_seed(cfg_.seed, kStreamNode + 2 * static_cast<std::uint64_t>(i) + 1));
    if (i < vehicles) {
      n->path = std::move(paths[static_cast<std::size_t>(i)]);
      if (cfg_.nodes.arrival_spread_ms > 0) {
        n->joins = from_ms(setup.uniform(0.0, cfg_.nodes.arrival_spread_ms));
      }
    } else {
      n->path = floods[static_cast<std::size_t>(i - vehicles)];
      n->role = i < vehicles + adv.flooders ? Role::kFlooder : Role::kMasquerader;
    }
    nodes_.push_back(std::move(n));
  }

  // Equipped vehicles, then the malicious ones among them.
  std::vector<int> order(static_cast<std::size_t>(vehicles));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[setup.below(i)]);
  const auto equipped = static_cast<std::size_t>(std::llround(cfg_.nodes.penetration * vehicles));
  order.resize(std::min(order.size(), equipped));
  const auto n_adv = static_cast<std::size_t>(std::llround(adv.ratio_adv * static_cast<double>(order.size())));
  const auto n_s = static_cast<std::size_t>(std::llround(adv.ratio_s * static_cast<double>(n_adv)));
  std::vector<int> senders;
  std::vector<int> validators;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Node& n = node(order[i]);
    if (i < n_s) {
      n.role = Role::kMaliciousSender;
      senders.push_back(n.index);
    } else if (i < n_adv) {
      n.role = Role::kMaliciousValidator;
      validators.push_back(n.index);
    } else {
      n.role = Role::kHonest;
    }
  }
  for (std::size_t i = 0; i < std::min(senders.size(), validators.size()); ++i) {
    node(validators[i]).partner = senders[i];
    node(validators[i]).joins = node(senders[i]).joins;
    node(senders[i]).partner = validators[i];
  }

  for (auto& np : nodes_) {
    Node& n = *np;
    if (n.beacons()) setup_protocol_node(n);
    if (n.role == Role::kFlooder) {
      n.flooder = std::make_unique<Flooder>(n.index, adv.flood_mix, n.rng.next());
    }
    if (n.listens()) listeners_.push_back(n.index);
  }

  // Timers. Validators beacon just after their partner so the false COOP is fresh.
  const SimTime interval{params_.beacon_interval_us()};
  std::vector<SimTime> phase(nodes_.size(), SimTime{0});
  for (auto& np : nodes_) {
    Node& n = *np;
    if (!n.beacons()) continue;
    if (!cfg_.simultaneous_start) phase[static_cast<std::size_t>(n.index)] = SimTime(setup.below(
        static_cast<std::uint64_t>(interval.count())));
  }
  for (auto& np : nodes_) {
    Node& n = *np;
    if (n.beacons()) {
      SimTime t = n.joins + phase[static_cast<std::size_t>(n.index)];
      if (n.role == Role::kMaliciousValidator && n.partner >= 0) {
        const Node& s = node(n.partner);
        t = s.joins + phase[static_cast<std::size_t>(n.partner)] + from_ms(adv.validator_lag_ms);
      }
      schedule(Kind::kBeaconTimer, t, n.index);
      if (n.role == Role::kHonest && cfg_.denms) {
        schedule(Kind::kDenmTimer, n.joins + from_ms(n.rng.exponential(cfg_.protocol.denm_mean_interval_ms)),
                 n.index);
      }
    }
    if (n.role == Role::kFlooder && adv.gamma_dos_hz > 0) {
      const SimTime start = from_ms(adv.attack_start_ms) + SimTime(n.rng.below(1000));
      schedule(Kind::kFloodTimer, start, n.index);
    }
  }
  schedule(Kind::kSweep, from_ms(cfg_.sweep_interval_ms), -1);
}

Status Sim::status(const Node& n, SimTime t) const {
  const Vec2 a = pos(n, t);
  const Vec2 b = pos(n, t + from_ms(100));
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  Status s;
  s.x_m = static_cast<float>(a.x);
  s.y_m = static_cast<float>(a.y);
  s.speed_mps = static_cast<float>(std::hypot(dx, dy) / 0.1);
  s.heading_rad = static_cast<float>(std::atan2(dy, dx));
  return s;
}

// --- event loop --------------------------------------------------------------

void Sim::transmit(Node& from, SimTime now, BeaconPtr beacon, EventPtr event) {
  const std::size_t bytes = beacon ? beacon->wire_bytes : event->wire_bytes;
  std::size_t potential = 0;
  for (int r : listeners_) potential += r != from.index && node(r).present(now) ? 1 : 0;
  const Vec2 at = pos(from, now);
  const auto done = channel_.transmit(at, bytes, now, potential);
  if (!done) return;
  push(Item{*done, 0, beacon ? Kind::kDeliverBeacon : Kind::kDeliverEvent, from.index, at, now, std::move(beacon),
            std::move(event)});
}

void Sim::deliver(const Item& it) {
  const SimTime now = it.t;
  for (int r : listeners_) {
    if (r == it.node || !node(r).present(it.sent)) continue;
    Node& n = node(r);
    if (channel_.receive(it.pos, pos(n, now)) != Channel::Rx::kDelivered) continue;
    if (n.role == Role::kMasquerader) {
      if (it.beacon && benign(it.beacon->truth) && attacking(n, now)) {
        transmit(n, now, masquerade(*it.beacon, n.index, n.rng), nullptr);
      }
      continue;
    }
    if (it.beacon) {
      ++n.beacon_frames_rx;
      n.rx->on_receive(it.beacon, now);
    } else if (n.events) {
      n.events->on_receive(it.event, now);
    } else {
      n.brx->on_receive_event(it.event, now);
    }
    pump(n, now);
  }
}

void Sim::wake(Node& n, SimTime t) {
  if (n.wake_at && *n.wake_at == t) return;
  n.wake_at = t;
  schedule(Kind::kCpuWake, t, n.index);
}

void Sim::pump(Node& n, SimTime now) {
  if (n.busy != Node::Busy::kNone) return;
  for (std::size_t guard = 0;; ++guard) {
    if (guard > 10'000'000) throw std::logic_error("receiver made no progress");
    if (n.cpu.busy_until() > now) return wake(n, n.cpu.busy_until());
    if (n.events && n.events->has_work()) {
      if (auto done = n.events->start_next(now)) {
        n.busy = Node::Busy::kEvent;
        schedule(Kind::kCpuDone, *done, n.index);
        return;
      }
      continue;
    }
    if (!n.rx->has_work()) return;
    if (auto done = n.rx->start_next(now)) {
      n.busy = Node::Busy::kBeacon;
      schedule(Kind::kCpuDone, *done, n.index);
      return;
    }
  }
}

void Sim::cpu_done(Node& n, SimTime now) {
  const auto busy = n.busy;
  n.busy = Node::Busy::kNone;
  if (busy == Node::Busy::kEvent) {
    n.events->complete(now);
  } else if (busy == Node::Busy::kBeacon) {
    n.rx->complete(now);
  }
  pump(n, now);
}

void Sim::beacon_timer(Node& n, SimTime now) {
  schedule(Kind::kBeaconTimer, now + SimTime(params_.beacon_interval_us()), n.index);
  if (!cfg_.region.beacon.contains(pos(n, now))) return;
  const bool active = attacking(n, now);
  if (n.role == Role::kMaliciousValidator && n.partner >= 0 && active) {
    for (const VerifiedEntry& e : board_.take(n.partner, n.board_cursor)) n.tx->pin(e);
  }
  if (n.role == Role::kMaliciousSender && active && !n.forging) {
    n.forging = true;
    n.tx->forge_with(&n.forge_rng);
  }
  SenderOutput out;
  try {
    out = n.tx->next_beacon(now, status(n, now));
  } catch (const ChainExhausted&) {
    return;
  }
  const Origin origin = n.role == Role::kHonest            ? Origin::kHonest
                        : n.role == Role::kMaliciousSender ? Origin::kMaliciousSender
                                                           : Origin::kMaliciousValidator;
  const std::uint32_t bid = out.msg.body.bid;
  const std::int64_t ts = out.msg.body.timestamp_ms;
  BeaconPtr f = make_beacon_frame(std::move(out.msg), FrameTruth{n.index, origin, !n.forging, false});
  if (n.forging) board_.post(n.index, VerifiedEntry{f->msg.body.pcid, bid, true, f->digest, ts});
  transmit(n, now, f, nullptr);
  for (auto& e : out.events) {
    push(Item{e.at, 0, Kind::kEventTx, n.index, {}, {}, nullptr,
              make_event_frame(std::move(e.ev), FrameTruth{n.index, origin, true, false})});
  }
}

void Sim::flood_timer(Node& n, SimTime now) {
  // Poisson emissions; a strictly periodic flood would phase-lock with the verifier.
  const double gap_us = n.rng.exponential(1e6 / cfg_.adversary.gamma_dos_hz);
  schedule(Kind::kFloodTimer, now + SimTime(std::max<std::int64_t>(1, std::llround(gap_us))), n.index);
  if (!attacking(n, now)) return;
  auto frame = n.flooder->next(now, status(n, now), std::llround(cfg_.protocol.denm_lifetime_ms));
  transmit(n, now, frame.beacon, frame.event);
}

void Sim::denm_timer(Node& n, SimTime now) {
  schedule(Kind::kDenmTimer, now + from_ms(n.rng.exponential(cfg_.protocol.denm_mean_interval_ms)), n.index);
  if (!cfg_.region.beacon.contains(pos(n, now))) return;
  EventMessage ev;
  ev.event_id = (static_cast<std::uint64_t>(n.index + 1) << 32) | n.denm_seq++;
  ev.kind = EventKind::kDenm;
  ev.created_at_ms = now.count() / 1000;
  ev.lifetime_ms = std::llround(cfg_.protocol.denm_lifetime_ms);
  const auto body = n.rng.bytes<16>();
  ev.body.assign(body.begin(), body.end());
  if (cfg_.scheme == Scheme::kFacilitated) {
    n.tx->schedule_event(std::move(ev), now);
    return;
  }
  // Without facilitators the event goes out at once.
  ev.pc = n.tx->credential().pc;
  ev.signature = dir_.sign(n.tx->credential(), event_signed_bytes(ev));
  transmit(n, now, nullptr, make_event_frame(std::move(ev), FrameTruth{n.index, Origin::kHonest, true, false}));
}

void Sim::sweep(SimTime now) {
  schedule(Kind::kSweep, now + from_ms(cfg_.sweep_interval_ms), -1);
  for (auto& np : nodes_) {
    Node& n = *np;
    if (n.rx == nullptr) continue;
    n.rx->expire_sweep(now);
    pump(n, now);
  }
}

void Sim::finish() {
  for (auto& np : nodes_) {
    Node& n = *np;
    if (n.rx == nullptr) continue;
    if (n.frx) {
      report_.audit().accepted_audited += n.frx->provenance().size();
      if (!n.frx->audit_provenance()) ++report_.audit().provenance_failures;
    }
    n.rx->finish(end_);
  }
  for (auto& np : nodes_) {
    Node& n = *np;
    if (n.rx == nullptr || !report_.outcomes().contains(n.index)) continue;
    const ReceiverStats& s = n.rx->stats();
    CpuRecord c;
    c.verifies = n.cpu.verifies();
    c.hashes = n.cpu.hashes();
    c.verify_ms = to_ms(n.cpu.verify_time());
    c.light_ms = to_ms(n.cpu.light_time());
    c.overrun_ms = to_ms(std::max(SimTime{0}, n.cpu.busy_until() - end_));
    c.time_d_ms = to_ms(s.time_d);
    c.time_nd_ms = to_ms(s.time_nd);
    c.total_d_ms = to_ms(s.total_time_d);
    c.total_nd_ms = to_ms(s.total_time_nd);
    c.beacon_frames_rx = n.beacon_frames_rx;
    report_.set_cpu(n.index, c);
    for (auto& vp : nodes_) {
      if (vp->role == Role::kMaliciousValidator) report_.add_affected_pair(n.index, vp->index);
    }
  }
  if (channel_.counters().frames > 0) report_.set_channel(channel_.counters());
}

MetricsReport Sim::run() {
  build();
  while (!queue_.empty() && queue_.top().t < end_) {
    Item it = queue_.top();
    queue_.pop();
    const SimTime now = it.t;
    switch (it.kind) {
      case Kind::kBeaconTimer:
        beacon_timer(node(it.node), now);
        break;
      case Kind::kFloodTimer:
        flood_timer(node(it.node), now);
        break;
      case Kind::kDenmTimer:
        denm_timer(node(it.node), now);
        break;
      case Kind::kEventTx:
        transmit(node(it.node), now, nullptr, it.event);
        break;
      case Kind::kDeliverBeacon:
      case Kind::kDeliverEvent:
        deliver(it);
        break;
      case Kind::kCpuDone:
        cpu_done(node(it.node), now);
        break;
      case Kind::kCpuWake: {
        Node& n = node(it.node);
        if (n.wake_at == now) n.wake_at.reset();
        pump(n, now);
        break;
      }
      case Kind::kSweep:
        sweep(now);
        break;
    }
  }
  finish();
  return std::move(report_);
}

}  // namespace

MetricsReport run(const SimConfig& config) {
  auto problems = validate(config);
  if (!problems.empty()) throw ConfigError("invalid configuration", std::move(problems));
  Sim sim(config);
  return sim.run();
}

}  // namespace vbeacon
