#include "sim_world.hpp"

#include <cmath>
#include <limits>

namespace lpsim::detail {

const PseudonymCertificate* WorldNode::current_pc(Time now) const {
  for (const auto& pc : pcs)
    if (pc.valid_at(now)) return &pc;
  return nullptr;
}

const Bytes* WorldNode::current_priv(Time now) const {
  for (size_t i = 0; i < pcs.size(); ++i)
    if (pcs[i].valid_at(now)) return &privs[i];
  return nullptr;
}

World::World(const SimConfig& config)
    : cfg(config),
      provider(crypto::make_null_provider()),
      master(cfg.seed),
      adv_seed(master.fork(5).u64()),
      creds(*provider, master.fork(1).u64(), cfg.gamma, cfg.tau, cfg.Pr_serve, cfg.G),
      server([this] {
               Rng r = master.fork(2);
               LbsConfig lc;
               lc.db_seed = master.fork(3).u64();
               lc.t_poi = cfg.T_POI;
               lc.total_types = cfg.T_total;
               lc.entries_per_type = cfg.E;
               lc.payload_size = cfg.payload_size;
               lc.region_count = cfg.region_count();
               lc.groups = cfg.G;
               return LbsServer(*provider, r, lc);
             }()),
      world_rng_(master.fork(4)),
      issue_rng_(master.fork(6)) {
  arrival_rate_ = static_cast<double>(cfg.node_count) /
                  (static_cast<double>(cfg.trip_lo + cfg.trip_hi) / 2.0);
  if (cfg.mobility.rfind("trace:", 0) == 0) {
    trace_mode_ = true;
    trace_ = MobilityTrace::load_file(cfg.mobility.substr(6));
    for (uint32_t nid : trace_.nids)
      if (world_rng_.bernoulli(cfg.participation_ratio)) trace_participants_.insert(nid);
  } else {
    next_arrival_ = -std::log(1.0 - world_rng_.real()) / arrival_rate_;
  }
}

double World::dist(const WorldNode& a, const WorldNode& b) const {
  return std::hypot(a.pos.x - b.pos.x, a.pos.y - b.pos.y);
}

WorldNode& World::spawn_node(Time t, Time despawn_at, Vec2 pos, bool use_walker,
                             uint32_t trace_nid) {
  auto node = std::make_unique<WorldNode>();
  WorldNode& n = *node;
  n.nid = next_nid_++;
  n.node_id = "n" + std::to_string(n.nid);
  n.reg = creds.register_node(n.node_id);
  if (use_walker) {
    n.walker = WaypointWalker(master.fork(3ull * n.nid + 16), cfg.area_width,
                              cfg.area_height, cfg.v_lo, cfg.v_hi);
    n.pos = n.walker.position();
  } else {
    n.pos = pos;
  }
  n.despawn_time = despawn_at;
  n.adversary = world_rng_.bernoulli(cfg.Ratio_adv);
  n.rng = master.fork(3ull * n.nid + 17);
  n.trip = TripRecord{n.nid, n.node_id, t, 0, n.adversary,
                      {{cfg.region_of(n.pos.x, n.pos.y), t}}};
  n.next_query = t + world_rng_.uniform_int(1, cfg.T_query);
  if (trace_mode_) trace_active_[trace_nid] = n.nid;
  active.push_back(std::move(node));
  if (on_spawn) on_spawn(n);
  return n;
}

void World::despawn(WorldNode& n, Time t) {
  n.trip.end = t;
  finished_trips.push_back(n.trip);
  if (on_despawn) on_despawn(n);
}

void World::tick_population(Time t) {
  if (trace_mode_) {
    auto fit = trace_.frames.find(t);
    if (fit == trace_.frames.end()) return;
    std::map<uint32_t, Vec2> present;
    for (const auto& [tn, pos] : fit->second)
      if (trace_participants_.count(tn)) present[tn] = pos;
    for (auto it = active.begin(); it != active.end();) {
      uint32_t tn = 0;
      for (const auto& [k, v] : trace_active_)
        if (v == (*it)->nid) tn = k;
      if (!present.count(tn)) {
        despawn(**it, t);
        trace_active_.erase(tn);
        retired.push_back(std::move(*it));
        it = active.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [tn, pos] : present)
      if (!trace_active_.count(tn))
        spawn_node(t, std::numeric_limits<Time>::max(), pos, false, tn);
    return;
  }

  for (auto it = active.begin(); it != active.end();) {
    if ((*it)->despawn_time <= t) {
      despawn(**it, t);
      retired.push_back(std::move(*it));
      it = active.erase(it);
    } else {
      ++it;
    }
  }
  if (t == 0) {
    // Initial population with residual lifetimes, so departures overlap the
    // Poisson arrival stream from the start.
    for (uint32_t i = 0; i < cfg.node_count; ++i) {
      Time lifetime = world_rng_.uniform_int(cfg.trip_lo, cfg.trip_hi);
      spawn_node(0, world_rng_.uniform_int(1, lifetime), {}, true, 0);
    }
  }
  while (next_arrival_ <= static_cast<double>(t)) {
    spawn_node(t, t + world_rng_.uniform_int(cfg.trip_lo, cfg.trip_hi), {}, true, 0);
    next_arrival_ += -std::log(1.0 - world_rng_.real()) / arrival_rate_;
  }
}

void World::step_mobility(Time t) {
  std::map<uint32_t, Vec2> frame;
  if (trace_mode_) {
    auto fit = trace_.frames.find(t);
    if (fit != trace_.frames.end())
      for (const auto& [tn, pos] : fit->second) frame[tn] = pos;
  }
  for (auto& np : active) {
    WorldNode& n = *np;
    if (trace_mode_) {
      for (const auto& [tn, sim_nid] : trace_active_)
        if (sim_nid == n.nid && frame.count(tn)) n.pos = frame[tn];
    } else if (t > n.trip.start) {
      n.walker.step(1.0);
      n.pos = n.walker.position();
    }
    uint32_t rid = cfg.region_of(n.pos.x, n.pos.y);
    if (rid != n.trip.regions.back().first) n.trip.regions.push_back({rid, t});
  }
}

std::vector<World::IssuedBatch> World::refresh_credentials(WorldNode& n, Time now) {
  std::vector<IssuedBatch> out;
  while (!n.credential_dead) {
    Time cred_end = n.pcs.empty() ? std::numeric_limits<Time>::min() : n.pcs.back().t_end;
    if (cred_end > now) break;
    Time t_s = std::max(now, cred_end);

    Ticket ticket;
    try {
      Bytes req = CredentialSystem::ticket_request_bytes(t_s, n.reg.ltc.serial);
      ticket = creds.request_ticket(n.reg.ltc, t_s,
                                    provider->sign(n.reg.private_key, req), now);
    } catch (const SchemeError& e) {
      if (e.code == ErrorCode::Revoked && cfg.recover_after_revocation) {
        // Rejoin under a fresh registration; the old trip ends here.
        n.trip.end = now;
        finished_trips.push_back(n.trip);
        n.node_id += "r";
        n.reg = creds.register_node(n.node_id);
        n.trip = TripRecord{n.nid, n.node_id, now, 0, n.adversary,
                            {{cfg.region_of(n.pos.x, n.pos.y), now}}};
        continue;
      }
      n.credential_dead = true;
      break;
    }

    auto windows = compute_lifetimes(t_s, cfg.gamma, cfg.tau);
    std::vector<SelfSignedKey> keys;
    std::vector<Bytes> privs;
    for (size_t i = 0; i < windows.size(); ++i) {
      crypto::KeyPair kp = provider->generate_keypair(n.rng);
      keys.push_back({kp.public_key, provider->sign(kp.private_key, kp.public_key)});
      privs.push_back(kp.private_key);
    }
    CredentialBatch batch = creds.issue_pseudonyms(ticket, keys, issue_rng_);
    for (size_t i = 0; i < batch.pcs.size(); ++i) {
      n.pcs.push_back(batch.pcs[i]);
      n.privs.push_back(privs[i]);
    }
    out.push_back({std::move(batch), std::move(privs)});
  }
  return out;
}

std::vector<TripRecord> World::all_trips(Time end) const {
  std::vector<TripRecord> trips = finished_trips;
  for (const auto& n : active) {
    TripRecord t = n->trip;
    t.end = end;
    trips.push_back(t);
  }
  return trips;
}

}  // namespace lpsim::detail
