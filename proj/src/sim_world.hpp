#pragma once

#include <functional>
#include <memory>

#include "mobility.hpp"
#include "node_logic.hpp"
#include "resolution_authority.hpp"
#include "sim_engine.hpp"

// Shared run plumbing: population, mobility, and credential upkeep. The main
// scheme and the baseline attach their own per-node protocol state via the
// spawn/despawn hooks.
namespace lpsim::detail {

struct WorldNode {
  uint32_t nid = 0;
  std::string node_id;
  CredentialSystem::Registration reg;
  WaypointWalker walker;
  Vec2 pos;
  Time despawn_time = 0;
  bool adversary = false;
  bool credential_dead = false;  // ticket refresh rejected (revoked)
  Rng rng{0};
  TripRecord trip;
  std::vector<PseudonymCertificate> pcs;  // engine-side copy
  std::vector<Bytes> privs;
  Time next_query = 0;

  const PseudonymCertificate* current_pc(Time now) const;
  const Bytes* current_priv(Time now) const;
  uint32_t rid() const { return trip.regions.back().first; }
};

class World {
 public:
  explicit World(const SimConfig& config);

  const SimConfig& cfg;
  std::unique_ptr<crypto::Provider> provider;
  Rng master;
  uint64_t adv_seed;  // shared by colluding malicious nodes
  CredentialSystem creds;
  LbsServer server;

  std::vector<std::unique_ptr<WorldNode>> active;   // ascending nid
  std::vector<std::unique_ptr<WorldNode>> retired;  // kept for end-of-run checks
  std::vector<TripRecord> finished_trips;

  std::function<void(WorldNode&)> on_spawn;
  std::function<void(WorldNode&)> on_despawn;

  void tick_population(Time t);
  void step_mobility(Time t);  // positions + trip region transitions

  struct IssuedBatch {
    CredentialBatch batch;
    std::vector<Bytes> privs;
  };
  // Extends coverage past `now`; empty once the node is credential-dead.
  std::vector<IssuedBatch> refresh_credentials(WorldNode& n, Time now);

  double dist(const WorldNode& a, const WorldNode& b) const;
  std::vector<TripRecord> all_trips(Time end) const;

 private:
  WorldNode& spawn_node(Time t, Time despawn_at, Vec2 pos, bool use_walker,
                        uint32_t trace_nid);
  void despawn(WorldNode& n, Time t);

  Rng world_rng_;
  Rng issue_rng_;
  uint32_t next_nid_ = 0;
  double arrival_rate_ = 0.0;
  double next_arrival_ = 0.0;

  bool trace_mode_ = false;
  MobilityTrace trace_;
  std::set<uint32_t> trace_participants_;
  std::map<uint32_t, uint32_t> trace_active_;  // trace nid -> sim nid
};

}  // namespace lpsim::detail

namespace lpsim {
RunOutput run_main_scheme(const SimConfig& cfg);
RunOutput run_mobicrowd(const SimConfig& cfg);
}  // namespace lpsim
