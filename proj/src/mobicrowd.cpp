#include "sim_world.hpp"

namespace lpsim {

namespace {

using detail::World;
using detail::WorldNode;

// Baseline peer state: no serving roles, whole-region data only, cleartext
// query broadcasts.
struct McPeer {
  WorldNode* w = nullptr;
  std::map<uint32_t, RegionalPoiData> cache;  // rid -> signed regional data
  bool querying = false;
  Query query;
  Time started = 0;
  Time deadline = 0;
  Time next_broadcast = 0;
};

bool has_fresh(const McPeer& p, uint32_t rid, Time t) {
  auto it = p.cache.find(rid);
  return it != p.cache.end() && it->second.t_exp > t;
}

size_t broadcast_bytes(const Query& q, const PseudonymCertificate& pc) {
  ByteWriter w;
  encode_pc(w, pc);
  return q.canonical_bytes().size() + w.view().size();
}

}  // namespace

RunOutput run_mobicrowd(const SimConfig& cfg) {
  World world(cfg);
  EventLog log;
  std::set<ExposureRow> coalition;
  std::map<uint32_t, McPeer> peers;
  const bool curious = cfg.adversary_kind == AdversaryKind::Curious;

  world.on_spawn = [&](WorldNode& n) { peers.emplace(n.nid, McPeer{&n}); };
  world.on_despawn = [&](WorldNode& n) { peers.erase(n.nid); };

  auto store = [&](McPeer& p, RegionalPoiData data) { p.cache[data.rid] = std::move(data); };

  for (Time t = 0; t < cfg.duration; ++t) {
    world.tick_population(t);
    for (auto& [nid, p] : peers) world.refresh_credentials(*p.w, t);
    world.step_mobility(t);

    // Query driver: local hit or start a broadcast session.
    for (auto& [nid, p] : peers) {
      if (p.w->next_query > t) continue;
      if (p.querying || p.w->credential_dead) {
        p.w->next_query = t + 1;
        continue;
      }
      p.w->next_query = t + cfg.T_query;
      uint32_t rid = p.w->rid();
      if (has_fresh(p, rid, t)) {
        log.queries.push_back({t, t, nid, rid, QuerySource::Local, false, false, {}});
        continue;
      }
      p.querying = true;
      p.query = Query{rid, {static_cast<uint16_t>(p.w->rng.uniform_int(0, cfg.T_total - 1))}};
      p.started = t;
      p.deadline = t + cfg.T_wait;
      p.next_broadcast = t;
    }

    // Cleartext broadcasts every 10 s; any cooperative peer with fresh signed
    // regional data answers with the whole thing.
    for (auto& [nid, p] : peers) {
      if (!p.querying || p.next_broadcast > t || t >= p.deadline) continue;
      p.next_broadcast = t + 10;
      const PseudonymCertificate* pc = p.w->current_pc(t);
      if (!pc) continue;

      uint32_t receivers = 0;
      McPeer* responder = nullptr;
      for (auto& [onid, op] : peers) {
        if (onid == nid || world.dist(*op.w, *p.w) > cfg.comm_range) continue;
        ++receivers;
        if (curious && op.w->adversary) coalition.insert({t, pc->serial, p.query.rid});
        if (!responder && has_fresh(op, p.query.rid, t) &&
            op.w->rng.bernoulli(cfg.Ratio_coop))
          responder = &op;
      }
      log.messages.push_back({t, 2, broadcast_bytes(p.query, *pc), nid, receivers});

      if (responder) {
        RegionalPoiData data = responder->cache[p.query.rid];
        size_t bytes = data.encoded_size_probe().size();
        if (world.provider->verify(world.server.public_key(), data.canonical_bytes(),
                                   data.lbs_sig)) {
          log.messages.push_back({t, 3, bytes, responder->w->nid, 1});
          ++log.regional_fetches;  // peer transfers move whole regional data
          log.regional_fetch_bytes += bytes;
          store(p, std::move(data));
          log.queries.push_back(
              {p.started, t, nid, p.query.rid, QuerySource::Peer, false, false, {}});
          p.querying = false;
        }
      }
    }

    // Timeouts fall back to a full regional fetch from the LBS.
    for (auto& [nid, p] : peers) {
      if (!p.querying || t < p.deadline) continue;
      p.querying = false;
      const PseudonymCertificate* pc = p.w->current_pc(t);
      if (!pc) continue;
      try {
        RegionalPoiData data =
            world.server.get_regional(p.query.rid, std::nullopt, *pc, t);
        size_t bytes = data.encoded_size_probe().size();
        ++log.regional_fetches;
        log.regional_fetch_bytes += bytes;
        log.messages.push_back({t, 0, bytes, nid, 1});
        store(p, std::move(data));
        log.queries.push_back(
            {p.started, t, nid, p.query.rid, QuerySource::Lbs, false, false, {}});
      } catch (const SchemeError&) {
      }
    }

    if (t % 60 == 0) {
      log.malicious_serving_ratio.push_back({t, 0.0});
      log.active_malicious_ratio.push_back({t, 0.0});
    }
  }

  RunOutput out;
  out.log = std::move(log);
  out.log.coalition_rows.assign(coalition.begin(), coalition.end());
  for (const auto& c : world.server.contact_log())
    if (c.kind != ContactKind::ProactiveCheck)
      out.log.lbs_rows.push_back({c.time, c.pc_serial, c.rid});
  out.trips = world.all_trips(cfg.duration);
  out.pc_table = world.creds.export_pc_table();
  out.final_crl = world.creds.crl();
  out.metrics = compute_metrics(out.log, out.trips, out.pc_table, out.final_crl, cfg);
  return out;
}

}  // namespace lpsim
