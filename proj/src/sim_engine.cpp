#include "sim_engine.hpp"

#include <algorithm>

#include "sim_world.hpp"

namespace lpsim {

namespace {

using detail::World;
using detail::WorldNode;

struct ServerLink : LbsAccess {
  explicit ServerLink(LbsServer& server) : server(server) {}
  LbsServer& server;

  RegionalPoiData get_regional(uint32_t rid, std::optional<uint32_t> group,
                               const PseudonymCertificate& pc, Time now) override {
    return server.get_regional(rid, group, pc, now);
  }
  Bytes direct_query(const Query& q, const PseudonymCertificate& pc, Time now) override {
    return server.answer_query(q, pc, now).resp_bytes;
  }
  bool check_positive(uint64_t qid, const Query& q, const Bytes& resp_hash,
                      const Authenticator& auth, const PseudonymCertificate& serving_pc,
                      Time now) override {
    return server.check_authenticator(qid, q, resp_hash, auth, serving_pc, now) ==
           LbsServer::CheckResult::Positive;
  }
};

NodeParams node_params(const SimConfig& cfg) {
  NodeParams p;
  p.t_wait = cfg.T_wait;
  p.t_poi = cfg.T_POI;
  p.n_redundancy = cfg.N;
  p.pr_check = cfg.Pr_check;
  p.groups = cfg.G;
  p.total_types = cfg.T_total;
  p.beacon_uniform = cfg.T_beacon_uniform;
  p.t_beacon = cfg.T_beacon;
  p.t_beacon_lo = cfg.T_beacon_lo;
  p.t_beacon_hi = cfg.T_beacon_hi;
  p.beacon_rate_limit = cfg.rate_limit;
  p.crl_post_check = cfg.crl_post_check;
  return p;
}

// Per-node protocol state the engine keeps alongside the shared WorldNode.
struct Peer {
  WorldNode* w = nullptr;
  std::unique_ptr<Node> logic;
  std::optional<Query> deferred;
  Time defer_until = 0;
  Query attempt_query;
  Time attempt_started = 0;
  std::set<uint64_t> adv_qids;                    // malicious replay guard
  std::map<uint64_t, std::pair<Time, Time>> jam;  // pc serial -> (last seen, gap)
};

// Colluding falsifier: byte-identical lies per (query, epoch) across the
// coalition, honestly signed so resolution can pin the signer.
std::optional<PeerResponse> malicious_serve(World& world, Peer& sp, const PeerQuery& pq,
                                            Time now) {
  const PseudonymCertificate* pc = sp.logic->current_pc(now);
  const Bytes* priv = sp.logic->current_priv(now);
  if (!pc || pc->s != 1 || !priv) return std::nullopt;
  OpenedQuery opened;
  try {
    opened = open_query(pq, *priv, *world.provider, world.creds.pca_root_key(),
                        sp.logic->crl());
  } catch (const SchemeError&) {
    return std::nullopt;
  }
  if (sp.adv_qids.count(opened.qid)) return std::nullopt;
  sp.adv_qids.insert(opened.qid);
  if (opened.query.rid != sp.logic->region()) return std::nullopt;

  int64_t epoch = now / world.cfg.T_POI;
  size_t len = world.server.response_bytes(opened.query, epoch).size();
  ByteWriter key;
  key.u64(world.adv_seed);
  key.i64(epoch);
  key.bytes(opened.query.canonical_bytes());
  Bytes fake = crypto::prf_expand(key.view(), len);
  Authenticator auth =
      build_authenticator(opened.qid, opened.query, fake, now, *priv, *world.provider);
  return seal_response(opened.qid, fake, opened.session_key, auth, *pc, *priv, now,
                       sp.w->rng, *world.provider);
}

}  // namespace

RunOutput run_main_scheme(const SimConfig& cfg) {
  World world(cfg);
  ResolutionAuthority ra(*world.provider, world.creds, world.server, cfg.rate_limit);
  ServerLink lbs(world.server);
  NodeParams params = node_params(cfg);

  EventLog log;
  std::set<ExposureRow> coalition;
  std::map<uint32_t, Peer> peers;
  std::map<uint32_t, Peer> retired;  // retained evidence survives the trip
  const bool curious = cfg.adversary_kind == AdversaryKind::Curious;
  const bool malicious = cfg.adversary_kind == AdversaryKind::Malicious;
  const bool jamming = cfg.adversary_kind == AdversaryKind::Jammer;

  world.on_spawn = [&](WorldNode& n) {
    Peer p;
    p.w = &n;
    p.logic = std::make_unique<Node>(n.nid, params, *world.provider,
                                     world.creds.pca_root_key(), n.trip.start,
                                     world.master.fork(3ull * n.nid + 18));
    p.logic->set_region(n.rid());
    p.logic->on_crl_update(world.creds.crl());
    peers.emplace(n.nid, std::move(p));
  };
  world.on_despawn = [&](WorldNode& n) {
    auto it = peers.find(n.nid);
    retired.emplace(n.nid, std::move(it->second));
    peers.erase(it);
  };

  auto usable_pc = [&](Peer& p, Time t) -> const PseudonymCertificate* {
    const PseudonymCertificate* pc = p.logic->current_pc(t);
    if (!pc || world.creds.crl().pc_revoked(pc->serial)) return nullptr;
    return pc;
  };

  auto begin_query = [&](uint32_t nid, Peer& p, const Query& q, Time t) {
    Node::StartOutcome so;
    try {
      so = p.logic->start_query(q, t, lbs);
    } catch (const SchemeError&) {
      return;
    }
    switch (so.kind) {
      case Node::StartKind::LocalHit:
        log.queries.push_back({t, t, nid, q.rid, QuerySource::Local, false, false, {}});
        break;
      case Node::StartKind::DirectLbs:
        log.queries.push_back({t, t, nid, q.rid, QuerySource::Lbs, false, false, {}});
        log.messages.push_back({t, 0, so.lbs_bytes + q.canonical_bytes().size(), nid, 1});
        break;
      case Node::StartKind::Deferred:
        p.deferred = q;
        p.defer_until = so.defer_until;
        break;
      case Node::StartKind::Listening:
        p.attempt_query = q;
        p.attempt_started = t;
        break;
      case Node::StartKind::Skipped:
        break;
    }
  };

  auto file_reports = [&](std::vector<MisbehaviorReport> batch, Time t) {
    bool revoked_any = false;
    for (const auto& rep : batch) {
      ++log.reports_filed;
      try {
        ReportVerdict v = ra.process_report(rep, t);
        if (!v.dishonest_nids.empty()) revoked_any = true;
      } catch (const SchemeError&) {
      }
    }
    return revoked_any;
  };

  for (Time t = 0; t < cfg.duration; ++t) {
    world.tick_population(t);
    for (auto& [nid, p] : peers)
      for (auto& issued : world.refresh_credentials(*p.w, t))
        p.logic->add_credentials(issued.batch, std::move(issued.privs));
    world.step_mobility(t);
    for (auto& [nid, p] : peers) p.logic->set_region(p.w->rid());

    // Serving upkeep.
    for (auto& [nid, p] : peers) {
      if (!usable_pc(p, t)) continue;
      try {
        if (auto data = p.logic->maybe_fetch_regional(t, lbs)) {
          ++log.regional_fetches;
          log.regional_fetch_bytes += data->encoded_size_probe().size();
        }
      } catch (const SchemeError&) {
      }
    }

    // Deferred attempts resume once the old POI epoch has lapsed.
    for (auto& [nid, p] : peers) {
      if (!p.deferred || p.defer_until > t || p.logic->attempt_active()) continue;
      Query q = *p.deferred;
      p.deferred.reset();
      if (q.rid == p.logic->region()) begin_query(nid, p, q, t);
    }

    // Query driver.
    for (auto& [nid, p] : peers) {
      if (p.w->next_query > t) continue;
      if (p.logic->attempt_active() || p.deferred || !usable_pc(p, t)) {
        p.w->next_query = t + 1;
        continue;
      }
      p.w->next_query = t + cfg.T_query;
      Query q{p.logic->region(),
              {static_cast<uint16_t>(p.w->rng.uniform_int(0, cfg.T_total - 1))}};
      begin_query(nid, p, q, t);
    }

    // Beacons, peer queries, peer responses: all delivered within the tick.
    std::vector<MisbehaviorReport> reports;
    for (auto& [snid, sp] : peers) {
      std::optional<Beacon> b = sp.logic->beacon_tick(t);
      if (!b) continue;
      ++log.beacons_sent;

      bool suppressed = false;
      if (jamming) {
        for (auto& [jnid, jp] : peers) {
          if (!jp.w->adversary || jnid == snid) continue;
          if (world.dist(*jp.w, *sp.w) > cfg.comm_range) continue;
          auto it = jp.jam.find(b->sender_pc.serial);
          if (it != jp.jam.end() && it->second.second > 0 &&
              it->second.first + it->second.second == t)
            suppressed = true;
          Time last = it != jp.jam.end() ? it->second.first : -1;
          jp.jam[b->sender_pc.serial] = {t, last >= 0 ? t - last : 0};
        }
      }
      if (suppressed) {
        ++log.beacons_suppressed;
        continue;
      }

      uint32_t receivers = 0;
      for (auto& [rnid, rp] : peers) {
        if (rnid == snid || world.dist(*rp.w, *sp.w) > cfg.comm_range) continue;
        ++receivers;
        if (curious && rp.w->adversary)
          coalition.insert({t, b->sender_pc.serial, b->rid});

        Node::BeaconResult res = rp.logic->on_beacon(*b, t);
        if (res.report) reports.push_back(*res.report);
        if (!res.query) continue;

        log.messages.push_back({t, 2, encode(Message{*res.query}).size(), rnid, 1});
        if (curious) {
          const PseudonymCertificate* qpc = rp.logic->current_pc(t);
          if (qpc && cfg.p2p_encryption && sp.w->adversary)
            coalition.insert({t, qpc->serial, b->rid});
          if (qpc && !cfg.p2p_encryption)
            for (auto& [cnid, cp] : peers)
              if (cp.w->adversary && cnid != rnid &&
                  world.dist(*cp.w, *rp.w) <= cfg.comm_range)
                coalition.insert({t, qpc->serial, b->rid});
        }

        std::optional<PeerResponse> resp;
        if (malicious && sp.w->adversary)
          resp = malicious_serve(world, sp, *res.query, t);
        else
          resp = sp.logic->serve_query(*res.query, t);
        if (resp) {
          log.messages.push_back({t, 3, encode(Message{*resp}).size(), snid, 1});
          rp.logic->on_response(*resp, t);
        }
      }
      log.messages.push_back({t, 1, encode(Message{*b}).size(), snid, receivers});
    }

    // Conclude attempts that hit N responses or their deadline.
    for (auto& [nid, p] : peers) {
      if (!p.logic->attempt_active() || !p.logic->attempt_ready(t)) continue;
      Node::AttemptOutcome out;
      try {
        out = p.logic->conclude_attempt(t, lbs);
      } catch (const SchemeError&) {
        continue;
      }
      QueryEvent ev{p.attempt_started, t,     nid,   p.attempt_query.rid,
                    QuerySource::Lbs,  false, false, {}};
      ev.proactive_checked = out.proactive_checked;
      switch (out.result) {
        case Node::AttemptResult::PeerHit: {
          ev.source = QuerySource::Peer;
          ev.responder_pc_serials = out.accepted_pc_serials;
          Bytes honest = world.server.response_bytes(p.attempt_query,
                                                     out.accepted_timestamp / cfg.T_POI);
          ev.accepted_false = out.accepted_bytes != honest;
          break;
        }
        case Node::AttemptResult::LbsHit:
          ev.source = QuerySource::Lbs;
          if (out.lbs_bytes)
            log.messages.push_back(
                {t, 0, out.lbs_bytes + p.attempt_query.canonical_bytes().size(), nid, 1});
          break;
        case Node::AttemptResult::Conflicted:
          ev.source = QuerySource::Conflicted;
          break;
      }
      if (out.report) reports.push_back(*out.report);
      log.queries.push_back(ev);
    }

    // Resolution and CRL distribution; post-checks may cascade.
    if (file_reports(std::move(reports), t)) {
      for (int round = 0; round < 8; ++round) {
        RevocationList crl = ra.publish_crl(t);
        world.server.set_crl(crl);
        log.messages.push_back(
            {t, 5, encode(Message{crl}).size(), 0, static_cast<uint32_t>(peers.size())});
        std::vector<MisbehaviorReport> more;
        for (auto& [nid, p] : peers) {
          try {
            auto extra = p.logic->crl_post_check(crl, t, lbs);
            more.insert(more.end(), extra.begin(), extra.end());
          } catch (const SchemeError&) {
          }
        }
        if (more.empty() || !file_reports(std::move(more), t)) break;
      }
    }

    if (t % 60 == 0) {
      uint64_t serving = 0, mal_serving = 0, mal_active = 0;
      for (auto& [nid, p] : peers) {
        if (!p.logic->serving(t)) continue;
        ++serving;
        if (!p.w->adversary || !malicious) continue;
        if (world.creds.node_revoked(p.w->node_id)) continue;
        ++mal_serving;
        auto it = p.logic->cache().find(p.logic->region());
        if (it != p.logic->cache().end() && it->second.regional && it->second.t_exp > t)
          ++mal_active;
      }
      double denom = serving ? static_cast<double>(serving) : 1.0;
      log.malicious_serving_ratio.push_back({t, mal_serving / denom});
      log.active_malicious_ratio.push_back({t, mal_active / denom});
    }
  }

  // End-of-run post-checking: every node that ever completed an attempt
  // re-validates its retained evidence against the final CRL.
  if (cfg.crl_post_check) {
    Time t = cfg.duration;
    for (auto* group : {&peers, &retired})
      for (auto& [nid, p] : *group)
        for (auto& issued : world.refresh_credentials(*p.w, t))
          p.logic->add_credentials(issued.batch, std::move(issued.privs));
    for (int round = 0; round < 8; ++round) {
      RevocationList crl = world.creds.crl();
      std::vector<MisbehaviorReport> more;
      for (auto* group : {&peers, &retired})
        for (auto& [nid, p] : *group) {
          try {
            auto extra = p.logic->crl_post_check(crl, t, lbs);
            more.insert(more.end(), extra.begin(), extra.end());
          } catch (const SchemeError&) {
          }
        }
      if (more.empty() || !file_reports(std::move(more), t)) break;
    }
  }

  RunOutput out;
  out.log = std::move(log);
  out.log.coalition_rows.assign(coalition.begin(), coalition.end());
  for (const auto& c : world.server.contact_log())
    if (c.kind != ContactKind::ProactiveCheck)
      out.log.lbs_rows.push_back({c.time, c.pc_serial, c.rid});
  out.log.spurious_reports = ra.spurious_report_count();
  out.log.confirmed_reports = ra.confirmed_report_count();
  out.trips = world.all_trips(cfg.duration);
  out.pc_table = world.creds.export_pc_table();
  out.final_crl = world.creds.crl();
  out.metrics = compute_metrics(out.log, out.trips, out.pc_table, out.final_crl, cfg);
  return out;
}

RunOutput run_simulation(const SimConfig& cfg) {
  cfg.validate();
  return cfg.baseline == BaselineMode::Mobicrowd ? run_mobicrowd(cfg)
                                                 : run_main_scheme(cfg);
}

}  // namespace lpsim
