#include "node_logic.hpp"

#include <algorithm>

namespace lpsim {

GateDecision timing_gate(Time now, std::optional<Time> t_exp, Time t_wait) {
  if (!t_exp) return {GateDecision::Start, now + t_wait};
  Time remaining = *t_exp - now;
  if (remaining < t_wait / 2) return {GateDecision::Defer, *t_exp};
  if (remaining <= t_wait) return {GateDecision::Start, *t_exp};
  return {GateDecision::Start, now + t_wait};
}

Node::Node(uint32_t nid, const NodeParams& params, crypto::Provider& provider,
           Bytes pca_root, Time spawn_time, Rng rng)
    : nid_(nid), params_(params), provider_(provider), pca_root_(std::move(pca_root)),
      rng_(rng) {
  next_beacon_ = spawn_time + (params_.beacon_uniform
                                   ? rng_.uniform_int(params_.t_beacon_lo, params_.t_beacon_hi)
                                   : params_.t_beacon);
}

void Node::add_credentials(const CredentialBatch& batch, std::vector<Bytes> private_keys) {
  for (size_t i = 0; i < batch.pcs.size(); ++i) {
    pcs_.push_back(batch.pcs[i]);
    privs_.push_back(private_keys[i]);
  }
}

const PseudonymCertificate* Node::current_pc(Time now) const {
  for (const auto& pc : pcs_)
    if (pc.valid_at(now)) return &pc;
  return nullptr;
}

const Bytes* Node::current_priv(Time now) const {
  for (size_t i = 0; i < pcs_.size(); ++i)
    if (pcs_[i].valid_at(now)) return &privs_[i];
  return nullptr;
}

bool Node::serving(Time now) const {
  const PseudonymCertificate* pc = current_pc(now);
  return pc && pc->s == 1;
}

Time Node::last_credential_end() const {
  return pcs_.empty() ? 0 : pcs_.back().t_end;
}

std::pair<uint16_t, uint16_t> Node::pc_type_range(const PseudonymCertificate& pc) const {
  if (params_.groups > 1) return group_type_range(pc.group, params_.groups, params_.total_types);
  return {0, params_.total_types};
}

const CacheRecord* Node::fresh_cache(Time now) const {
  auto it = cache_.find(rid_);
  if (it == cache_.end() || it->second.t_exp <= now) return nullptr;
  return &it->second;
}

bool Node::cache_covers(const CacheRecord& rec, const std::vector<uint16_t>& types) const {
  if (rec.regional) {
    bool all = std::all_of(types.begin(), types.end(), [&](uint16_t t) {
      return t >= rec.type_lo && t < rec.type_hi;
    });
    if (all) return true;
  }
  return rec.responses.count(types) > 0;
}

Bytes Node::cache_answer(const CacheRecord& rec, const Query& query) const {
  if (rec.regional) {
    std::vector<PoiEntry> picked;
    for (const auto& e : rec.regional->entries)
      if (std::find(query.poi_types.begin(), query.poi_types.end(), e.type_index) !=
          query.poi_types.end())
        picked.push_back(e);
    if (!picked.empty() || rec.responses.count(query.poi_types) == 0)
      return LbsServer::encode_response(picked);
  }
  return rec.responses.at(query.poi_types);
}

void Node::store_regional(RegionalPoiData data) {
  CacheRecord& rec = cache_[data.rid];
  if (rec.epoch != data.epoch) rec = CacheRecord{};
  rec.epoch = data.epoch;
  rec.t_exp = data.t_exp;
  if (data.group)
    std::tie(rec.type_lo, rec.type_hi) =
        group_type_range(*data.group, params_.groups, params_.total_types);
  else
    std::tie(rec.type_lo, rec.type_hi) = std::pair<uint16_t, uint16_t>{0, params_.total_types};
  rec.regional = std::move(data);
}

void Node::store_response(const Query& query, Bytes resp_bytes, Time timestamp) {
  int64_t epoch = timestamp / params_.t_poi;
  CacheRecord& rec = cache_[query.rid];
  if (rec.epoch != epoch || rec.t_exp <= timestamp) {
    rec = CacheRecord{};
    rec.epoch = epoch;
    rec.t_exp = (epoch + 1) * params_.t_poi;
  }
  rec.responses[query.poi_types] = std::move(resp_bytes);
}

std::optional<RegionalPoiData> Node::maybe_fetch_regional(Time now, LbsAccess& lbs) {
  if (!serving(now)) return std::nullopt;
  const PseudonymCertificate* pc = current_pc(now);
  auto [lo, hi] = pc_type_range(*pc);
  const CacheRecord* rec = fresh_cache(now);
  if (rec && rec->regional && rec->type_lo <= lo && hi <= rec->type_hi) return std::nullopt;
  std::optional<uint32_t> group =
      params_.groups > 1 ? std::optional<uint32_t>(pc->group) : std::nullopt;
  RegionalPoiData data = lbs.get_regional(rid_, group, *pc, now);
  store_regional(data);
  return data;
}

std::optional<Beacon> Node::beacon_tick(Time now) {
  if (now < next_beacon_) return std::nullopt;
  next_beacon_ = now + (params_.beacon_uniform
                            ? rng_.uniform_int(params_.t_beacon_lo, params_.t_beacon_hi)
                            : params_.t_beacon);
  if (!serving(now)) return std::nullopt;
  const CacheRecord* rec = fresh_cache(now);
  if (!rec || !rec->regional) return std::nullopt;

  const PseudonymCertificate* pc = current_pc(now);
  Beacon b;
  b.rid = rid_;
  b.t_exp = rec->t_exp;
  b.timestamp = now;
  b.sender_pc = *pc;
  b.sig = provider_.sign(*current_priv(now), b.signing_bytes());
  return b;
}

std::optional<Time> Node::known_t_exp(uint32_t rid, Time now) const {
  auto it = overheard_t_exp_.find(rid);
  if (it == overheard_t_exp_.end() || it->second.second <= now) return std::nullopt;
  return it->second.second;
}

Node::StartOutcome Node::start_query(const Query& query, Time now, LbsAccess& lbs) {
  if (query.rid != rid_)
    throw SchemeError(ErrorCode::WrongRegion, std::to_string(query.rid));
  const PseudonymCertificate* pc = current_pc(now);
  if (!pc || pending_) return {StartKind::Skipped};

  if (const CacheRecord* rec = fresh_cache(now); rec && cache_covers(*rec, query.poi_types))
    return {StartKind::LocalHit};

  if (serving(now)) {
    // A serving node has already exposed itself to the server for this
    // region; anything outside its cached group goes straight to the LBS.
    Bytes resp = lbs.direct_query(query, *pc, now);
    StartOutcome out{StartKind::DirectLbs};
    out.lbs_bytes = resp.size();
    store_response(query, std::move(resp), now);
    return out;
  }

  GateDecision gate = timing_gate(now, known_t_exp(rid_, now), params_.t_wait);
  if (gate.kind == GateDecision::Defer) return {StartKind::Deferred, gate.time};

  QueryAttempt attempt;
  attempt.query = query;
  attempt.start = now;
  attempt.deadline = gate.time;
  attempt.n_target = params_.n_redundancy;
  pending_ = std::move(attempt);
  return {StartKind::Listening};
}

MisbehaviorReport Node::make_report(ReportKind kind, const Query& query,
                                    std::vector<MisbehaviorReport::Evidence> evidence,
                                    std::vector<Beacon> beacons, Time now) const {
  MisbehaviorReport rep;
  rep.kind = kind;
  rep.query = query;
  rep.evidence = std::move(evidence);
  rep.beacon_evidence = std::move(beacons);
  rep.timestamp = now;
  rep.reporter_pc = *current_pc(now);
  rep.reporter_sig = provider_.sign(*current_priv(now), rep.signing_bytes());
  return rep;
}

Node::BeaconResult Node::on_beacon(const Beacon& beacon, Time now) {
  BeaconResult out;
  const PseudonymCertificate& spc = beacon.sender_pc;
  if (!provider_.verify(spc.public_key, beacon.signing_bytes(), beacon.sig)) return out;
  if (!provider_.verify(pca_root_, spc.signing_bytes(), spc.issuer_sig)) return out;
  if (!spc.valid_at(now) || crl_.pc_revoked(spc.serial)) return out;

  const PseudonymCertificate* own = current_pc(now);
  if (spc.s != 1) {
    // Beaconing without the serving role is attributable misbehavior.
    if (own) out.report = make_report(ReportKind::InvalidBeacon, Query{}, {}, {beacon}, now);
    return out;
  }

  auto& window = beacon_window_[spc.serial];
  if (std::none_of(window.begin(), window.end(),
                   [&](const Beacon& x) { return x.timestamp == beacon.timestamp; }))
    window.push_back(beacon);
  while (!window.empty() && window.front().timestamp <= now - 60) window.pop_front();
  if (window.size() > params_.beacon_rate_limit && !rate_reported_.count(spc.serial)) {
    rate_reported_.insert(spc.serial);
    if (own)
      out.report =
          make_report(ReportKind::BeaconRate, Query{}, {},
                      std::vector<Beacon>(window.begin(), window.end()), now);
    return out;
  }

  auto& slot = overheard_t_exp_[beacon.rid];
  if (beacon.t_exp > slot.second) slot = {now, beacon.t_exp};

  if (!pending_ || !own) return out;
  QueryAttempt& at = *pending_;
  if (beacon.rid != at.query.rid || beacon.t_exp <= now) return out;
  if (at.sent.size() >= at.n_target) return out;
  if (spc.serial == own->serial) return out;
  for (const auto& s : at.sent)
    if (s.responder_pc_serial == spc.serial) return out;
  auto [lo, hi] = params_.groups > 1
                      ? group_type_range(spc.group, params_.groups, params_.total_types)
                      : std::pair<uint16_t, uint16_t>{0, params_.total_types};
  for (uint16_t t : at.query.poi_types)
    if (t < lo || t >= hi) return out;

  uint64_t qid = rng_.u64();
  auto [pq, ks] = seal_query(qid, at.query, *own, *current_priv(now), spc, now,
                             provider_, rng_);
  at.sent.push_back(QueryAttempt::Sent{qid, spc.serial, std::move(ks)});
  out.query = std::move(pq);
  out.target_pc_serial = spc.serial;
  return out;
}

std::optional<PeerResponse> Node::serve_query(const PeerQuery& pq, Time now) {
  if (!serving(now)) return std::nullopt;
  const CacheRecord* rec = fresh_cache(now);
  if (!rec || !rec->regional) return std::nullopt;

  OpenedQuery opened;
  try {
    opened = open_query(pq, *current_priv(now), provider_, pca_root_, crl_);
  } catch (const SchemeError&) {
    return std::nullopt;
  }
  if (seen_qids_.count(opened.qid)) return std::nullopt;
  seen_qids_.insert(opened.qid);
  if (opened.query.rid != rid_) return std::nullopt;
  for (uint16_t t : opened.query.poi_types)
    if (t < rec->type_lo || t >= rec->type_hi) return std::nullopt;

  Bytes resp_bytes = cache_answer(*rec, opened.query);
  Authenticator auth = build_authenticator(opened.qid, opened.query, resp_bytes, now,
                                           *current_priv(now), provider_);
  return seal_response(opened.qid, resp_bytes, opened.session_key, auth, *current_pc(now),
                       *current_priv(now), now, rng_, provider_);
}

void Node::on_response(const PeerResponse& pr, Time now) {
  if (!pending_) return;
  QueryAttempt& at = *pending_;
  const QueryAttempt::Sent* sent = nullptr;
  for (const auto& s : at.sent)
    if (s.responder_pc_serial == pr.sender_pc.serial) sent = &s;
  if (!sent) return;
  for (const auto& r : at.responses)
    if (r.response.sender_pc.serial == pr.sender_pc.serial) return;

  if (!provider_.verify(pca_root_, pr.sender_pc.signing_bytes(), pr.sender_pc.issuer_sig))
    return;
  if (pr.sender_pc.s != 1 || !pr.sender_pc.valid_at(now) ||
      crl_.pc_revoked(pr.sender_pc.serial))
    return;

  OpenedResponse opened;
  try {
    opened = open_response(pr, sent->session_key, provider_);
  } catch (const SchemeError&) {
    return;
  }
  if (opened.qid != sent->qid) return;
  if (!verify_authenticator(pr.auth, sent->qid, at.query, crypto::sha256(opened.resp_bytes),
                            pr.sender_pc.public_key, provider_))
    return;

  at.responses.push_back(QueryAttempt::Received{sent->qid, pr, sent->session_key,
                                                std::move(opened.resp_bytes)});
}

Node::AttemptOutcome Node::conclude_attempt(Time now, LbsAccess& lbs) {
  QueryAttempt at = std::move(*pending_);
  pending_.reset();
  AttemptOutcome out{AttemptResult::LbsHit};
  const PseudonymCertificate* pc = current_pc(now);

  auto retain = [&](bool accepted) {
    if (at.responses.empty()) return;
    RetainedAttempt r;
    r.query = at.query;
    r.responses = at.responses;
    r.accepted = accepted;
    retained_.push_back(std::move(r));
  };

  size_t j = at.responses.size();
  if (j == 0) {
    if (!pc) return out;
    Bytes resp = lbs.direct_query(at.query, *pc, now);
    out.lbs_bytes = resp.size();
    store_response(at.query, std::move(resp), now);
    return out;
  }

  if (j == 1) {
    const auto& r = at.responses[0];
    if (rng_.bernoulli(params_.pr_check)) {
      out.proactive_checked = true;
      bool positive = lbs.check_positive(r.qid, at.query, crypto::sha256(r.resp_bytes),
                                         r.response.auth, r.response.sender_pc, now);
      if (!positive) {
        out.result = AttemptResult::Conflicted;
        if (pc)
          out.report = make_report(ReportKind::ProactiveNegative, at.query,
                                   {{r.session_key, r.response}}, {}, now);
        retain(false);
        return out;
      }
    }
  } else {
    bool all_equal = std::all_of(at.responses.begin(), at.responses.end(),
                                 [&](const QueryAttempt::Received& r) {
                                   return r.resp_bytes == at.responses[0].resp_bytes;
                                 });
    if (!all_equal) {
      std::vector<MisbehaviorReport::Evidence> evidence;
      for (const auto& r : at.responses) evidence.push_back({r.session_key, r.response});
      out.result = AttemptResult::Conflicted;
      if (pc)
        out.report = make_report(ReportKind::ResponseConflict, at.query,
                                 std::move(evidence), {}, now);
      retain(false);
      return out;
    }
  }

  const auto& accepted = at.responses[0];
  out.result = AttemptResult::PeerHit;
  for (const auto& r : at.responses)
    out.accepted_pc_serials.push_back(r.response.sender_pc.serial);
  out.accepted_bytes = accepted.resp_bytes;
  out.accepted_timestamp = accepted.response.auth.timestamp;
  store_response(at.query, accepted.resp_bytes, accepted.response.auth.timestamp);
  retain(true);
  return out;
}

std::vector<MisbehaviorReport> Node::crl_post_check(const RevocationList& crl, Time now,
                                                    LbsAccess& lbs) {
  crl_ = crl;
  std::vector<MisbehaviorReport> reports;
  if (!params_.crl_post_check || !current_pc(now)) return reports;
  for (auto& at : retained_) {
    if (at.post_checked) continue;
    bool touched = std::any_of(at.responses.begin(), at.responses.end(),
                               [&](const QueryAttempt::Received& r) {
                                 return crl.pc_revoked(r.response.sender_pc.serial);
                               });
    if (!touched) continue;
    at.post_checked = true;
    for (const auto& r : at.responses) {
      if (crl.pc_revoked(r.response.sender_pc.serial)) continue;
      bool positive = lbs.check_positive(r.qid, at.query, crypto::sha256(r.resp_bytes),
                                         r.response.auth, r.response.sender_pc, now);
      if (!positive)
        reports.push_back(make_report(ReportKind::ProactiveNegative, at.query,
                                      {{r.session_key, r.response}}, {}, now));
    }
  }
  return reports;
}

}  // namespace lpsim
