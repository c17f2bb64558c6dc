#include "lbs_server.hpp"

#include <algorithm>

namespace lpsim {

namespace {

void encode_entry(ByteWriter& w, const PoiEntry& e) {
  w.u32(e.rid);
  w.u16(e.type_index);
  w.u16(e.entry_index);
  w.bytes(e.payload);
}

}  // namespace

Bytes RegionalPoiData::canonical_bytes() const {
  ByteWriter w;
  w.str("REGIONAL");
  w.u32(rid);
  w.i64(epoch);
  w.i64(t_exp);
  w.u8(group.has_value() ? 1 : 0);
  w.u32(group.value_or(0));
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) encode_entry(w, e);
  return w.take();
}

Bytes RegionalPoiData::encoded_size_probe() const {
  ByteWriter w;
  w.raw(canonical_bytes());
  w.bytes(lbs_sig);
  return w.take();
}

std::pair<uint16_t, uint16_t> group_type_range(uint32_t group, uint32_t groups,
                                               uint16_t total_types) {
  uint16_t block = static_cast<uint16_t>((total_types + groups - 1) / groups);
  uint16_t lo = static_cast<uint16_t>(std::min<uint32_t>(group * block, total_types));
  uint16_t hi = static_cast<uint16_t>(std::min<uint32_t>(lo + block, total_types));
  return {lo, hi};
}

LbsServer::LbsServer(crypto::Provider& provider, Rng& rng, const LbsConfig& config)
    : provider_(provider), config_(config) {
  ltc_key_ = provider_.generate_keypair(rng);
}

Bytes LbsServer::payload_for(uint32_t rid, int64_t epoch, uint16_t type,
                             uint16_t entry) const {
  ByteWriter w;
  w.str("POI");
  w.u64(config_.db_seed);
  w.u32(rid);
  w.i64(epoch);
  w.u16(type);
  w.u16(entry);
  return crypto::prf_expand(w.view(), config_.payload_size);
}

std::vector<PoiEntry> LbsServer::entries_for(uint32_t rid, int64_t epoch, uint16_t type_lo,
                                             uint16_t type_hi) const {
  std::vector<PoiEntry> out;
  for (uint16_t t = type_lo; t < type_hi; ++t) {
    for (uint16_t e = 0; e < config_.entries_per_type; ++e) {
      out.push_back(PoiEntry{rid, t, e, payload_for(rid, epoch, t, e)});
    }
  }
  return out;
}

Bytes LbsServer::encode_response(const std::vector<PoiEntry>& entries) {
  ByteWriter w;
  w.str("RESP");
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) encode_entry(w, e);
  return w.take();
}

Bytes LbsServer::response_bytes(const Query& query, int64_t epoch) const {
  std::vector<PoiEntry> entries;
  for (uint16_t t : query.poi_types) {
    if (t >= config_.total_types) continue;
    auto part = entries_for(query.rid, epoch, t, static_cast<uint16_t>(t + 1));
    entries.insert(entries.end(), part.begin(), part.end());
  }
  std::sort(entries.begin(), entries.end(), [](const PoiEntry& a, const PoiEntry& b) {
    return std::tie(a.type_index, a.entry_index) < std::tie(b.type_index, b.entry_index);
  });
  return encode_response(entries);
}

void LbsServer::check_requester(const PseudonymCertificate& pc, Time now) const {
  if (crl_.pc_revoked(pc.serial))
    throw SchemeError(ErrorCode::RevokedPC, "requester PC");
  if (!pc.valid_at(now))
    throw SchemeError(ErrorCode::ExpiredPC, "requester PC");
}

RegionalPoiData LbsServer::get_regional(uint32_t rid, std::optional<uint32_t> group,
                                        const PseudonymCertificate& requester_pc,
                                        Time now) {
  check_requester(requester_pc, now);
  if (rid >= config_.region_count)
    throw SchemeError(ErrorCode::BadRegion, std::to_string(rid));

  RegionalPoiData data;
  data.rid = rid;
  data.epoch = epoch_of(now);
  data.t_exp = epoch_end(data.epoch);
  data.group = config_.groups > 1 ? group : std::nullopt;
  auto [lo, hi] = data.group ? group_type_range(*data.group, config_.groups,
                                                config_.total_types)
                             : std::pair<uint16_t, uint16_t>{0, config_.total_types};
  data.entries = entries_for(rid, data.epoch, lo, hi);
  data.lbs_sig = provider_.sign(ltc_key_.private_key, data.canonical_bytes());

  contact_log_.push_back(
      ContactRecord{requester_pc.serial, rid, now, ContactKind::RegionalFetch});
  return data;
}

LbsServer::SignedResponse LbsServer::answer_query(const Query& query,
                                                  const PseudonymCertificate& requester_pc,
                                                  Time now) {
  check_requester(requester_pc, now);
  if (query.rid >= config_.region_count)
    throw SchemeError(ErrorCode::BadRegion, std::to_string(query.rid));

  SignedResponse out;
  out.resp_bytes = response_bytes(query, epoch_of(now));
  out.sig = provider_.sign(ltc_key_.private_key, out.resp_bytes);
  contact_log_.push_back(
      ContactRecord{requester_pc.serial, query.rid, now, ContactKind::DirectQuery});
  return out;
}

LbsServer::CheckResult LbsServer::check_authenticator(uint64_t qid, const Query& query,
                                                      const Bytes& resp_hash,
                                                      const Authenticator& auth,
                                                      const PseudonymCertificate& serving_pc,
                                                      Time now) {
  if (!verify_authenticator(auth, qid, query, resp_hash, serving_pc.public_key, provider_))
    throw SchemeError(ErrorCode::BadSignature, "authenticator");
  int64_t epoch = epoch_of(auth.timestamp);
  if (auth.timestamp < 0 || epoch > epoch_of(now))
    throw SchemeError(ErrorCode::UnknownEpoch, std::to_string(epoch));

  // Keyed to the epoch of the authenticator so honest-but-stale responses
  // never come back Negative. Only the serving node's PC is logged.
  Bytes honest = response_bytes(query, epoch);
  contact_log_.push_back(
      ContactRecord{serving_pc.serial, query.rid, now, ContactKind::ProactiveCheck});
  return crypto::sha256(honest) == resp_hash ? CheckResult::Positive : CheckResult::Negative;
}

}  // namespace lpsim
