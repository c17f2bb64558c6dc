#include "messages.hpp"

namespace lpsim {

namespace {

constexpr uint8_t kTagBeacon = 1;
constexpr uint8_t kTagPeerQuery = 2;
constexpr uint8_t kTagPeerResponse = 3;
constexpr uint8_t kTagReport = 4;
constexpr uint8_t kTagCrl = 5;

void encode_query(ByteWriter& w, const Query& q) {
  w.u32(q.rid);
  w.u32(static_cast<uint32_t>(q.poi_types.size()));
  for (uint16_t t : q.poi_types) w.u16(t);
}

Query decode_query(ByteReader& r) {
  Query q;
  q.rid = r.u32();
  uint32_t n = r.u32();
  q.poi_types.reserve(n);
  for (uint32_t i = 0; i < n; ++i) q.poi_types.push_back(r.u16());
  return q;
}

void encode_auth(ByteWriter& w, const Authenticator& a) {
  w.i64(a.timestamp);
  w.bytes(a.sig);
}

Authenticator decode_auth(ByteReader& r) {
  Authenticator a;
  a.timestamp = r.i64();
  a.sig = r.bytes();
  return a;
}

void encode_beacon(ByteWriter& w, const Beacon& b) {
  w.u32(b.rid);
  w.i64(b.t_exp);
  w.i64(b.timestamp);
  encode_pc(w, b.sender_pc);
  w.bytes(b.sig);
}

Beacon decode_beacon(ByteReader& r) {
  Beacon b;
  b.rid = r.u32();
  b.t_exp = r.i64();
  b.timestamp = r.i64();
  b.sender_pc = decode_pc(r);
  b.sig = r.bytes();
  return b;
}

void encode_peer_query(ByteWriter& w, const PeerQuery& pq) {
  w.bytes(pq.enc_body);
  w.bytes(pq.enc_session_key);
  w.i64(pq.timestamp);
  w.bytes(pq.sig);
}

PeerQuery decode_peer_query(ByteReader& r) {
  PeerQuery pq;
  pq.enc_body = r.bytes();
  pq.enc_session_key = r.bytes();
  pq.timestamp = r.i64();
  pq.sig = r.bytes();
  return pq;
}

void encode_peer_response(ByteWriter& w, const PeerResponse& pr) {
  w.bytes(pr.enc_body);
  encode_auth(w, pr.auth);
  w.i64(pr.timestamp);
  encode_pc(w, pr.sender_pc);
  w.bytes(pr.sig);
}

PeerResponse decode_peer_response(ByteReader& r) {
  PeerResponse pr;
  pr.enc_body = r.bytes();
  pr.auth = decode_auth(r);
  pr.timestamp = r.i64();
  pr.sender_pc = decode_pc(r);
  pr.sig = r.bytes();
  return pr;
}

void encode_report(ByteWriter& w, const MisbehaviorReport& rep) {
  w.u8(static_cast<uint8_t>(rep.kind));
  encode_query(w, rep.query);
  w.u32(static_cast<uint32_t>(rep.evidence.size()));
  for (const auto& ev : rep.evidence) {
    w.bytes(ev.session_key);
    encode_peer_response(w, ev.response);
  }
  w.u32(static_cast<uint32_t>(rep.beacon_evidence.size()));
  for (const auto& b : rep.beacon_evidence) encode_beacon(w, b);
  w.i64(rep.timestamp);
  encode_pc(w, rep.reporter_pc);
  w.bytes(rep.reporter_sig);
}

MisbehaviorReport decode_report(ByteReader& r) {
  MisbehaviorReport rep;
  uint8_t kind = r.u8();
  if (kind > static_cast<uint8_t>(ReportKind::BeaconRate))
    throw MalformedBytes("bad report kind");
  rep.kind = static_cast<ReportKind>(kind);
  rep.query = decode_query(r);
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    MisbehaviorReport::Evidence ev;
    ev.session_key = r.bytes();
    ev.response = decode_peer_response(r);
    rep.evidence.push_back(std::move(ev));
  }
  uint32_t nb = r.u32();
  for (uint32_t i = 0; i < nb; ++i) rep.beacon_evidence.push_back(decode_beacon(r));
  rep.timestamp = r.i64();
  rep.reporter_pc = decode_pc(r);
  rep.reporter_sig = r.bytes();
  return rep;
}

void encode_crl(ByteWriter& w, const RevocationList& crl) {
  w.u64(crl.version);
  w.i64(crl.publish_time);
  w.u32(static_cast<uint32_t>(crl.revoked_pc_serials.size()));
  for (uint64_t s : crl.revoked_pc_serials) w.u64(s);
  w.u32(static_cast<uint32_t>(crl.revoked_ltc_serials.size()));
  for (uint64_t s : crl.revoked_ltc_serials) w.u64(s);
}

RevocationList decode_crl(ByteReader& r) {
  RevocationList crl;
  crl.version = r.u64();
  crl.publish_time = r.i64();
  uint32_t npc = r.u32();
  for (uint32_t i = 0; i < npc; ++i) crl.revoked_pc_serials.insert(r.u64());
  uint32_t nltc = r.u32();
  for (uint32_t i = 0; i < nltc; ++i) crl.revoked_ltc_serials.insert(r.u64());
  return crl;
}

}  // namespace

void encode_pc(ByteWriter& w, const PseudonymCertificate& pc) {
  w.u64(pc.serial);
  w.bytes(pc.public_key);
  w.u8(pc.s);
  w.u32(pc.group);
  w.i64(pc.t_start);
  w.i64(pc.t_end);
  w.bytes(pc.issuer_sig);
}

PseudonymCertificate decode_pc(ByteReader& r) {
  PseudonymCertificate pc;
  pc.serial = r.u64();
  pc.public_key = r.bytes();
  pc.s = r.u8();
  pc.group = r.u32();
  pc.t_start = r.i64();
  pc.t_end = r.i64();
  pc.issuer_sig = r.bytes();
  return pc;
}

Bytes Query::canonical_bytes() const {
  ByteWriter w;
  encode_query(w, *this);
  return w.take();
}

Bytes Beacon::signing_bytes() const {
  ByteWriter w;
  w.str("BEACON");
  w.u32(rid);
  w.i64(t_exp);
  w.i64(timestamp);
  return w.take();
}

Bytes PeerQuery::signing_bytes() const {
  ByteWriter w;
  w.str("PEER_QUERY");
  w.bytes(enc_body);
  w.bytes(enc_session_key);
  w.i64(timestamp);
  return w.take();
}

Bytes PeerResponse::signing_bytes() const {
  ByteWriter w;
  w.str("PEER_RESPONSE");
  w.bytes(enc_body);
  encode_auth(w, auth);
  w.i64(timestamp);
  return w.take();
}

Bytes MisbehaviorReport::signing_bytes() const {
  ByteWriter w;
  w.str("REPORT");
  MisbehaviorReport copy = *this;
  copy.reporter_sig.clear();
  encode_report(w, copy);
  return w.take();
}

Bytes encode(const Message& msg) {
  ByteWriter w;
  std::visit(
      [&w](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Beacon>) {
          w.u8(kTagBeacon);
          encode_beacon(w, m);
        } else if constexpr (std::is_same_v<T, PeerQuery>) {
          w.u8(kTagPeerQuery);
          encode_peer_query(w, m);
        } else if constexpr (std::is_same_v<T, PeerResponse>) {
          w.u8(kTagPeerResponse);
          encode_peer_response(w, m);
        } else if constexpr (std::is_same_v<T, MisbehaviorReport>) {
          w.u8(kTagReport);
          encode_report(w, m);
        } else {
          w.u8(kTagCrl);
          encode_crl(w, m);
        }
      },
      msg);
  return w.take();
}

Message decode(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  uint8_t tag = r.u8();
  Message msg;
  switch (tag) {
    case kTagBeacon: msg = decode_beacon(r); break;
    case kTagPeerQuery: msg = decode_peer_query(r); break;
    case kTagPeerResponse: msg = decode_peer_response(r); break;
    case kTagReport: msg = decode_report(r); break;
    case kTagCrl: msg = decode_crl(r); break;
    default:
      throw SchemeError(ErrorCode::UnknownMessageKind, std::to_string(tag));
  }
  r.expect_done();
  return msg;
}

std::pair<PeerQuery, Bytes> seal_query(uint64_t qid, const Query& query,
                                       const PseudonymCertificate& querier_pc,
                                       const Bytes& querier_priv,
                                       const PseudonymCertificate& serving_pc, Time now,
                                       crypto::Provider& provider, Rng& rng) {
  if (!serving_pc.valid_at(now))
    throw SchemeError(ErrorCode::ExpiredServingPC, "serving PC not valid now");
  Bytes session_key = rng.bytes(crypto::kAeadKeySize);

  ByteWriter body;
  body.u64(qid);
  body.u32(query.rid);
  body.bytes(query.canonical_bytes());
  encode_pc(body, querier_pc);

  PeerQuery pq;
  pq.enc_body = crypto::aead_encrypt(session_key, body.view(), rng);
  pq.enc_session_key = provider.asym_encrypt(serving_pc.public_key, session_key, rng);
  pq.timestamp = now;
  pq.sig = provider.sign(querier_priv, pq.signing_bytes());
  return {std::move(pq), std::move(session_key)};
}

OpenedQuery open_query(const PeerQuery& pq, const Bytes& serving_priv,
                       crypto::Provider& provider, const Bytes& pca_root,
                       const RevocationList& crl) {
  auto session_key = provider.asym_decrypt(serving_priv, pq.enc_session_key);
  if (!session_key)
    throw SchemeError(ErrorCode::DecryptFailure, "session key");
  auto body = crypto::aead_decrypt(*session_key, pq.enc_body);
  if (!body)
    throw SchemeError(ErrorCode::DecryptFailure, "query body");

  OpenedQuery out;
  try {
    ByteReader r(*body);
    out.qid = r.u64();
    uint32_t rid = r.u32();
    Bytes qbytes = r.bytes();
    ByteReader qr(qbytes);
    out.query = decode_query(qr);
    qr.expect_done();
    out.querier_pc = decode_pc(r);
    r.expect_done();
    if (rid != out.query.rid) throw MalformedBytes("rid mismatch in body");
  } catch (const MalformedBytes&) {
    throw SchemeError(ErrorCode::DecryptFailure, "malformed query body");
  }

  if (!provider.verify(out.querier_pc.public_key, pq.signing_bytes(), pq.sig))
    throw SchemeError(ErrorCode::BadSignature, "peer query");
  if (!provider.verify(pca_root, out.querier_pc.signing_bytes(), out.querier_pc.issuer_sig))
    throw SchemeError(ErrorCode::BadSignature, "querier PC issuer");
  if (!out.querier_pc.valid_at(pq.timestamp))
    throw SchemeError(ErrorCode::ExpiredPC, "querier PC");
  if (crl.pc_revoked(out.querier_pc.serial))
    throw SchemeError(ErrorCode::RevokedPC, "querier PC");
  out.session_key = std::move(*session_key);
  return out;
}

Bytes authenticator_binding(uint64_t qid, const Query& query, const Bytes& resp_hash,
                            Time timestamp) {
  ByteWriter w;
  w.str("AUTH");
  w.u64(qid);
  w.bytes(query.canonical_bytes());
  w.bytes(resp_hash);
  w.i64(timestamp);
  return w.take();
}

Authenticator build_authenticator(uint64_t qid, const Query& query, const Bytes& resp_bytes,
                                  Time timestamp, const Bytes& serving_priv,
                                  crypto::Provider& provider) {
  Bytes binding = authenticator_binding(qid, query, crypto::sha256(resp_bytes), timestamp);
  Authenticator auth;
  auth.timestamp = timestamp;
  auth.sig = provider.sign(serving_priv, binding);
  return auth;
}

bool verify_authenticator(const Authenticator& auth, uint64_t qid, const Query& query,
                          const Bytes& resp_hash, const Bytes& serving_pc_key,
                          crypto::Provider& provider) {
  return provider.verify(serving_pc_key,
                         authenticator_binding(qid, query, resp_hash, auth.timestamp),
                         auth.sig);
}

PeerResponse seal_response(uint64_t qid, const Bytes& resp_bytes, const Bytes& session_key,
                           const Authenticator& auth, const PseudonymCertificate& sender_pc,
                           const Bytes& sender_priv, Time now, Rng& rng,
                           crypto::Provider& provider) {
  ByteWriter body;
  body.u64(qid);
  body.bytes(resp_bytes);
  PeerResponse pr;
  pr.enc_body = crypto::aead_encrypt(session_key, body.view(), rng);
  pr.auth = auth;
  pr.timestamp = now;
  pr.sender_pc = sender_pc;
  pr.sig = provider.sign(sender_priv, pr.signing_bytes());
  return pr;
}

OpenedResponse open_response(const PeerResponse& pr, const Bytes& session_key,
                             crypto::Provider& provider) {
  auto body = crypto::aead_decrypt(session_key, pr.enc_body);
  if (!body)
    throw SchemeError(ErrorCode::DecryptFailure, "response body");
  if (!provider.verify(pr.sender_pc.public_key, pr.signing_bytes(), pr.sig))
    throw SchemeError(ErrorCode::BadSignature, "peer response");
  OpenedResponse out;
  try {
    ByteReader r(*body);
    out.qid = r.u64();
    out.resp_bytes = r.bytes();
    r.expect_done();
  } catch (const MalformedBytes&) {
    throw SchemeError(ErrorCode::DecryptFailure, "malformed response body");
  }
  return out;
}

}  // namespace lpsim
