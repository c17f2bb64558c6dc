#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "credentials.hpp"

namespace lpsim {

struct Query {
  uint32_t rid = 0;
  std::vector<uint16_t> poi_types;  // sorted, unique, non-empty

  Bytes canonical_bytes() const;
  bool operator==(const Query&) const = default;
};

struct Beacon {
  uint32_t rid = 0;
  Time t_exp = 0;  // expiry of the sender's cached regional POI data
  Time timestamp = 0;
  PseudonymCertificate sender_pc;
  Bytes sig;

  Bytes signing_bytes() const;
  bool operator==(const Beacon&) const = default;
};

struct PeerQuery {
  Bytes enc_body;         // E_Ks(qid, rid, query, querier_pc)
  Bytes enc_session_key;  // E_SK(Ks) under the serving node's PC key
  Time timestamp = 0;
  Bytes sig;  // by the querier's PC; the PC itself rides inside enc_body

  Bytes signing_bytes() const;
  bool operator==(const PeerQuery&) const = default;
};

struct Authenticator {
  Time timestamp = 0;
  Bytes sig;  // serving node's PC over (qid, query, H(resp), timestamp)

  bool operator==(const Authenticator&) const = default;
};

struct PeerResponse {
  Bytes enc_body;  // E_Ks(qid, resp)
  Authenticator auth;
  Time timestamp = 0;
  PseudonymCertificate sender_pc;
  Bytes sig;

  Bytes signing_bytes() const;
  bool operator==(const PeerResponse&) const = default;
};

enum class ReportKind : uint8_t {
  ResponseConflict = 0,
  ProactiveNegative = 1,
  InvalidBeacon = 2,
  BeaconRate = 3,
};

struct MisbehaviorReport {
  ReportKind kind = ReportKind::ResponseConflict;
  Query query;
  struct Evidence {
    Bytes session_key;
    PeerResponse response;  // exactly as received
    bool operator==(const Evidence&) const = default;
  };
  std::vector<Evidence> evidence;
  std::vector<Beacon> beacon_evidence;  // for InvalidBeacon / BeaconRate
  Time timestamp = 0;
  PseudonymCertificate reporter_pc;
  Bytes reporter_sig;

  Bytes signing_bytes() const;
  bool operator==(const MisbehaviorReport&) const = default;
};

using Message =
    std::variant<Beacon, PeerQuery, PeerResponse, MisbehaviorReport, RevocationList>;

// Wire kind tags: 1=Beacon, 2=PeerQuery, 3=PeerResponse, 4=MisbehaviorReport, 5=CRL.
Bytes encode(const Message& msg);
Message decode(std::span<const uint8_t> bytes);

// Canonical sub-encodings (shared by the codec and the signature bindings).
void encode_pc(ByteWriter& w, const PseudonymCertificate& pc);
PseudonymCertificate decode_pc(ByteReader& r);

struct OpenedQuery {
  uint64_t qid = 0;
  Query query;
  PseudonymCertificate querier_pc;
  Bytes session_key;
};

std::pair<PeerQuery, Bytes> seal_query(uint64_t qid, const Query& query,
                                       const PseudonymCertificate& querier_pc,
                                       const Bytes& querier_priv,
                                       const PseudonymCertificate& serving_pc, Time now,
                                       crypto::Provider& provider, Rng& rng);

// Throws DecryptFailure / BadSignature / ExpiredPC / RevokedPC.
OpenedQuery open_query(const PeerQuery& pq, const Bytes& serving_priv,
                       crypto::Provider& provider, const Bytes& pca_root,
                       const RevocationList& crl);

Authenticator build_authenticator(uint64_t qid, const Query& query, const Bytes& resp_bytes,
                                  Time timestamp, const Bytes& serving_priv,
                                  crypto::Provider& provider);
Bytes authenticator_binding(uint64_t qid, const Query& query, const Bytes& resp_hash,
                            Time timestamp);
bool verify_authenticator(const Authenticator& auth, uint64_t qid, const Query& query,
                          const Bytes& resp_hash, const Bytes& serving_pc_key,
                          crypto::Provider& provider);

PeerResponse seal_response(uint64_t qid, const Bytes& resp_bytes, const Bytes& session_key,
                           const Authenticator& auth, const PseudonymCertificate& sender_pc,
                           const Bytes& sender_priv, Time now, Rng& rng,
                           crypto::Provider& provider);

struct OpenedResponse {
  uint64_t qid = 0;
  Bytes resp_bytes;
};

// Decrypts and checks the outer signature; authenticator binding is the
// caller's cross-check.
OpenedResponse open_response(const PeerResponse& pr, const Bytes& session_key,
                             crypto::Provider& provider);

}  // namespace lpsim
