#pragma once

#include <deque>

#include "lbs_server.hpp"

namespace lpsim {

// Synchronous access to the LBS (the channel to the server is out of band
// and zero-delay; only peer traffic rides the radio).
class LbsAccess {
 public:
  virtual ~LbsAccess() = default;
  virtual RegionalPoiData get_regional(uint32_t rid, std::optional<uint32_t> group,
                                       const PseudonymCertificate& pc, Time now) = 0;
  virtual Bytes direct_query(const Query& q, const PseudonymCertificate& pc, Time now) = 0;
  // true == the server confirms the hash (Positive).
  virtual bool check_positive(uint64_t qid, const Query& q, const Bytes& resp_hash,
                              const Authenticator& auth,
                              const PseudonymCertificate& serving_pc, Time now) = 0;
};

struct NodeParams {
  Time t_wait = 60;
  Time t_poi = 1200;
  uint32_t n_redundancy = 3;
  double pr_check = 0.0;
  uint32_t groups = 1;
  uint16_t total_types = 9;
  bool beacon_uniform = false;
  Time t_beacon = 10;
  Time t_beacon_lo = 5, t_beacon_hi = 15;
  // Max beacons accepted from one PC over a 60 s window before a rate report.
  uint32_t beacon_rate_limit = 12;
  bool crl_post_check = true;
};

// Timing gate for opening a response-collection window near a POI expiry.
struct GateDecision {
  enum Kind { Defer, Start } kind;
  Time time;  // Defer: retry at; Start: deadline
};
GateDecision timing_gate(Time now, std::optional<Time> t_exp, Time t_wait);

struct CacheRecord {
  int64_t epoch = 0;
  Time t_exp = 0;
  // Serving-node regional data and its type coverage.
  std::optional<RegionalPoiData> regional;
  uint16_t type_lo = 0, type_hi = 0;
  // Accepted peer/LBS response bytes keyed by the exact queried type set.
  std::map<std::vector<uint16_t>, Bytes> responses;
};

struct QueryAttempt {
  Query query;
  Time start = 0;
  Time deadline = 0;
  uint32_t n_target = 0;
  struct Sent {
    uint64_t qid;
    uint64_t responder_pc_serial;
    Bytes session_key;
  };
  std::vector<Sent> sent;
  struct Received {
    uint64_t qid;
    PeerResponse response;
    Bytes session_key;
    Bytes resp_bytes;
  };
  std::vector<Received> responses;
};

// A concluded attempt retained for CRL post-checking.
struct RetainedAttempt {
  Query query;
  std::vector<QueryAttempt::Received> responses;
  bool accepted = false;
  bool post_checked = false;
};

class Node {
 public:
  Node(uint32_t nid, const NodeParams& params, crypto::Provider& provider,
       Bytes pca_root, Time spawn_time, Rng rng);

  void add_credentials(const CredentialBatch& batch, std::vector<Bytes> private_keys);
  const PseudonymCertificate* current_pc(Time now) const;
  const Bytes* current_priv(Time now) const;
  bool serving(Time now) const;
  Time last_credential_end() const;

  void set_region(uint32_t rid) { rid_ = rid; }
  uint32_t region() const { return rid_; }
  uint32_t nid() const { return nid_; }

  void on_crl_update(const RevocationList& crl) { crl_ = crl; }
  const RevocationList& crl() const { return crl_; }

  // Refresh the regional cache when serving. Returns the data
  // fetched (for byte accounting), nullopt when the cache was already fresh.
  std::optional<RegionalPoiData> maybe_fetch_regional(Time now, LbsAccess& lbs);

  // Returns a beacon when one is due and the node is an active
  // serving node with fresh regional data; always advances the schedule.
  std::optional<Beacon> beacon_tick(Time now);

  enum class StartKind { LocalHit, DirectLbs, Deferred, Listening, Skipped };
  struct StartOutcome {
    StartKind kind;
    Time defer_until = 0;    // Deferred
    size_t lbs_bytes = 0;    // DirectLbs
  };
  // Opens a query attempt. DirectLbs and LocalHit complete immediately.
  StartOutcome start_query(const Query& query, Time now, LbsAccess& lbs);

  struct BeaconResult {
    std::optional<PeerQuery> query;  // unicast back to the beacon sender
    uint64_t target_pc_serial = 0;
    std::optional<MisbehaviorReport> report;
  };
  BeaconResult on_beacon(const Beacon& beacon, Time now);

  // Serving side of a peer query. All failure paths drop silently.
  std::optional<PeerResponse> serve_query(const PeerQuery& pq, Time now);

  // Collects one peer response into the open attempt.
  void on_response(const PeerResponse& pr, Time now);

  bool attempt_active() const { return pending_.has_value(); }
  bool attempt_ready(Time now) const {
    return pending_ && (now >= pending_->deadline ||
                        pending_->responses.size() >= pending_->n_target);
  }

  enum class AttemptResult { PeerHit, LbsHit, Conflicted };
  struct AttemptOutcome {
    AttemptResult result;
    std::optional<MisbehaviorReport> report;
    std::vector<uint64_t> accepted_pc_serials;
    Bytes accepted_bytes;
    Time accepted_timestamp = 0;  // auth timestamp of the accepted response
    size_t lbs_bytes = 0;
    bool proactive_checked = false;
  };
  AttemptOutcome conclude_attempt(Time now, LbsAccess& lbs);

  // Post-checking: re-validate retained attempts once a responder lands
  // on the CRL. Returns new reports.
  std::vector<MisbehaviorReport> crl_post_check(const RevocationList& crl, Time now,
                                                LbsAccess& lbs);

  const std::map<uint32_t, CacheRecord>& cache() const { return cache_; }
  const std::vector<RetainedAttempt>& retained() const { return retained_; }
  std::optional<Time> known_t_exp(uint32_t rid, Time now) const;

 private:
  const CacheRecord* fresh_cache(Time now) const;
  bool cache_covers(const CacheRecord& rec, const std::vector<uint16_t>& types) const;
  Bytes cache_answer(const CacheRecord& rec, const Query& query) const;
  void store_regional(RegionalPoiData data);
  void store_response(const Query& query, Bytes resp_bytes, Time now);
  MisbehaviorReport make_report(ReportKind kind, const Query& query,
                                std::vector<MisbehaviorReport::Evidence> evidence,
                                std::vector<Beacon> beacons, Time now) const;
  std::pair<uint16_t, uint16_t> pc_type_range(const PseudonymCertificate& pc) const;

  uint32_t nid_;
  NodeParams params_;
  crypto::Provider& provider_;
  Bytes pca_root_;
  Rng rng_;

  std::vector<PseudonymCertificate> pcs_;
  std::vector<Bytes> privs_;
  uint32_t rid_ = 0;
  RevocationList crl_;

  std::map<uint32_t, CacheRecord> cache_;
  std::optional<QueryAttempt> pending_;
  std::vector<RetainedAttempt> retained_;
  std::set<uint64_t> seen_qids_;
  Time next_beacon_;

  std::map<uint64_t, std::deque<Beacon>> beacon_window_;  // per sender PC serial
  std::set<uint64_t> rate_reported_;
  std::map<uint32_t, std::pair<Time, Time>> overheard_t_exp_;  // rid -> (heard_at, t_exp)
};

}  // namespace lpsim
