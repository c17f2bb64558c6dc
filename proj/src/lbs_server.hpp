#pragma once

#include "messages.hpp"

namespace lpsim {

struct PoiEntry {
  uint32_t rid = 0;
  uint16_t type_index = 0;
  uint16_t entry_index = 0;
  Bytes payload;  // PRF(db_seed, rid, epoch, type, entry), fixed size

  bool operator==(const PoiEntry&) const = default;
};

struct RegionalPoiData {
  uint32_t rid = 0;
  int64_t epoch = 0;
  Time t_exp = 0;  // (epoch + 1) * T_POI
  std::optional<uint32_t> group;
  std::vector<PoiEntry> entries;  // ascending (type_index, entry_index)
  Bytes lbs_sig;

  Bytes canonical_bytes() const;  // without the signature
  Bytes encoded_size_probe() const;
};

enum class ContactKind : uint8_t { RegionalFetch, DirectQuery, ProactiveCheck };

struct ContactRecord {
  uint64_t pc_serial;  // all the server ever sees
  uint32_t rid;
  Time time;
  ContactKind kind;
};

struct LbsConfig {
  uint64_t db_seed = 0;
  Time t_poi = 1200;
  uint16_t total_types = 9;
  uint16_t entries_per_type = 10;  // E
  uint32_t payload_size = 500;
  uint32_t region_count = 16;
  uint32_t groups = 1;  // G
};

// Group partition: contiguous blocks of ceil(total_types / G) type indices.
std::pair<uint16_t, uint16_t> group_type_range(uint32_t group, uint32_t groups,
                                               uint16_t total_types);

class LbsServer {
 public:
  LbsServer(crypto::Provider& provider, Rng& rng, const LbsConfig& config);

  int64_t epoch_of(Time now) const { return now / config_.t_poi; }
  Time epoch_end(int64_t epoch) const { return (epoch + 1) * config_.t_poi; }

  RegionalPoiData get_regional(uint32_t rid, std::optional<uint32_t> group,
                               const PseudonymCertificate& requester_pc, Time now);

  struct SignedResponse {
    Bytes resp_bytes;  // canonical response encoding
    Bytes sig;
  };
  SignedResponse answer_query(const Query& query, const PseudonymCertificate& requester_pc,
                              Time now);

  enum class CheckResult { Positive, Negative };
  CheckResult check_authenticator(uint64_t qid, const Query& query, const Bytes& resp_hash,
                                  const Authenticator& auth,
                                  const PseudonymCertificate& serving_pc, Time now);

  // Pure content functions; every honest party sees these exact bytes.
  std::vector<PoiEntry> entries_for(uint32_t rid, int64_t epoch, uint16_t type_lo,
                                    uint16_t type_hi) const;
  Bytes response_bytes(const Query& query, int64_t epoch) const;

  const std::vector<ContactRecord>& contact_log() const { return contact_log_; }
  const Bytes& public_key() const { return ltc_key_.public_key; }
  const LbsConfig& config() const { return config_; }
  void set_crl(const RevocationList& crl) { crl_ = crl; }

  static Bytes encode_response(const std::vector<PoiEntry>& entries);

 private:
  void check_requester(const PseudonymCertificate& pc, Time now) const;
  Bytes payload_for(uint32_t rid, int64_t epoch, uint16_t type, uint16_t entry) const;

  crypto::Provider& provider_;
  LbsConfig config_;
  crypto::KeyPair ltc_key_;
  RevocationList crl_;
  std::vector<ContactRecord> contact_log_;
};

}  // namespace lpsim
