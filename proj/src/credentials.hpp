#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crypto.hpp"
#include "errors.hpp"

namespace lpsim {

using Time = int64_t;

struct LongTermCertificate {
  uint64_t serial = 0;
  std::string node_id;
  Bytes public_key;
  Bytes issuer_sig;

  Bytes signing_bytes() const;
};

struct Ticket {
  uint64_t serial = 0;  // SN_ticket
  Time t_s = 0;
  Bytes issuer_sig;

  Bytes signing_bytes() const;
};

struct PseudonymCertificate {
  uint64_t serial = 0;  // SN_PC
  Bytes public_key;     // short-term verification / encryption key
  uint8_t s = 0;        // serving flag
  uint32_t group = 0;   // group index, meaningful only when s == 1
  Time t_start = 0;
  Time t_end = 0;
  Bytes issuer_sig;

  Bytes signing_bytes() const;
  bool valid_at(Time t) const { return t_start <= t && t < t_end; }
  bool operator==(const PseudonymCertificate&) const = default;
};

struct CredentialBatch {
  uint64_t ticket_serial = 0;
  std::vector<PseudonymCertificate> pcs;  // contiguous, non-overlapping
};

struct RevocationList {
  uint64_t version = 0;
  std::set<uint64_t> revoked_pc_serials;
  std::set<uint64_t> revoked_ltc_serials;
  Time publish_time = 0;

  bool pc_revoked(uint64_t serial) const { return revoked_pc_serials.count(serial) > 0; }
  bool ltc_revoked(uint64_t serial) const { return revoked_ltc_serials.count(serial) > 0; }

  // Line-oriented text: header "CRL v<version> t<publish_time>", then one
  // "PC <serial>" or "LTC <serial>" line per entry.
  std::string to_text() const;
  static RevocationList from_text(const std::string& text);
  bool operator==(const RevocationList&) const = default;
};

// Pseudonym lifetime windows for a request at t_s: the first window ends at
// the next tau boundary, subsequent windows are full tau periods, and no
// window crosses the Gamma boundary of the request.
std::vector<std::pair<Time, Time>> compute_lifetimes(Time t_s, Time gamma, Time tau);

struct SelfSignedKey {
  Bytes public_key;
  Bytes self_sig;  // proof of possession, signed by the matching private key
};

// LTCA + PCA + resolution record store. The PCA-side state (PcaState) holds
// only ticket serials, never node ids; resolution requires the two-step
// pca_map -> ltca_map chain.
class CredentialSystem {
 public:
  CredentialSystem(crypto::Provider& provider, uint64_t seed, Time gamma, Time tau,
                   double pr_serve, uint32_t groups);

  struct Registration {
    LongTermCertificate ltc;
    Bytes private_key;  // held by the node
  };
  Registration register_node(const std::string& node_id);

  // `request_sig` is the node's signature over encode(t_s, ltc.serial).
  Ticket request_ticket(const LongTermCertificate& ltc, Time t_s, const Bytes& request_sig,
                        Time now);
  static Bytes ticket_request_bytes(Time t_s, uint64_t ltc_serial);

  CredentialBatch issue_pseudonyms(const Ticket& ticket,
                                   const std::vector<SelfSignedKey>& keys, Rng& rng);

  // Resolution-authority access only.
  std::string resolve(uint64_t pc_serial) const;
  RevocationList revoke_node(const std::string& node_id, Time now);
  bool node_revoked(const std::string& node_id) const;

  const RevocationList& crl() const { return crl_; }
  RevocationList publish_crl(Time now);  // bumps the version, stamps the time

  const Bytes& ltca_root_key() const { return ltca_root_.public_key; }
  const Bytes& pca_root_key() const { return pca_root_.public_key; }

  Time gamma() const { return gamma_; }
  Time tau() const { return tau_; }

  // Joined credential view for offline metrics (not visible to any single
  // authority during a run).
  struct PcRecord {
    uint64_t ticket_serial;
    std::string node_id;
    uint64_t ltc_serial;
    uint8_t s;
    uint32_t group;
    Time t_start, t_end;
  };
  std::map<uint64_t, PcRecord> export_pc_table() const;

  // Structural unlinkability check support: everything the PCA stores.
  struct PcaState {
    std::map<uint64_t, uint64_t> pca_map;  // PC serial -> ticket serial
    std::set<uint64_t> consumed_tickets;
    uint64_t next_pc_serial;
  };
  const PcaState& pca_state() const { return pca_; }

 private:
  Time next_gamma_boundary(Time t_s) const;

  crypto::Provider& provider_;
  Rng rng_;
  Time gamma_;
  Time tau_;
  double pr_serve_;
  uint32_t groups_;

  crypto::KeyPair ltca_root_;
  crypto::KeyPair pca_root_;

  struct LtcaNode {
    LongTermCertificate ltc;
    std::vector<std::pair<Time, Time>> ticket_windows;  // pseudonym coverage
    std::vector<uint64_t> ticket_serials;
  };
  std::map<std::string, LtcaNode> ltca_nodes_;
  std::map<uint64_t, std::string> ltca_map_;  // ticket serial -> nid
  uint64_t next_ltc_serial_ = 0;
  uint64_t next_ticket_serial_ = 0;

  PcaState pca_;
  std::map<uint64_t, std::vector<uint64_t>> ticket_pcs_;  // ticket -> PC serials (PCA side)
  struct PcMeta {
    uint8_t s;
    uint32_t group;
    Time t_start, t_end;
  };
  std::map<uint64_t, PcMeta> pc_meta_;

  RevocationList crl_;
};

}  // namespace lpsim
