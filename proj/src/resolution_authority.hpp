#pragma once

#include "lbs_server.hpp"

namespace lpsim {

enum class EvidenceVerdict : uint8_t { Dishonest, Honest, Unverifiable };

struct ReportVerdict {
  uint64_t report_id = 0;
  std::vector<EvidenceVerdict> evidence_verdicts;  // response or beacon evidence
  std::vector<std::string> dishonest_nids;
  uint64_t crl_version_after = 0;
};

// Confirms reported misbehavior against the LBS, then resolves
// and revokes. Resolution happens nowhere else.
class ResolutionAuthority {
 public:
  ResolutionAuthority(crypto::Provider& provider, CredentialSystem& creds,
                      const LbsServer& lbs, uint32_t beacon_rate_limit = 12);

  // Throws BadReporterSignature / RevokedReporter.
  ReportVerdict process_report(const MisbehaviorReport& report, Time now);

  RevocationList publish_crl(Time now) { return creds_.publish_crl(now); }
  const RevocationList& crl() const { return creds_.crl(); }

  uint64_t spurious_report_count() const { return spurious_reports_; }
  uint64_t confirmed_report_count() const { return confirmed_reports_; }
  const std::vector<ReportVerdict>& verdicts() const { return verdicts_; }

 private:
  EvidenceVerdict judge_response(const MisbehaviorReport& report,
                                 const MisbehaviorReport::Evidence& ev,
                                 std::vector<std::string>& dishonest) const;
  void revoke(const std::string& nid, Time now, std::vector<std::string>& dishonest);

  crypto::Provider& provider_;
  CredentialSystem& creds_;
  const LbsServer& lbs_;
  uint32_t beacon_rate_limit_;
  uint64_t next_report_id_ = 0;
  uint64_t spurious_reports_ = 0;
  uint64_t confirmed_reports_ = 0;
  std::vector<ReportVerdict> verdicts_;
};

}  // namespace lpsim
