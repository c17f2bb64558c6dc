#include "resolution_authority.hpp"

#include <algorithm>

namespace lpsim {

ResolutionAuthority::ResolutionAuthority(crypto::Provider& provider,
                                         CredentialSystem& creds, const LbsServer& lbs,
                                         uint32_t beacon_rate_limit)
    : provider_(provider), creds_(creds), lbs_(lbs),
      beacon_rate_limit_(beacon_rate_limit) {}

EvidenceVerdict ResolutionAuthority::judge_response(const MisbehaviorReport& report,
                                                    const MisbehaviorReport::Evidence& ev,
                                                    std::vector<std::string>&) const {
  const PseudonymCertificate& spc = ev.response.sender_pc;
  if (!provider_.verify(creds_.pca_root_key(), spc.signing_bytes(), spc.issuer_sig))
    return EvidenceVerdict::Unverifiable;

  OpenedResponse opened;
  try {
    opened = open_response(ev.response, ev.session_key, provider_);
  } catch (const SchemeError&) {
    return EvidenceVerdict::Unverifiable;
  }
  // The authenticator is the sender's own binding of (qid, query, hash, time);
  // without it the evidence proves nothing about the sender.
  if (!verify_authenticator(ev.response.auth, opened.qid, report.query,
                            crypto::sha256(opened.resp_bytes), spc.public_key, provider_))
    return EvidenceVerdict::Unverifiable;

  // Keyed to the evidence's own epoch so stale-but-honest data never convicts.
  int64_t epoch = ev.response.auth.timestamp / lbs_.config().t_poi;
  Bytes honest = lbs_.response_bytes(report.query, epoch);
  return opened.resp_bytes == honest ? EvidenceVerdict::Honest : EvidenceVerdict::Dishonest;
}

void ResolutionAuthority::revoke(const std::string& nid, Time now,
                                 std::vector<std::string>& dishonest) {
  if (std::find(dishonest.begin(), dishonest.end(), nid) == dishonest.end())
    dishonest.push_back(nid);
  if (!creds_.node_revoked(nid)) creds_.revoke_node(nid, now);
}

ReportVerdict ResolutionAuthority::process_report(const MisbehaviorReport& report,
                                                  Time now) {
  const PseudonymCertificate& rpc = report.reporter_pc;
  if (!provider_.verify(creds_.pca_root_key(), rpc.signing_bytes(), rpc.issuer_sig) ||
      !provider_.verify(rpc.public_key, report.signing_bytes(), report.reporter_sig) ||
      !rpc.valid_at(report.timestamp))
    throw SchemeError(ErrorCode::BadReporterSignature, "reporter");
  if (creds_.crl().pc_revoked(rpc.serial))
    throw SchemeError(ErrorCode::RevokedReporter, std::to_string(rpc.serial));

  ReportVerdict verdict;
  verdict.report_id = next_report_id_++;

  if (report.kind == ReportKind::ResponseConflict ||
      report.kind == ReportKind::ProactiveNegative) {
    for (const auto& ev : report.evidence) {
      EvidenceVerdict v = judge_response(report, ev, verdict.dishonest_nids);
      verdict.evidence_verdicts.push_back(v);
      if (v == EvidenceVerdict::Dishonest)
        revoke(creds_.resolve(ev.response.sender_pc.serial), now, verdict.dishonest_nids);
    }
  } else {
    for (const auto& b : report.beacon_evidence) {
      const PseudonymCertificate& spc = b.sender_pc;
      if (!provider_.verify(creds_.pca_root_key(), spc.signing_bytes(), spc.issuer_sig) ||
          !provider_.verify(spc.public_key, b.signing_bytes(), b.sig)) {
        verdict.evidence_verdicts.push_back(EvidenceVerdict::Unverifiable);
        continue;
      }
      bool guilty = false;
      if (report.kind == ReportKind::InvalidBeacon) {
        guilty = spc.s != 1;
      } else {
        // BeaconRate: distinct signed emission times from this PC inside one
        // 60 s window; replayed copies of a single beacon do not count twice.
        std::set<Time> stamps;
        for (const auto& other : report.beacon_evidence)
          if (other.sender_pc.serial == spc.serial &&
              other.timestamp > b.timestamp - 60 && other.timestamp <= b.timestamp &&
              provider_.verify(spc.public_key, other.signing_bytes(), other.sig))
            stamps.insert(other.timestamp);
        guilty = stamps.size() > beacon_rate_limit_;
      }
      verdict.evidence_verdicts.push_back(guilty ? EvidenceVerdict::Dishonest
                                                 : EvidenceVerdict::Honest);
      if (guilty) revoke(creds_.resolve(spc.serial), now, verdict.dishonest_nids);
    }
  }

  if (verdict.dishonest_nids.empty())
    ++spurious_reports_;
  else
    ++confirmed_reports_;
  verdict.crl_version_after = creds_.crl().version;
  verdicts_.push_back(verdict);
  return verdict;
}

}  // namespace lpsim
