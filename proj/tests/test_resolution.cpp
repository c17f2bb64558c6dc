#include "doctest.h"

#include "resolution_authority.hpp"

using namespace lpsim;

namespace {

struct Fixture {
  std::unique_ptr<crypto::Provider> provider = crypto::make_null_provider();
  Rng rng{21};
  CredentialSystem creds{*provider, 5, 600, 300, 0.5, 1};
  LbsServer lbs = make_lbs();
  ResolutionAuthority ra{*provider, creds, lbs};

  LbsServer make_lbs() {
    LbsConfig cfg;
    cfg.db_seed = 77;
    return LbsServer(*provider, rng, cfg);
  }

  struct Actor {
    std::string nid;
    PseudonymCertificate pc;
    Bytes priv;
  };

  // Issues batches until the serving flag comes out as requested.
  Actor make_actor(const std::string& base, uint8_t want_s) {
    for (int attempt = 0;; ++attempt) {
      std::string nid = base + "-" + std::to_string(attempt);
      auto reg = creds.register_node(nid);
      Bytes req = CredentialSystem::ticket_request_bytes(0, reg.ltc.serial);
      Ticket t = creds.request_ticket(reg.ltc, 0, provider->sign(reg.private_key, req), 0);
      std::vector<SelfSignedKey> keys;
      std::vector<Bytes> privs;
      for (int i = 0; i < 2; ++i) {
        auto kp = provider->generate_keypair(rng);
        keys.push_back({kp.public_key, provider->sign(kp.private_key, kp.public_key)});
        privs.push_back(kp.private_key);
      }
      CredentialBatch batch = creds.issue_pseudonyms(t, keys, rng);
      if (batch.pcs[0].s == want_s) return Actor{nid, batch.pcs[0], privs[0]};
    }
  }

  MisbehaviorReport::Evidence make_evidence(const Actor& sender, const Query& q,
                                            const Bytes& resp_bytes, Time ts) {
    uint64_t qid = rng.u64();
    Bytes ks = rng.bytes(crypto::kAeadKeySize);
    Authenticator auth =
        build_authenticator(qid, q, resp_bytes, ts, sender.priv, *provider);
    PeerResponse pr = seal_response(qid, resp_bytes, ks, auth, sender.pc, sender.priv, ts,
                                    rng, *provider);
    return {ks, pr};
  }

  MisbehaviorReport make_report(const Actor& reporter, ReportKind kind, const Query& q,
                                std::vector<MisbehaviorReport::Evidence> evidence,
                                std::vector<Beacon> beacons, Time ts) {
    MisbehaviorReport rep;
    rep.kind = kind;
    rep.query = q;
    rep.evidence = std::move(evidence);
    rep.beacon_evidence = std::move(beacons);
    rep.timestamp = ts;
    rep.reporter_pc = reporter.pc;
    rep.reporter_sig = provider->sign(reporter.priv, rep.signing_bytes());
    return rep;
  }

  Beacon make_beacon(const Actor& sender, uint32_t rid, Time ts) {
    Beacon b{.rid = rid, .t_exp = 1200, .timestamp = ts, .sender_pc = sender.pc};
    b.sig = provider->sign(sender.priv, b.signing_bytes());
    return b;
  }
};

}  // namespace

TEST_CASE("conflict report: the falsifier is convicted, the honest peer is not") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto honest = f.make_actor("hon", 1);
  auto liar = f.make_actor("liar", 1);

  Query q{.rid = 3, .poi_types = {2}};
  Bytes truth = f.lbs.response_bytes(q, 0);
  Bytes lie = truth;
  lie[lie.size() / 2] ^= 1;

  auto rep = f.make_report(reporter, ReportKind::ResponseConflict, q,
                           {f.make_evidence(honest, q, truth, 100),
                            f.make_evidence(liar, q, lie, 100)},
                           {}, 120);
  ReportVerdict v = f.ra.process_report(rep, 120);
  REQUIRE(v.evidence_verdicts.size() == 2);
  CHECK(v.evidence_verdicts[0] == EvidenceVerdict::Honest);
  CHECK(v.evidence_verdicts[1] == EvidenceVerdict::Dishonest);
  CHECK(v.dishonest_nids == std::vector<std::string>{std::string(liar.nid)});
  CHECK(f.creds.node_revoked(liar.nid));
  CHECK_FALSE(f.creds.node_revoked(honest.nid));
  CHECK(f.creds.crl().pc_revoked(liar.pc.serial));
  CHECK(v.crl_version_after >= 1);
  CHECK(f.ra.confirmed_report_count() == 1);
}

TEST_CASE("spurious report: all honest, nothing revoked, reporter unpunished") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto a = f.make_actor("a", 1);
  auto b = f.make_actor("b", 1);
  Query q{.rid = 3, .poi_types = {2}};
  Bytes truth = f.lbs.response_bytes(q, 0);

  auto rep = f.make_report(
      reporter, ReportKind::ResponseConflict, q,
      {f.make_evidence(a, q, truth, 100), f.make_evidence(b, q, truth, 100)}, {}, 120);
  ReportVerdict v = f.ra.process_report(rep, 120);
  CHECK(v.dishonest_nids.empty());
  CHECK(v.evidence_verdicts ==
        std::vector<EvidenceVerdict>{EvidenceVerdict::Honest, EvidenceVerdict::Honest});
  CHECK(f.creds.crl().revoked_pc_serials.empty());
  CHECK(f.ra.spurious_report_count() == 1);

  // The reporter can keep reporting.
  auto rep2 = f.make_report(reporter, ReportKind::ResponseConflict, q,
                            {f.make_evidence(a, q, truth, 100)}, {}, 130);
  CHECK_NOTHROW(f.ra.process_report(rep2, 130));
}

TEST_CASE("honest-but-stale evidence is judged in its own epoch") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto stale = f.make_actor("stale", 1);
  Query q{.rid = 3, .poi_types = {2}};
  Bytes old_truth = f.lbs.response_bytes(q, 0);  // epoch 0

  // Processed during epoch 1 — must still be Honest.
  auto rep = f.make_report(reporter, ReportKind::ResponseConflict, q,
                           {f.make_evidence(stale, q, old_truth, 100)}, {}, 120);
  ReportVerdict v = f.ra.process_report(rep, 1300);
  CHECK(v.evidence_verdicts == std::vector<EvidenceVerdict>{EvidenceVerdict::Honest});
  CHECK(v.dishonest_nids.empty());
}

TEST_CASE("unverifiable evidence never convicts") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto target = f.make_actor("t", 1);
  Query q{.rid = 3, .poi_types = {2}};
  Bytes lie = f.rng.bytes(64);

  SUBCASE("session key fails to decrypt") {
    auto ev = f.make_evidence(target, q, lie, 100);
    ev.session_key = f.rng.bytes(crypto::kAeadKeySize);
    auto rep = f.make_report(reporter, ReportKind::ProactiveNegative, q, {ev}, {}, 120);
    ReportVerdict v = f.ra.process_report(rep, 120);
    CHECK(v.evidence_verdicts ==
          std::vector<EvidenceVerdict>{EvidenceVerdict::Unverifiable});
    CHECK_FALSE(f.creds.node_revoked(target.nid));
  }
  SUBCASE("authenticator does not match the decrypted bytes") {
    auto good = f.make_evidence(target, q, f.lbs.response_bytes(q, 0), 100);
    auto bad = f.make_evidence(target, q, lie, 100);
    bad.response.auth = good.response.auth;  // mismatched binding
    // Re-sign the outer envelope so only the auth is wrong.
    bad.response.sig = f.provider->sign(target.priv, bad.response.signing_bytes());
    auto rep = f.make_report(reporter, ReportKind::ProactiveNegative, q, {bad}, {}, 120);
    ReportVerdict v = f.ra.process_report(rep, 120);
    CHECK(v.evidence_verdicts ==
          std::vector<EvidenceVerdict>{EvidenceVerdict::Unverifiable});
    CHECK_FALSE(f.creds.node_revoked(target.nid));
  }
  SUBCASE("forged sender PC") {
    auto ev = f.make_evidence(target, q, lie, 100);
    ev.response.sender_pc.issuer_sig = f.rng.bytes(64);
    auto rep = f.make_report(reporter, ReportKind::ProactiveNegative, q, {ev}, {}, 120);
    ReportVerdict v = f.ra.process_report(rep, 120);
    CHECK(v.evidence_verdicts ==
          std::vector<EvidenceVerdict>{EvidenceVerdict::Unverifiable});
  }
}

TEST_CASE("reporter gatekeeping") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto target = f.make_actor("t", 1);
  Query q{.rid = 3, .poi_types = {2}};
  auto rep = f.make_report(reporter, ReportKind::ProactiveNegative, q,
                           {f.make_evidence(target, q, f.rng.bytes(40), 100)}, {}, 120);

  SUBCASE("bad reporter signature") {
    rep.reporter_sig[0] ^= 1;
    CHECK_THROWS_WITH_AS(f.ra.process_report(rep, 120),
                         doctest::Contains("BadReporterSignature"), SchemeError);
  }
  SUBCASE("revoked reporter") {
    f.creds.revoke_node(reporter.nid, 100);
    CHECK_THROWS_WITH_AS(f.ra.process_report(rep, 120),
                         doctest::Contains("RevokedReporter"), SchemeError);
  }
}

TEST_CASE("invalid beacon report: non-serving beaconer revoked") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto impostor = f.make_actor("imp", 0);
  auto genuine = f.make_actor("gen", 1);

  auto rep = f.make_report(reporter, ReportKind::InvalidBeacon, Query{}, {},
                           {f.make_beacon(impostor, 3, 100), f.make_beacon(genuine, 3, 100)},
                           120);
  ReportVerdict v = f.ra.process_report(rep, 120);
  REQUIRE(v.evidence_verdicts.size() == 2);
  CHECK(v.evidence_verdicts[0] == EvidenceVerdict::Dishonest);
  CHECK(v.evidence_verdicts[1] == EvidenceVerdict::Honest);
  CHECK(f.creds.node_revoked(impostor.nid));
  CHECK_FALSE(f.creds.node_revoked(genuine.nid));
}

TEST_CASE("beacon rate report") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto flooder = f.make_actor("flood", 1);

  SUBCASE("13 distinct emissions in 60 s convict") {
    std::vector<Beacon> evidence;
    for (int i = 0; i < 13; ++i) evidence.push_back(f.make_beacon(flooder, 3, 100 + i));
    auto rep = f.make_report(reporter, ReportKind::BeaconRate, Query{}, {}, evidence, 120);
    ReportVerdict v = f.ra.process_report(rep, 120);
    CHECK(std::count(v.evidence_verdicts.begin(), v.evidence_verdicts.end(),
                     EvidenceVerdict::Dishonest) > 0);
    CHECK(f.creds.node_revoked(flooder.nid));
  }
  SUBCASE("replayed copies do not convict") {
    Beacon one = f.make_beacon(flooder, 3, 100);
    std::vector<Beacon> evidence(13, one);
    auto rep = f.make_report(reporter, ReportKind::BeaconRate, Query{}, {}, evidence, 120);
    ReportVerdict v = f.ra.process_report(rep, 120);
    CHECK(std::count(v.evidence_verdicts.begin(), v.evidence_verdicts.end(),
                     EvidenceVerdict::Dishonest) == 0);
    CHECK_FALSE(f.creds.node_revoked(flooder.nid));
  }
  SUBCASE("nominal-rate beacons do not convict") {
    std::vector<Beacon> evidence;
    for (int i = 0; i < 6; ++i) evidence.push_back(f.make_beacon(flooder, 3, 100 + 10 * i));
    auto rep = f.make_report(reporter, ReportKind::BeaconRate, Query{}, {}, evidence, 170);
    ReportVerdict v = f.ra.process_report(rep, 170);
    CHECK(std::count(v.evidence_verdicts.begin(), v.evidence_verdicts.end(),
                     EvidenceVerdict::Dishonest) == 0);
  }
}

TEST_CASE("two dishonest senders in one report land in one published CRL") {
  Fixture f;
  auto reporter = f.make_actor("rep", 0);
  auto liar1 = f.make_actor("l1", 1);
  auto liar2 = f.make_actor("l2", 1);
  Query q{.rid = 3, .poi_types = {2}};
  Bytes lie = f.rng.bytes(64);

  auto rep = f.make_report(
      reporter, ReportKind::ResponseConflict, q,
      {f.make_evidence(liar1, q, lie, 100), f.make_evidence(liar2, q, lie, 100)}, {}, 120);
  ReportVerdict v = f.ra.process_report(rep, 120);
  CHECK(v.dishonest_nids.size() == 2);
  RevocationList crl = f.ra.publish_crl(130);
  CHECK(crl.pc_revoked(liar1.pc.serial));
  CHECK(crl.pc_revoked(liar2.pc.serial));

  // Republishing with nothing new: identical entries, bumped version.
  RevocationList again = f.ra.publish_crl(140);
  CHECK(again.revoked_pc_serials == crl.revoked_pc_serials);
  CHECK(again.version == crl.version + 1);
}
