#include "doctest.h"

#include "messages.hpp"

using namespace lpsim;

namespace {

struct Party {
  crypto::KeyPair kp;
  PseudonymCertificate pc;
};

struct Fixture {
  std::unique_ptr<crypto::Provider> provider = crypto::make_null_provider();
  Rng rng{31};
  crypto::KeyPair pca = provider->generate_keypair(rng);

  Party make_party(uint64_t serial, uint8_t s, Time t_start, Time t_end) {
    Party p;
    p.kp = provider->generate_keypair(rng);
    p.pc.serial = serial;
    p.pc.public_key = p.kp.public_key;
    p.pc.s = s;
    p.pc.t_start = t_start;
    p.pc.t_end = t_end;
    p.pc.issuer_sig = provider->sign(pca.private_key, p.pc.signing_bytes());
    return p;
  }
};

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

TEST_CASE("message codec round-trips") {
  Fixture f;
  Party p = f.make_party(5, 1, 0, 300);

  Beacon b{.rid = 7, .t_exp = 1200, .timestamp = 100, .sender_pc = p.pc,
           .sig = f.rng.bytes(64)};
  PeerQuery pq{.enc_body = f.rng.bytes(40), .enc_session_key = f.rng.bytes(33),
               .timestamp = 42, .sig = f.rng.bytes(64)};
  PeerResponse pr{.enc_body = f.rng.bytes(80),
                  .auth = Authenticator{.timestamp = 50, .sig = f.rng.bytes(64)},
                  .timestamp = 51, .sender_pc = p.pc, .sig = f.rng.bytes(64)};
  MisbehaviorReport rep{.kind = ReportKind::ResponseConflict,
                        .query = Query{.rid = 7, .poi_types = {1, 4}},
                        .evidence = {{f.rng.bytes(32), pr}, {f.rng.bytes(32), pr}},
                        .beacon_evidence = {b},
                        .timestamp = 55,
                        .reporter_pc = p.pc,
                        .reporter_sig = f.rng.bytes(64)};
  RevocationList crl{.version = 2, .revoked_pc_serials = {1, 2},
                     .revoked_ltc_serials = {9}, .publish_time = 60};

  for (Message m : std::vector<Message>{b, pq, pr, rep, crl}) {
    Bytes wire = encode(m);
    CHECK(decode(wire) == m);
  }

  SUBCASE("unknown tag") {
    Bytes wire = encode(Message{b});
    wire[0] = 99;
    CHECK_THROWS_AS(decode(wire), SchemeError);
  }
  SUBCASE("trailing garbage") {
    Bytes wire = encode(Message{b});
    wire.push_back(0);
    CHECK_THROWS_AS(decode(wire), MalformedBytes);
  }
  SUBCASE("truncation never crashes") {
    Bytes wire = encode(Message{rep});
    for (size_t cut = 0; cut < wire.size(); ++cut) {
      Bytes prefix(wire.begin(), wire.begin() + cut);
      CHECK_THROWS(decode(prefix));
    }
  }
}

TEST_CASE("seal/open query") {
  Fixture f;
  Party querier = f.make_party(1, 0, 0, 300);
  Party server = f.make_party(2, 1, 0, 300);
  RevocationList crl;
  Query q{.rid = 3, .poi_types = {2}};

  auto [pq, ks] = seal_query(9, q, querier.pc, querier.kp.private_key, server.pc, 100,
                             *f.provider, f.rng);
  OpenedQuery opened = open_query(pq, server.kp.private_key, *f.provider,
                                  f.pca.public_key, crl);
  CHECK(opened.qid == 9);
  CHECK(opened.query == q);
  CHECK(opened.querier_pc == querier.pc);
  CHECK(opened.session_key == ks);

  SUBCASE("expired serving PC refuses to seal") {
    CHECK_THROWS_WITH_AS(seal_query(9, q, querier.pc, querier.kp.private_key, server.pc,
                                    300, *f.provider, f.rng),
                         doctest::Contains("ExpiredServingPC"), SchemeError);
  }
  SUBCASE("wrong recipient cannot open") {
    Party other = f.make_party(3, 1, 0, 300);
    CHECK_THROWS_WITH_AS(
        open_query(pq, other.kp.private_key, *f.provider, f.pca.public_key, crl),
        doctest::Contains("DecryptFailure"), SchemeError);
  }
  SUBCASE("tampered outer signature") {
    PeerQuery bad = pq;
    bad.timestamp += 1;
    CHECK_THROWS_WITH_AS(
        open_query(bad, server.kp.private_key, *f.provider, f.pca.public_key, crl),
        doctest::Contains("BadSignature"), SchemeError);
  }
  SUBCASE("querier PC not signed by the PCA") {
    Party forged = f.make_party(4, 0, 0, 300);
    forged.pc.issuer_sig = f.rng.bytes(64);
    auto [pq2, ks2] = seal_query(9, q, forged.pc, forged.kp.private_key, server.pc, 100,
                                 *f.provider, f.rng);
    CHECK_THROWS_WITH_AS(
        open_query(pq2, server.kp.private_key, *f.provider, f.pca.public_key, crl),
        doctest::Contains("BadSignature"), SchemeError);
  }
  SUBCASE("querier PC expired at send time") {
    Party stale = f.make_party(5, 0, 0, 50);
    PeerQuery pq2 = pq;
    // Rebuild with a querier PC that is stale at the timestamp.
    ByteWriter body;
    body.u64(9);
    body.u32(q.rid);
    body.bytes(q.canonical_bytes());
    encode_pc(body, stale.pc);
    pq2.enc_body = crypto::aead_encrypt(ks, body.view(), f.rng);
    pq2.sig = f.provider->sign(stale.kp.private_key, pq2.signing_bytes());
    CHECK_THROWS_WITH_AS(
        open_query(pq2, server.kp.private_key, *f.provider, f.pca.public_key, crl),
        doctest::Contains("ExpiredPC"), SchemeError);
  }
  SUBCASE("revoked querier") {
    crl.revoked_pc_serials.insert(querier.pc.serial);
    CHECK_THROWS_WITH_AS(
        open_query(pq, server.kp.private_key, *f.provider, f.pca.public_key, crl),
        doctest::Contains("RevokedPC"), SchemeError);
  }
}

TEST_CASE("authenticator binds qid, query, response hash, and time") {
  Fixture f;
  Party server = f.make_party(2, 1, 0, 300);
  Query q{.rid = 3, .poi_types = {2, 5}};
  Bytes resp = to_bytes("response payload");
  Authenticator auth =
      build_authenticator(9, q, resp, 120, server.kp.private_key, *f.provider);
  Bytes h = crypto::sha256(resp);

  CHECK(verify_authenticator(auth, 9, q, h, server.pc.public_key, *f.provider));
  CHECK_FALSE(verify_authenticator(auth, 10, q, h, server.pc.public_key, *f.provider));
  Query q2 = q;
  q2.poi_types = {2};
  CHECK_FALSE(verify_authenticator(auth, 9, q2, h, server.pc.public_key, *f.provider));
  CHECK_FALSE(verify_authenticator(auth, 9, q, crypto::sha256(to_bytes("other")),
                                   server.pc.public_key, *f.provider));
  Authenticator shifted = auth;
  shifted.timestamp += 1;
  CHECK_FALSE(verify_authenticator(shifted, 9, q, h, server.pc.public_key, *f.provider));
  Party other = f.make_party(3, 1, 0, 300);
  CHECK_FALSE(verify_authenticator(auth, 9, q, h, other.pc.public_key, *f.provider));
}

TEST_CASE("seal/open response") {
  Fixture f;
  Party server = f.make_party(2, 1, 0, 300);
  Query q{.rid = 3, .poi_types = {2}};
  Bytes resp = to_bytes("some POI entries");
  Bytes ks = f.rng.bytes(crypto::kAeadKeySize);
  Authenticator auth =
      build_authenticator(9, q, resp, 120, server.kp.private_key, *f.provider);
  PeerResponse pr = seal_response(9, resp, ks, auth, server.pc, server.kp.private_key,
                                  121, f.rng, *f.provider);

  OpenedResponse opened = open_response(pr, ks, *f.provider);
  CHECK(opened.qid == 9);
  CHECK(opened.resp_bytes == resp);
  CHECK(verify_authenticator(pr.auth, 9, q, crypto::sha256(opened.resp_bytes),
                             pr.sender_pc.public_key, *f.provider));

  SUBCASE("wrong session key") {
    Bytes ks2 = f.rng.bytes(crypto::kAeadKeySize);
    CHECK_THROWS_WITH_AS(open_response(pr, ks2, *f.provider),
                         doctest::Contains("DecryptFailure"), SchemeError);
  }
  SUBCASE("outer tamper") {
    PeerResponse bad = pr;
    bad.timestamp += 1;
    CHECK_THROWS_WITH_AS(open_response(bad, ks, *f.provider),
                         doctest::Contains("BadSignature"), SchemeError);
  }
  SUBCASE("swapped body breaks the authenticator cross-check") {
    Bytes resp2 = to_bytes("falsified POI entries!!");
    PeerResponse forged = seal_response(9, resp2, ks, auth, server.pc,
                                        server.kp.private_key, 121, f.rng, *f.provider);
    OpenedResponse o2 = open_response(forged, ks, *f.provider);
    CHECK_FALSE(verify_authenticator(forged.auth, 9, q, crypto::sha256(o2.resp_bytes),
                                     forged.sender_pc.public_key, *f.provider));
  }
}

TEST_CASE("report signing bytes ignore the signature slot") {
  Fixture f;
  Party p = f.make_party(1, 0, 0, 300);
  MisbehaviorReport rep{.kind = ReportKind::ProactiveNegative,
                        .query = Query{.rid = 1, .poi_types = {3}},
                        .timestamp = 10,
                        .reporter_pc = p.pc};
  Bytes before = rep.signing_bytes();
  rep.reporter_sig = f.provider->sign(p.kp.private_key, before);
  CHECK(rep.signing_bytes() == before);
  CHECK(f.provider->verify(p.pc.public_key, rep.signing_bytes(), rep.reporter_sig));
}
