#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "sim_engine.hpp"
#include "sim_world.hpp"

using namespace lpsim;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.node_count = 60;
  cfg.duration = 900;
  cfg.warmup = 300;
  return cfg;
}

std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << text;
  return path;
}

// A static two-node trace: both present for the whole window.
std::string static_trace(double d, Time until) {
  std::string text = "time,nid,x,y\n";
  for (Time t = 0; t <= until; ++t) {
    text += std::to_string(t) + ",0,100,100\n";
    text += std::to_string(t) + ",1," + std::to_string(100.0 + d) + ",100\n";
  }
  return text;
}

}  // namespace

TEST_CASE("config text round trip and key handling") {
  SimConfig cfg = SimConfig::parse(
      "# comment\n"
      "seed=9\n"
      "node_count = 50\n"
      "Pr_serve=0.1\n"
      "T_beacon=uniform(5,15)\n"
      "p2p_encryption=false\n");
  CHECK(cfg.seed == 9);
  CHECK(cfg.node_count == 50);
  CHECK(cfg.Pr_serve == doctest::Approx(0.1));
  CHECK(cfg.T_beacon_uniform);
  CHECK(cfg.T_beacon_lo == 5);
  CHECK(cfg.T_beacon_hi == 15);
  CHECK_FALSE(cfg.p2p_encryption);

  CHECK_THROWS_WITH_AS(SimConfig::parse("no_such_key=1\n"),
                       doctest::Contains("InvalidConfig"), SchemeError);
  CHECK_THROWS_WITH_AS(SimConfig::parse("node_count=abc\n"),
                       doctest::Contains("InvalidConfig"), SchemeError);

  SimConfig bad;
  bad.gamma = 500;  // not a multiple of tau=300
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("InvalidConfig"), SchemeError);
  bad = SimConfig{};
  bad.warmup = bad.duration;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("InvalidConfig"), SchemeError);
}

TEST_CASE("region grid mapping") {
  SimConfig cfg;  // 4000x4000, L=1000 -> 4x4
  CHECK(cfg.region_count() == 16);
  CHECK(cfg.region_of(0, 0) == 0);
  CHECK(cfg.region_of(999.9, 0) == 0);
  CHECK(cfg.region_of(1000.0, 0) == 1);
  CHECK(cfg.region_of(3999.9, 3999.9) == 15);
  // Clamped at the area border.
  CHECK(cfg.region_of(4000.0, 4000.0) == 15);
}

TEST_CASE("waypoint walker stays in bounds") {
  WaypointWalker w(Rng(7), 400.0, 300.0, 5.0, 15.0);
  for (int i = 0; i < 5000; ++i) {
    w.step(1.0);
    Vec2 p = w.position();
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 400.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 300.0);
  }
}

TEST_CASE("trace parsing errors") {
  CHECK_THROWS_WITH_AS(MobilityTrace::parse("1,2,3,4\n"), doctest::Contains("TraceParseError"),
                       SchemeError);
  CHECK_THROWS_WITH_AS(MobilityTrace::parse("time,nid,x,y\n1,2,3\n"),
                       doctest::Contains("TraceParseError"), SchemeError);
  CHECK_THROWS_WITH_AS(MobilityTrace::parse("time,nid,x,y\n1,2,3,oops\n"),
                       doctest::Contains("TraceParseError"), SchemeError);
  MobilityTrace tr = MobilityTrace::parse("time,nid,x,y\n0,3,1.5,2.5\n0,1,4,4\n");
  CHECK(tr.nids == std::vector<uint32_t>{1, 3});
  CHECK(tr.frames.at(0).size() == 2);
}

TEST_CASE("determinism: same seed, byte-identical outputs") {
  SimConfig cfg = small_config();
  cfg.Ratio_adv = 0.2;
  cfg.adversary_kind = AdversaryKind::Malicious;
  RunOutput a = run_simulation(cfg);
  RunOutput b = run_simulation(cfg);
  CHECK(metrics_csv_row("k", "v", "1", a.metrics) == metrics_csv_row("k", "v", "1", b.metrics));
  CHECK(a.final_crl.to_text() == b.final_crl.to_text());
  CHECK(a.log.queries.size() == b.log.queries.size());
  CHECK(a.log.messages.size() == b.log.messages.size());

  cfg.seed = 2;
  RunOutput c = run_simulation(cfg);
  CHECK(metrics_csv_row("k", "v", "1", a.metrics) != metrics_csv_row("k", "v", "2", c.metrics));
}

TEST_CASE("default run produces sane ratios") {
  SimConfig cfg = small_config();
  RunOutput out = run_simulation(cfg);
  const MetricsReport& m = out.metrics;
  CHECK(m.initiated_queries > 100);
  CHECK(m.peer_hit_ratio + m.lbs_hit_ratio + m.conflicted_ratio == doctest::Approx(1.0));
  CHECK(m.local_hit_ratio <= m.peer_hit_ratio);
  CHECK(m.conflicted_ratio == 0.0);  // no adversaries
  CHECK(m.affected_query_ratio == 0.0);
  CHECK(out.final_crl.revoked_ltc_serials.empty());
  CHECK(m.beacon_suppression_ratio == 0.0);
  // Someone fetched regional data and someone contacted the LBS.
  CHECK(out.log.regional_fetches > 0);
  CHECK_FALSE(out.log.lbs_rows.empty());
}

TEST_CASE("Pr_serve=0 means no peers and no beacons") {
  SimConfig cfg = small_config();
  cfg.Pr_serve = 0.0;
  RunOutput out = run_simulation(cfg);
  CHECK(out.log.beacons_sent == 0);
  uint64_t peer_only = 0;
  for (const auto& q : out.log.queries)
    if (q.source == QuerySource::Peer) ++peer_only;
  CHECK(peer_only == 0);
  CHECK(out.metrics.lbs_hit_ratio + out.metrics.local_hit_ratio == doctest::Approx(1.0));
}

TEST_CASE("trace mode: static nodes never change region and range gates delivery") {
  SUBCASE("in range at 199.9") {
    SimConfig cfg;
    cfg.node_count = 2;
    cfg.duration = 240;
    cfg.warmup = 60;
    cfg.Pr_serve = 1.0;
    cfg.mobility = "trace:" + write_temp("lpsim_trace_near.csv", static_trace(199.9, 240));
    cfg.participation_ratio = 1.0;
    RunOutput out = run_simulation(cfg);
    REQUIRE(out.log.beacons_sent > 0);
    uint64_t delivered = 0;
    for (const auto& msg : out.log.messages)
      if (msg.kind_tag == 1) delivered += msg.receiver_count;
    CHECK(delivered == out.log.beacons_sent);  // exactly one receiver each
    for (const auto& trip : out.trips) CHECK(trip.regions.size() == 1);
  }
  SUBCASE("out of range at 200.1") {
    SimConfig cfg;
    cfg.node_count = 2;
    cfg.duration = 240;
    cfg.warmup = 60;
    cfg.Pr_serve = 1.0;
    cfg.mobility = "trace:" + write_temp("lpsim_trace_far.csv", static_trace(200.1, 240));
    cfg.participation_ratio = 1.0;
    RunOutput out = run_simulation(cfg);
    REQUIRE(out.log.beacons_sent > 0);
    for (const auto& msg : out.log.messages)
      if (msg.kind_tag == 1) CHECK(msg.receiver_count == 0);
  }
}

TEST_CASE("jammer predicts fixed beaconing but not uniform") {
  auto run_with = [&](bool uniform) {
    SimConfig cfg;
    cfg.node_count = 2;
    cfg.duration = 600;
    cfg.warmup = 60;
    cfg.Pr_serve = 1.0;
    cfg.Ratio_adv = 1.0;
    cfg.adversary_kind = AdversaryKind::Jammer;
    cfg.T_beacon_uniform = uniform;
    std::string name = uniform ? "lpsim_trace_ju.csv" : "lpsim_trace_jf.csv";
    cfg.mobility = "trace:" + write_temp(name, static_trace(50.0, 600));
    cfg.participation_ratio = 1.0;
    RunOutput out = run_simulation(cfg);
    REQUIRE(out.log.beacons_sent > 0);
    return out.metrics.beacon_suppression_ratio;
  };
  double fixed = run_with(false);
  double uniform = run_with(true);
  CHECK(fixed > 0.8);
  CHECK(uniform < 0.3);
}

TEST_CASE("malicious runs never revoke honest nodes") {
  SimConfig cfg = small_config();
  cfg.Ratio_adv = 0.3;
  cfg.adversary_kind = AdversaryKind::Malicious;
  RunOutput out = run_simulation(cfg);

  std::set<std::string> adversaries, revoked;
  for (const auto& t : out.trips)
    if (t.adversary) adversaries.insert(t.node_id);
  for (const auto& [serial, rec] : out.pc_table)
    if (out.final_crl.pc_revoked(serial)) revoked.insert(rec.node_id);
  for (const auto& nid : revoked) CHECK(adversaries.count(nid) == 1);
  CHECK(out.metrics.attacked_query_ratio <= out.metrics.affected_query_ratio);
}

TEST_CASE("encryption flag only narrows the coalition view") {
  SimConfig cfg = small_config();
  cfg.Ratio_adv = 0.3;
  cfg.adversary_kind = AdversaryKind::Curious;
  cfg.p2p_encryption = true;
  RunOutput on = run_simulation(cfg);
  cfg.p2p_encryption = false;
  RunOutput off = run_simulation(cfg);

  // Identical behavior, strictly wider observation without encryption.
  CHECK(on.log.queries.size() == off.log.queries.size());
  CHECK(on.metrics.peer_hit_ratio == off.metrics.peer_hit_ratio);
  std::set<ExposureRow> off_rows(off.log.coalition_rows.begin(),
                                 off.log.coalition_rows.end());
  for (const auto& row : on.log.coalition_rows) CHECK(off_rows.count(row) == 1);
}

TEST_CASE("mobicrowd baseline") {
  SimConfig cfg = small_config();
  cfg.baseline = BaselineMode::Mobicrowd;
  cfg.Ratio_coop = 1.0;
  RunOutput out = run_simulation(cfg);
  CHECK(out.metrics.initiated_queries > 100);
  CHECK(out.metrics.peer_hit_ratio + out.metrics.lbs_hit_ratio == doctest::Approx(1.0));
  CHECK(out.log.beacons_sent == 0);
  CHECK(out.log.regional_fetches > 0);

  // Peer transfers move whole regional data; every query path ends cached.
  uint64_t peer_only = 0, lbs_only = 0;
  for (const auto& q : out.log.queries) {
    if (q.source == QuerySource::Peer) ++peer_only;
    if (q.source == QuerySource::Lbs) ++lbs_only;
  }
  CHECK(out.log.regional_fetches >= peer_only + lbs_only);

  // No cooperation degenerates to LBS-only service.
  cfg.Ratio_coop = 0.0;
  RunOutput solo = run_simulation(cfg);
  for (const auto& q : solo.log.queries) CHECK(q.source != QuerySource::Peer);
}
