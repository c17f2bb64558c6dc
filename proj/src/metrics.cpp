#include "metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lpsim {

namespace {

// Class key for a row under a linking case. Node ids collapse to one class.
uint64_t class_key(const ExposureRow& row, int case_idx, const PcTable& pcs) {
  if (case_idx == 0) return row.pc_serial;
  auto it = pcs.find(row.pc_serial);
  if (it == pcs.end()) return row.pc_serial;  // unattributable; degenerate class
  return case_idx == 1 ? it->second.ticket_serial : 0;
}

Time overlap(Time a_lo, Time a_hi, Time b_lo, Time b_hi) {
  return std::max<Time>(0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

}  // namespace

std::map<uint64_t, std::vector<ExposureRow>> link_identities(
    const std::vector<ExposureRow>& rows_for_node, int case_idx, const PcTable& pcs) {
  std::map<uint64_t, std::vector<ExposureRow>> classes;
  for (const auto& row : rows_for_node)
    classes[class_key(row, case_idx, pcs)].push_back(row);
  return classes;
}

double expo_deg(const TripRecord& trip, const std::vector<ExposureRow>& rows_for_node,
                int case_idx, const PcTable& pcs) {
  Time trip_time = trip.end - trip.start;
  std::set<uint32_t> visited;
  for (const auto& [rid, t] : trip.regions) visited.insert(rid);
  if (trip_time <= 0 || visited.empty()) return 0.0;

  auto classes = link_identities(rows_for_node, case_idx, pcs);
  double total = 0.0;
  for (const auto& [key, rows] : classes) {
    // T(Id_i): trip time spent under the PC windows belonging to this class.
    Time t_id = 0;
    for (const auto& [serial, rec] : pcs) {
      if (rec.node_id != trip.node_id) continue;
      if (class_key(ExposureRow{0, serial, 0}, case_idx, pcs) != key) continue;
      t_id += overlap(rec.t_start, rec.t_end, trip.start, trip.end);
    }
    std::set<uint32_t> exposed;
    for (const auto& row : rows) exposed.insert(row.rid);
    total += (static_cast<double>(t_id) / trip_time) *
             (static_cast<double>(exposed.size()) / visited.size());
  }
  return total;
}

std::map<std::string, std::array<double, 3>> expo_deg_by_node(
    const std::vector<ExposureRow>& rows, const std::vector<TripRecord>& trips,
    const PcTable& pcs) {
  std::map<std::string, std::vector<ExposureRow>> by_node;
  for (const auto& row : rows) {
    auto it = pcs.find(row.pc_serial);
    if (it != pcs.end()) by_node[it->second.node_id].push_back(row);
  }
  std::map<std::string, std::array<double, 3>> out;
  for (const auto& trip : trips) {
    const auto& node_rows = by_node[trip.node_id];
    for (int c = 0; c < 3; ++c) out[trip.node_id][c] = expo_deg(trip, node_rows, c, pcs);
  }
  return out;
}

MetricsReport compute_metrics(const EventLog& log, const std::vector<TripRecord>& trips,
                              const PcTable& pcs, const RevocationList& final_crl,
                              const SimConfig& cfg) {
  MetricsReport m;

  uint64_t local = 0, peer = 0, lbs = 0, conflicted = 0, affected = 0, attacked = 0;
  for (const auto& q : log.queries) {
    if (q.time < cfg.warmup || q.time >= cfg.duration) continue;
    ++m.initiated_queries;
    switch (q.source) {
      case QuerySource::Local: ++local; break;
      case QuerySource::Peer: ++peer; break;
      case QuerySource::Lbs: ++lbs; break;
      case QuerySource::Conflicted: ++conflicted; break;
    }
    if (q.source == QuerySource::Peer && q.accepted_false) {
      ++affected;
      // Detected once any responder's node has been identified; expired PCs
      // drop off the CRL, so the join goes through the credential records.
      bool detected =
          std::any_of(q.responder_pc_serials.begin(), q.responder_pc_serials.end(),
                      [&](uint64_t s) {
                        if (final_crl.pc_revoked(s)) return true;
                        auto it = pcs.find(s);
                        return it != pcs.end() &&
                               final_crl.ltc_revoked(it->second.ltc_serial);
                      });
      if (!detected) ++attacked;
    }
  }
  if (m.initiated_queries > 0) {
    double n = static_cast<double>(m.initiated_queries);
    m.local_hit_ratio = local / n;
    m.peer_hit_ratio = (local + peer) / n;
    m.lbs_hit_ratio = lbs / n;
    m.conflicted_ratio = conflicted / n;
    m.affected_query_ratio = affected / n;
    m.attacked_query_ratio = attacked / n;
  }

  std::set<std::string> adversaries;
  for (const auto& t : trips)
    if (t.adversary) adversaries.insert(t.node_id);
  for (int obs = 0; obs < 2; ++obs) {
    auto per_node =
        expo_deg_by_node(obs == 0 ? log.lbs_rows : log.coalition_rows, trips, pcs);
    double sum[3] = {};
    uint64_t n = 0;
    for (const auto& [node_id, vals] : per_node) {
      if (adversaries.count(node_id)) continue;
      for (int c = 0; c < 3; ++c) sum[c] += vals[c];
      ++n;
    }
    for (int c = 0; c < 3; ++c) m.expo_deg[obs][c] = n ? sum[c] / n : 0.0;
  }

  auto mean_samples = [&](const std::vector<RatioSample>& samples) {
    double total = 0;
    uint64_t n = 0;
    for (const auto& s : samples) {
      if (s.time < cfg.warmup || s.time >= cfg.duration) continue;
      total += s.value;
      ++n;
    }
    return n ? total / n : 0.0;
  };
  m.mean_malicious_serving_ratio = mean_samples(log.malicious_serving_ratio);
  m.mean_active_malicious_ratio = mean_samples(log.active_malicious_ratio);

  m.reports_filed = log.reports_filed;
  m.spurious_reports = log.spurious_reports;
  m.confirmed_reports = log.confirmed_reports;

  std::set<std::string> serving_nodes, all_nodes;
  for (const auto& [serial, rec] : pcs) {
    all_nodes.insert(rec.node_id);
    if (rec.s == 1) serving_nodes.insert(rec.node_id);
  }
  if (!serving_nodes.empty())
    m.regional_fetches_per_serving_node =
        static_cast<double>(log.regional_fetches) / serving_nodes.size();
  if (!all_nodes.empty())
    m.regional_fetches_per_node =
        static_cast<double>(log.regional_fetches) / all_nodes.size();
  if (log.regional_fetches > 0)
    m.mean_regional_fetch_bytes =
        static_cast<double>(log.regional_fetch_bytes) / log.regional_fetches;

  uint64_t p2p_bytes = 0;
  for (const auto& msg : log.messages)
    if (msg.kind_tag == 2 || msg.kind_tag == 3) p2p_bytes += msg.bytes;
  if (peer > 0) m.mean_peer_hit_bytes = static_cast<double>(p2p_bytes) / peer;

  if (log.beacons_sent > 0)
    m.beacon_suppression_ratio =
        static_cast<double>(log.beacons_suppressed) / log.beacons_sent;
  return m;
}

std::string metrics_csv_header() {
  return "key,value,seed,initiated_queries,peer_hit_ratio,local_hit_ratio,lbs_hit_ratio,"
         "conflicted_ratio,expo_lbs_c1,expo_lbs_c2,expo_lbs_c3,expo_coalition_c1,"
         "expo_coalition_c2,expo_coalition_c3,affected_query_ratio,attacked_query_ratio,"
         "mean_malicious_serving_ratio,mean_active_malicious_ratio,reports_filed,"
         "spurious_reports,confirmed_reports,regional_fetches_per_serving_node,"
         "regional_fetches_per_node,mean_regional_fetch_bytes,mean_peer_hit_bytes,"
         "beacon_suppression_ratio";
}

std::string metrics_csv_row(const std::string& key, const std::string& value,
                            const std::string& seed, const MetricsReport& m) {
  std::ostringstream out;
  out.precision(10);
  out << key << ',' << value << ',' << seed << ',' << m.initiated_queries << ','
      << m.peer_hit_ratio << ',' << m.local_hit_ratio << ',' << m.lbs_hit_ratio << ','
      << m.conflicted_ratio;
  for (int obs = 0; obs < 2; ++obs)
    for (int c = 0; c < 3; ++c) out << ',' << m.expo_deg[obs][c];
  out << ',' << m.affected_query_ratio << ',' << m.attacked_query_ratio << ','
      << m.mean_malicious_serving_ratio << ',' << m.mean_active_malicious_ratio << ','
      << m.reports_filed << ',' << m.spurious_reports << ',' << m.confirmed_reports << ','
      << m.regional_fetches_per_serving_node << ',' << m.regional_fetches_per_node << ','
      << m.mean_regional_fetch_bytes << ',' << m.mean_peer_hit_bytes << ','
      << m.beacon_suppression_ratio;
  return out.str();
}

}  // namespace lpsim
