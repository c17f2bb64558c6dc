#pragma once

#include <array>

#include "event_log.hpp"
#include "sim_config.hpp"

namespace lpsim {

using PcTable = std::map<uint64_t, CredentialSystem::PcRecord>;

struct MetricsReport {
  uint64_t initiated_queries = 0;
  double peer_hit_ratio = 0, local_hit_ratio = 0, lbs_hit_ratio = 0,
         conflicted_ratio = 0;
  // [observer: 0=LBS, 1=coalition][case: 0=C1, 1=C2, 2=C3], mean over nodes
  double expo_deg[2][3] = {};
  double affected_query_ratio = 0, attacked_query_ratio = 0;
  double mean_malicious_serving_ratio = 0, mean_active_malicious_ratio = 0;
  uint64_t reports_filed = 0, spurious_reports = 0, confirmed_reports = 0;
  double regional_fetches_per_serving_node = 0, regional_fetches_per_node = 0;
  double mean_regional_fetch_bytes = 0, mean_peer_hit_bytes = 0;
  double beacon_suppression_ratio = 0;
};

// Identity linking: groups one node's exposure rows into linked classes.
// case_idx: 0 links by PC serial, 1 by ticket serial, 2 by node id.
std::map<uint64_t, std::vector<ExposureRow>> link_identities(
    const std::vector<ExposureRow>& rows_for_node, int case_idx, const PcTable& pcs);

// ExpoDeg(Id_LTC, C) = sum_i T(Id_i)/T(Id_LTC) * R_H(Id_i)/R(Id_LTC).
double expo_deg(const TripRecord& trip, const std::vector<ExposureRow>& rows_for_node,
                int case_idx, const PcTable& pcs);

// Per-node value for all three cases; key is the node id string.
std::map<std::string, std::array<double, 3>> expo_deg_by_node(
    const std::vector<ExposureRow>& rows, const std::vector<TripRecord>& trips,
    const PcTable& pcs);

MetricsReport compute_metrics(const EventLog& log, const std::vector<TripRecord>& trips,
                              const PcTable& pcs, const RevocationList& final_crl,
                              const SimConfig& cfg);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& key, const std::string& value,
                            const std::string& seed, const MetricsReport& m);

}  // namespace lpsim
