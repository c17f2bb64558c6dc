#pragma once

#include "metrics.hpp"

namespace lpsim {

struct RunOutput {
  EventLog log;
  std::vector<TripRecord> trips;
  PcTable pc_table;
  RevocationList final_crl;
  MetricsReport metrics;
};

// One deterministic run; a pure function of the config (including the seed).
RunOutput run_simulation(const SimConfig& cfg);

}  // namespace lpsim
