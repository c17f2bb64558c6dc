#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "credentials.hpp"

namespace lpsim {

enum class QuerySource : uint8_t { Local, Peer, Lbs, Conflicted };

struct QueryEvent {
  Time time = 0;           // initiation time (windowing key)
  Time concluded = 0;
  uint32_t nid = 0;
  uint32_t rid = 0;
  QuerySource source = QuerySource::Lbs;
  bool accepted_false = false;  // ground truth, invisible to nodes
  bool proactive_checked = false;
  std::vector<uint64_t> responder_pc_serials;  // signers of the accepted data
};

struct MessageEvent {
  Time time = 0;
  uint8_t kind_tag = 0;  // wire tag; 0 for out-of-band LBS exchanges
  size_t bytes = 0;
  uint32_t sender_nid = 0;
  uint32_t receiver_count = 0;
};

// One identity sighting by an observer (the LBS or the curious coalition).
struct ExposureRow {
  Time time = 0;
  uint64_t pc_serial = 0;
  uint32_t rid = 0;

  auto operator<=>(const ExposureRow&) const = default;
};

struct RatioSample {
  Time time = 0;
  double value = 0.0;
};

struct EventLog {
  std::vector<QueryEvent> queries;
  std::vector<MessageEvent> messages;
  std::vector<ExposureRow> lbs_rows;
  std::vector<ExposureRow> coalition_rows;
  std::vector<RatioSample> malicious_serving_ratio;
  std::vector<RatioSample> active_malicious_ratio;
  uint64_t beacons_sent = 0;
  uint64_t beacons_suppressed = 0;
  uint64_t regional_fetches = 0;
  uint64_t regional_fetch_bytes = 0;
  uint64_t reports_filed = 0;
  uint64_t spurious_reports = 0;
  uint64_t confirmed_reports = 0;
};

struct TripRecord {
  uint32_t nid = 0;
  std::string node_id;
  Time start = 0;
  Time end = 0;
  bool adversary = false;
  std::vector<std::pair<uint32_t, Time>> regions;  // (rid, enter_time)
};

}  // namespace lpsim
