#include "sim_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lpsim {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw SchemeError(ErrorCode::InvalidConfig, what);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int64_t to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) bad(key + ": not an integer: " + v);
    return out;
  } catch (const std::logic_error&) {
    bad(key + ": not an integer: " + v);
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) bad(key + ": not a number: " + v);
    return out;
  } catch (const std::logic_error&) {
    bad(key + ": not a number: " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key + ": not a boolean: " + v);
}

}  // namespace

uint32_t SimConfig::region_cols() const {
  return static_cast<uint32_t>(std::ceil(area_width / L));
}

uint32_t SimConfig::region_rows() const {
  return static_cast<uint32_t>(std::ceil(area_height / L));
}

uint32_t SimConfig::region_of(double x, double y) const {
  uint32_t cx = std::min(region_cols() - 1, static_cast<uint32_t>(x / L));
  uint32_t cy = std::min(region_rows() - 1, static_cast<uint32_t>(y / L));
  return cy * region_cols() + cx;
}

void SimConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") seed = static_cast<uint64_t>(to_int(key, value));
  else if (key == "area_width") area_width = to_double(key, value);
  else if (key == "area_height") area_height = to_double(key, value);
  else if (key == "L") L = to_double(key, value);
  else if (key == "node_count") node_count = static_cast<uint32_t>(to_int(key, value));
  else if (key == "comm_range") comm_range = to_double(key, value);
  else if (key == "duration") duration = to_int(key, value);
  else if (key == "warmup") warmup = to_int(key, value);
  else if (key == "mobility") mobility = value;
  else if (key == "v_lo") v_lo = to_double(key, value);
  else if (key == "v_hi") v_hi = to_double(key, value);
  else if (key == "trip_lo") trip_lo = to_int(key, value);
  else if (key == "trip_hi") trip_hi = to_int(key, value);
  else if (key == "participation_ratio") participation_ratio = to_double(key, value);
  else if (key == "gamma") gamma = to_int(key, value);
  else if (key == "tau") tau = to_int(key, value);
  else if (key == "T_POI") T_POI = to_int(key, value);
  else if (key == "T_wait") T_wait = to_int(key, value);
  else if (key == "T_beacon") {
    if (value.rfind("uniform(", 0) == 0 && value.back() == ')') {
      std::string inner = value.substr(8, value.size() - 9);
      size_t comma = inner.find(',');
      if (comma == std::string::npos) bad("T_beacon: expected uniform(lo,hi)");
      T_beacon_uniform = true;
      T_beacon_lo = to_int(key, trim(inner.substr(0, comma)));
      T_beacon_hi = to_int(key, trim(inner.substr(comma + 1)));
    } else {
      T_beacon_uniform = false;
      T_beacon = to_int(key, value);
    }
  }
  else if (key == "T_query") T_query = to_int(key, value);
  else if (key == "N") N = static_cast<uint32_t>(to_int(key, value));
  else if (key == "Pr_serve") Pr_serve = to_double(key, value);
  else if (key == "Pr_check") Pr_check = to_double(key, value);
  else if (key == "G") G = static_cast<uint32_t>(to_int(key, value));
  else if (key == "p2p_encryption") p2p_encryption = to_bool(key, value);
  else if (key == "crl_post_check") crl_post_check = to_bool(key, value);
  else if (key == "rate_limit") rate_limit = static_cast<uint32_t>(to_int(key, value));
  else if (key == "recover_after_revocation")
    recover_after_revocation = to_bool(key, value);
  else if (key == "T_total") T_total = static_cast<uint16_t>(to_int(key, value));
  else if (key == "E") E = static_cast<uint16_t>(to_int(key, value));
  else if (key == "payload_size") payload_size = static_cast<uint32_t>(to_int(key, value));
  else if (key == "Ratio_adv") Ratio_adv = to_double(key, value);
  else if (key == "adversary_kind") {
    if (value == "curious") adversary_kind = AdversaryKind::Curious;
    else if (value == "malicious") adversary_kind = AdversaryKind::Malicious;
    else if (value == "jammer") adversary_kind = AdversaryKind::Jammer;
    else bad("adversary_kind: " + value);
  }
  else if (key == "collusion_case") {
    if (value != "C1" && value != "C2" && value != "C3") bad("collusion_case: " + value);
    collusion_case = value;
  }
  else if (key == "baseline") {
    if (value == "none") baseline = BaselineMode::None;
    else if (value == "mobicrowd") baseline = BaselineMode::Mobicrowd;
    else bad("baseline: " + value);
  }
  else if (key == "Ratio_coop") Ratio_coop = to_double(key, value);
  else bad("unknown key: " + key);
}

SimConfig SimConfig::parse(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) bad("expected key=value: " + line);
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

SimConfig SimConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void SimConfig::validate() const {
  if (gamma <= 0 || tau <= 0 || T_POI <= 0 || T_wait <= 0 || T_query <= 0)
    bad("all periods must be positive");
  if (!T_beacon_uniform && T_beacon <= 0) bad("T_beacon must be positive");
  if (T_beacon_uniform && (T_beacon_lo <= 0 || T_beacon_hi < T_beacon_lo))
    bad("T_beacon uniform range invalid");
  if (gamma % tau != 0) bad("gamma must be a multiple of tau");
  if (duration <= warmup) bad("duration must exceed warmup");
  if (warmup < 0) bad("warmup must be non-negative");
  for (double r : {Ratio_adv, Pr_serve, Pr_check, Ratio_coop, participation_ratio})
    if (r < 0.0 || r > 1.0) bad("ratios and probabilities must lie in [0,1]");
  if (area_width <= 0 || area_height <= 0 || L <= 0) bad("area and L must be positive");
  if (L > area_width || L > area_height) bad("L must not exceed the area");
  if (node_count == 0) bad("node_count must be positive");
  if (N == 0) bad("N must be positive");
  if (G == 0 || G > T_total) bad("G must be in [1, T_total]");
  if (T_total == 0 || E == 0 || payload_size == 0) bad("POI database shape invalid");
  if (v_lo < 0 || v_hi < v_lo) bad("speed range invalid");
  if (trip_lo <= 0 || trip_hi < trip_lo) bad("trip duration range invalid");
  if (mobility != "synthetic" && mobility.rfind("trace:", 0) != 0)
    bad("mobility must be synthetic or trace:<path>");
}

}  // namespace lpsim
