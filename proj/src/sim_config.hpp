#pragma once

#include <cstdint>
#include <string>

#include "credentials.hpp"

namespace lpsim {

enum class AdversaryKind : uint8_t { Curious, Malicious, Jammer };
enum class BaselineMode : uint8_t { None, Mobicrowd };

struct SimConfig {
  uint64_t seed = 1;

  // World
  double area_width = 4000.0;
  double area_height = 4000.0;
  double L = 1000.0;  // region side length
  uint32_t node_count = 200;
  double comm_range = 200.0;
  Time duration = 1800;
  Time warmup = 600;

  // Mobility
  std::string mobility = "synthetic";  // or "trace:<path>"
  double v_lo = 5.0, v_hi = 15.0;
  Time trip_lo = 600, trip_hi = 1800;
  double participation_ratio = 0.4;  // trace mode only

  // Scheme timing
  Time gamma = 600;
  Time tau = 300;
  Time T_POI = 1200;
  Time T_wait = 60;
  Time T_beacon = 10;
  bool T_beacon_uniform = false;
  Time T_beacon_lo = 5, T_beacon_hi = 15;
  Time T_query = 180;

  // Scheme knobs
  uint32_t N = 3;
  double Pr_serve = 0.06;
  double Pr_check = 0.0;
  uint32_t G = 1;
  bool p2p_encryption = true;
  bool crl_post_check = true;
  uint32_t rate_limit = 12;  // beacons per PC per 60 s
  bool recover_after_revocation = false;

  // POI database
  uint16_t T_total = 9;
  uint16_t E = 10;
  uint32_t payload_size = 500;

  // Adversary
  double Ratio_adv = 0.0;
  AdversaryKind adversary_kind = AdversaryKind::Curious;
  std::string collusion_case = "C3";

  // Baseline
  BaselineMode baseline = BaselineMode::None;
  double Ratio_coop = 0.5;

  uint32_t region_cols() const;
  uint32_t region_rows() const;
  uint32_t region_count() const { return region_cols() * region_rows(); }
  uint32_t region_of(double x, double y) const;

  void validate() const;  // throws InvalidConfig

  // Flat key=value text; '#' comments; unknown keys are errors.
  static SimConfig parse(const std::string& text);
  static SimConfig load_file(const std::string& path);
  // Applies a single "key=value" assignment (used by the sweep driver).
  void set(const std::string& key, const std::string& value);
};

}  // namespace lpsim
