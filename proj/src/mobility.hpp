#pragma once

#include <map>
#include <string>
#include <vector>

#include "credentials.hpp"

namespace lpsim {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

// Random waypoint on a rectangle: straight legs at a uniform speed, new
// destination and speed drawn at each arrival.
class WaypointWalker {
 public:
  WaypointWalker() = default;
  WaypointWalker(Rng rng, double width, double height, double v_lo, double v_hi);

  void step(double dt);  // advances one tick
  Vec2 position() const { return pos_; }

 private:
  void pick_leg();

  Rng rng_{0};
  double width_ = 0, height_ = 0, v_lo_ = 0, v_hi_ = 0;
  Vec2 pos_, dest_;
  double speed_ = 0;
};

// Mobility trace: CSV "time,nid,x,y" with a header line, seconds and meters.
// Nodes absent at a time are off-trip.
struct MobilityTrace {
  std::map<Time, std::vector<std::pair<uint32_t, Vec2>>> frames;
  std::vector<uint32_t> nids;  // all nids seen, ascending

  static MobilityTrace load_file(const std::string& path);  // throws TraceParseError
  static MobilityTrace parse(const std::string& text);
};

}  // namespace lpsim
