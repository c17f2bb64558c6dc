#include "mobility.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lpsim {

WaypointWalker::WaypointWalker(Rng rng, double width, double height, double v_lo,
                               double v_hi)
    : rng_(rng), width_(width), height_(height), v_lo_(v_lo), v_hi_(v_hi) {
  pos_ = {rng_.uniform_real(0.0, width_), rng_.uniform_real(0.0, height_)};
  pick_leg();
}

void WaypointWalker::pick_leg() {
  dest_ = {rng_.uniform_real(0.0, width_), rng_.uniform_real(0.0, height_)};
  speed_ = rng_.uniform_real(v_lo_, v_hi_);
}

void WaypointWalker::step(double dt) {
  double budget = speed_ * dt;
  while (budget > 0.0) {
    double dx = dest_.x - pos_.x, dy = dest_.y - pos_.y;
    double dist = std::hypot(dx, dy);
    if (dist <= budget) {
      pos_ = dest_;
      budget -= dist;
      pick_leg();
      if (speed_ <= 0.0) return;
    } else {
      pos_.x += dx / dist * budget;
      pos_.y += dy / dist * budget;
      budget = 0.0;
    }
  }
}

MobilityTrace MobilityTrace::parse(const std::string& text) {
  MobilityTrace trace;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("time", 0) != 0)
    throw SchemeError(ErrorCode::TraceParseError, "missing header");
  std::set<uint32_t> seen;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double vals[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(row, cell, ','))
        throw SchemeError(ErrorCode::TraceParseError,
                          "line " + std::to_string(lineno) + ": expected 4 columns");
      try {
        size_t pos = 0;
        vals[i] = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw SchemeError(ErrorCode::TraceParseError,
                          "line " + std::to_string(lineno) + ": bad value: " + cell);
      }
    }
    Time t = static_cast<Time>(vals[0]);
    uint32_t nid = static_cast<uint32_t>(vals[1]);
    trace.frames[t].push_back({nid, Vec2{vals[2], vals[3]}});
    seen.insert(nid);
  }
  trace.nids.assign(seen.begin(), seen.end());
  return trace;
}

MobilityTrace MobilityTrace::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemeError(ErrorCode::TraceParseError, "cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace lpsim
