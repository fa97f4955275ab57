#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "tapestry/grid/field.hpp"

namespace tapestry {

/// Physical placement of a level: point i sits at origin + i*h.
struct LevelGeometry {
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  double h = 1.0;

  double x(int d, std::int64_t i) const { return origin[d] + static_cast<double>(i) * h; }
};

/// One refinement level. On the base level `refined` and `evolved` are both
/// the whole domain; on finer levels `refined` is the region whose data is
/// trusted (and restricted) and `evolved` adds the buffer zones around it.
struct Level {
  int index = 0;
  LevelGeometry geom;
  std::vector<IndexBox> refined;
  std::vector<IndexBox> evolved;
  std::vector<Patch> patches;

  double time = 0.0;
  /// Simulation time of each stored time level; entry 0 is current.
  std::vector<double> tl_times{0.0};
  /// Number of stored time levels holding genuine past data.
  int valid_levels = 1;
  std::int64_t steps = 0;

  /// Record that the level advanced to `t`: past times shift back by one.
  void advance_time(double t, int time_levels) {
    tl_times.insert(tl_times.begin(), t);
    if (static_cast<int>(tl_times.size()) > time_levels) tl_times.resize(static_cast<std::size_t>(time_levels));
    valid_levels = std::min(valid_levels + 1, time_levels);
    time = t;
  }
};

}  // namespace tapestry
