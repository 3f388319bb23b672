#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rwdre/core/geometry.hpp"

namespace rwdre {

struct Jump {
  double time = 0.0;
  Site site = 0;  // site after the jump

  friend bool operator==(const Jump&, const Jump&) = default;
};

// Cadlag nearest-neighbour trajectory on [start.t, end_time].
struct WalkerPath {
  SpaceTimePoint start;
  std::vector<Jump> jumps;
  double end_time = 0.0;
  // Set when the path left the simulated window before end_time; the path
  // is then only valid up to this time.
  std::optional<double> truncated_at;

  // Right-continuous position at time t (start.t <= t <= end_time).
  Site at(double t) const;
  // Left limit at time t.
  Site before(double t) const;
  Site final_site() const noexcept { return jumps.empty() ? start.x : jumps.back().site; }
  Site displacement() const noexcept { return final_site() - start.x; }
  bool truncated() const noexcept { return truncated_at.has_value(); }

  friend bool operator==(const WalkerPath&, const WalkerPath&) = default;
};

// CSV with columns (time, site): one row for the start, one per jump.
void write_path_csv(std::ostream& os, const WalkerPath& path, bool header = true);
// Same with a leading path_id column.
void write_ensemble_csv(std::ostream& os, std::span<const WalkerPath> paths);

}  // namespace rwdre
