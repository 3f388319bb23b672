#include "rwdre/core/path.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "rwdre/core/errors.hpp"

namespace rwdre {

Site WalkerPath::at(double t) const {
  if (t < start.t || t > end_time) {
    throw ParameterError("path queried outside its time span");
  }
  auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                             [](double v, const Jump& j) { return v < j.time; });
  return it == jumps.begin() ? start.x : std::prev(it)->site;
}

Site WalkerPath::before(double t) const {
  if (t < start.t || t > end_time) {
    throw ParameterError("path queried outside its time span");
  }
  auto it = std::lower_bound(jumps.begin(), jumps.end(), t,
                             [](const Jump& j, double v) { return j.time < v; });
  return it == jumps.begin() ? start.x : std::prev(it)->site;
}

void write_path_csv(std::ostream& os, const WalkerPath& path, bool header) {
  if (header) os << "time,site\n";
  os << std::setprecision(17) << path.start.t << ',' << path.start.x << '\n';
  for (const auto& j : path.jumps) os << j.time << ',' << j.site << '\n';
}

void write_ensemble_csv(std::ostream& os, std::span<const WalkerPath> paths) {
  os << "path_id,time,site\n" << std::setprecision(17);
  for (std::size_t id = 0; id < paths.size(); ++id) {
    os << id << ',' << paths[id].start.t << ',' << paths[id].start.x << '\n';
    for (const auto& j : paths[id].jumps) os << id << ',' << j.time << ',' << j.site << '\n';
  }
}

}  // namespace rwdre
