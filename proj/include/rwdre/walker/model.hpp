#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "rwdre/core/clock_field.hpp"
#include "rwdre/environments/trajectory.hpp"

namespace rwdre {

// One replica: an environment realization plus the walker clocks on it. The
// clocks may be owned by the environment (East with shared clocks), so both
// are released together.
struct Replica {
  std::shared_ptr<EnvironmentView> env;
  std::shared_ptr<ClockSource> clocks;
};

// Builds a fresh replica covering `window` over [0, horizon] from a replica
// seed. Must be a pure function of its arguments.
using ReplicaFactory =
    std::function<Replica(std::uint64_t seed, SiteRange window, double horizon)>;

struct Model {
  std::string name;
  ReplicaFactory make;
};

}  // namespace rwdre
