#include "rwdre/environments/trajectory.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "rwdre/core/binary_io.hpp"
#include "rwdre/core/errors.hpp"

namespace rwdre {

namespace {

constexpr std::uint32_t kLogMagic = 0x4c455752;  // "RWEL"
constexpr std::uint32_t kLogVersion = 1;

auto upper(std::span<const StateChange> changes, double t) {
  return std::upper_bound(changes.begin(), changes.end(), t,
                          [](double v, const StateChange& c) { return v < c.time; });
}

auto lower(std::span<const StateChange> changes, double t) {
  return std::lower_bound(changes.begin(), changes.end(), t,
                          [](const StateChange& c, double v) { return c.time < v; });
}

}  // namespace

std::string to_string(StateSpace s) {
  switch (s) {
    case StateSpace::Binary: return "binary";
    case StateSpace::Spin: return "spin";
    case StateSpace::Count: return "count";
    case StateSpace::Color: return "color";
  }
  return "unknown";
}

int occupation(StateSpace space, int state) noexcept {
  switch (space) {
    case StateSpace::Binary:
    case StateSpace::Spin: return state == 1 ? 1 : 0;
    case StateSpace::Count:
    case StateSpace::Color: return state > 0 ? 1 : 0;
  }
  return 0;
}

//---------------------------------------------------------------------------//
int SiteHistory::at(double t) const noexcept {
  auto it = upper(changes, t);
  return it == changes.begin() ? initial : std::prev(it)->state;
}

int SiteHistory::before(double t) const noexcept {
  auto it = lower(changes, t);
  return it == changes.begin() ? initial : std::prev(it)->state;
}

double SiteHistory::occupied_time(StateSpace space, double t0,
                                  double t1) const noexcept {
  if (!(t1 > t0)) return 0.0;
  double total = 0.0;
  double cursor = t0;
  int current = at(t0);
  for (auto it = upper(changes, t0); it != changes.end() && it->time < t1; ++it) {
    total += occupation(space, current) * (it->time - cursor);
    cursor = it->time;
    current = it->state;
  }
  total += occupation(space, current) * (t1 - cursor);
  return total;
}

//---------------------------------------------------------------------------//
void EnvironmentView::check_query(Site x, double t) const {
  if (!window().contains(x)) {
    throw TruncationError("environment query outside window at site " +
                              std::to_string(x),
                          t);
  }
  if (!(t >= 0.0) || t > horizon()) {
    throw TruncationError("environment query past horizon", t);
  }
}

//---------------------------------------------------------------------------//
EnvTrajectory::EnvTrajectory(StateSpace space, SiteRange window, double horizon,
                             std::vector<SiteLog> logs)
    : space_(space), window_(window), horizon_(horizon), logs_(std::move(logs)) {
  if (window.empty() || static_cast<std::int64_t>(logs_.size()) != window.size()) {
    throw ParameterError("trajectory logs do not match the window");
  }
  for (const auto& l : logs_) {
    for (std::size_t i = 1; i < l.changes.size(); ++i) {
      if (!(l.changes[i - 1].time < l.changes[i].time)) {
        throw InvariantError("trajectory change times must be strictly increasing");
      }
    }
  }
}

const EnvTrajectory::SiteLog& EnvTrajectory::log(Site x, double t) const {
  if (!window_.contains(x)) {
    throw TruncationError("trajectory query outside window at site " +
                              std::to_string(x),
                          t);
  }
  if (!(t >= 0.0) || t > horizon_) {
    throw TruncationError("trajectory query past horizon", t);
  }
  return logs_[static_cast<std::size_t>(x - window_.lo)];
}

int EnvTrajectory::at(Site x, double t) const {
  const auto& l = log(x, t);
  return SiteHistory{l.initial, l.changes}.at(t);
}

int EnvTrajectory::before(Site x, double t) const {
  const auto& l = log(x, t);
  return SiteHistory{l.initial, l.changes}.before(t);
}

SiteHistory EnvTrajectory::site(Site x) const {
  const auto& l = log(x, 0.0);
  return {l.initial, l.changes};
}

SiteHistory EnvTrajectory::history(Site x, double until) {
  const auto& l = log(x, until);
  return {l.initial, l.changes};
}

std::size_t EnvTrajectory::total_changes() const noexcept {
  std::size_t n = 0;
  for (const auto& l : logs_) n += l.changes.size();
  return n;
}

void EnvTrajectory::write_event_log(std::ostream& os) const {
  binary::write(os, kLogMagic);
  binary::write(os, kLogVersion);
  binary::write(os, static_cast<std::uint32_t>(space_));
  binary::write(os, window_.lo);
  binary::write(os, horizon_);
  binary::write(os, static_cast<std::uint64_t>(logs_.size()));
  for (const auto& l : logs_) {
    binary::write(os, static_cast<std::int32_t>(l.initial));
    binary::write(os, static_cast<std::uint64_t>(l.changes.size()));
    for (const auto& c : l.changes) {
      binary::write(os, c.time);
      binary::write(os, static_cast<std::int32_t>(c.state));
    }
  }
}

EnvTrajectory EnvTrajectory::read_event_log(std::istream& is) {
  if (binary::read<std::uint32_t>(is) != kLogMagic ||
      binary::read<std::uint32_t>(is) != kLogVersion) {
    throw ParameterError("not an environment event log");
  }
  const auto space = static_cast<StateSpace>(binary::read<std::uint32_t>(is));
  const auto lo = binary::read<Site>(is);
  const auto horizon = binary::read<double>(is);
  const auto n = binary::read<std::uint64_t>(is);
  std::vector<SiteLog> logs(n);
  for (auto& l : logs) {
    l.initial = binary::read<std::int32_t>(is);
    l.changes.resize(binary::read<std::uint64_t>(is));
    for (auto& c : l.changes) {
      c.time = binary::read<double>(is);
      c.state = binary::read<std::int32_t>(is);
    }
  }
  return EnvTrajectory(space, {lo, lo + static_cast<Site>(n) - 1}, horizon,
                       std::move(logs));
}

EnvTrajectory materialize(EnvironmentView& env, SiteRange window, double horizon) {
  if (!env.window().contains(window) || horizon > env.horizon()) {
    throw TruncationError("materialize request exceeds the environment window",
                          horizon);
  }
  std::vector<EnvTrajectory::SiteLog> logs;
  logs.reserve(static_cast<std::size_t>(window.size()));
  for (Site x = window.lo; x <= window.hi; ++x) {
    const SiteHistory h = env.history(x, horizon);
    EnvTrajectory::SiteLog l;
    l.initial = h.initial;
    for (const auto& c : h.changes) {
      if (c.time > horizon) break;
      l.changes.push_back(c);
    }
    logs.push_back(std::move(l));
  }
  return EnvTrajectory(env.state_space(), window, horizon, std::move(logs));
}

}  // namespace rwdre
