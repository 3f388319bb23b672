#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rwdre/core/geometry.hpp"

namespace rwdre {

enum class StateSpace { Binary, Spin, Count, Color };

std::string to_string(StateSpace s);

// 1 for occupied/up/positive states, 0 otherwise. Colors count as occupied
// when not gray.
int occupation(StateSpace space, int state) noexcept;

struct StateChange {
  double time = 0.0;
  int state = 0;

  friend bool operator==(const StateChange&, const StateChange&) = default;
};

// Initial state plus the sorted list of state changes at one site.
struct SiteHistory {
  int initial = 0;
  std::span<const StateChange> changes;

  int at(double t) const noexcept;      // right-continuous value
  int before(double t) const noexcept;  // left limit
  // Time integral of occupation(space, .) over [t0, t1).
  double occupied_time(StateSpace space, double t0, double t1) const noexcept;
};

// Query access to a realization of a dynamical environment over a finite
// space-time window. Lazily evaluated realizations compute what a query
// needs on demand, so queries are non-const; one instance per replica.
class EnvironmentView {
 public:
  virtual ~EnvironmentView() = default;

  virtual StateSpace state_space() const = 0;
  virtual SiteRange window() const = 0;
  virtual double horizon() const = 0;

  // eta_t(x), right-continuous in t.
  virtual int state_at(Site x, double t) = 0;
  // eta_{t-}(x). Walkers read the environment through this query.
  virtual int state_before(Site x, double t) = 0;
  // History of site x, complete at least on [0, until].
  virtual SiteHistory history(Site x, double until) = 0;

 protected:
  // Throws TruncationError for (x, t) outside the window or past the horizon.
  void check_query(Site x, double t) const;
};

// Materialized trajectory: per-site sorted change lists with binary-search
// queries. Immutable once built and safe to share read-only.
class EnvTrajectory : public EnvironmentView {
 public:
  struct SiteLog {
    int initial = 0;
    std::vector<StateChange> changes;

    friend bool operator==(const SiteLog&, const SiteLog&) = default;
  };

  EnvTrajectory(StateSpace space, SiteRange window, double horizon,
                std::vector<SiteLog> logs);

  StateSpace state_space() const override { return space_; }
  SiteRange window() const override { return window_; }
  double horizon() const override { return horizon_; }

  int state_at(Site x, double t) override { return at(x, t); }
  int state_before(Site x, double t) override { return before(x, t); }
  SiteHistory history(Site x, double until) override;

  int at(Site x, double t) const;
  int before(Site x, double t) const;
  SiteHistory site(Site x) const;
  std::size_t total_changes() const noexcept;

  // Binary event log: header, site count, then per-site initial state and
  // length-prefixed (f64 time, i32 new-state) pairs, little-endian.
  void write_event_log(std::ostream& os) const;
  static EnvTrajectory read_event_log(std::istream& is);

  friend bool operator==(const EnvTrajectory& a, const EnvTrajectory& b) {
    return a.space_ == b.space_ && a.window_ == b.window_ &&
           a.horizon_ == b.horizon_ && a.logs_ == b.logs_;
  }

 private:
  const SiteLog& log(Site x, double t) const;

  StateSpace space_;
  SiteRange window_;
  double horizon_;
  std::vector<SiteLog> logs_;
};

// Copies the full history of every site of `env` on [0, horizon] into a
// materialized trajectory.
EnvTrajectory materialize(EnvironmentView& env, SiteRange window, double horizon);

}  // namespace rwdre
