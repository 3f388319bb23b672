#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rwdre/core/clock_field.hpp"
#include "rwdre/core/path.hpp"
#include "rwdre/environments/trajectory.hpp"

namespace rwdre {

// Initial law of the East process.
struct EastInitial {
  enum class Kind {
    Product,     // Bernoulli(rho) everywhere (the reversible measure)
    ZeroAt,      // Bernoulli(rho) with a forced 0 at `marked`
    Front,       // 1 on sites < marked, 0 at marked, Bernoulli(rho) above
    Fixed,       // explicit configuration over the window
  };
  Kind kind = Kind::Product;
  Site marked = 0;
  std::vector<int> fixed;

  static EastInitial product() { return {}; }
  static EastInitial zero_at(Site x) { return {Kind::ZeroAt, x, {}}; }
  static EastInitial front(Site x = 0) { return {Kind::Front, x, {}}; }
  static EastInitial configuration(std::vector<int> c) {
    return {Kind::Fixed, 0, std::move(c)};
  }
};

// State of the site just right of the window, which every constraint at the
// window's right edge reads.
enum class EastBoundary { Frozen0, Frozen1 };

// Outcome of one ring at x with refresh value `refresh`: the new eta(x).
constexpr int east_ring_update(int current, int right, int refresh) noexcept {
  return right == 0 ? refresh : current;
}

//---------------------------------------------------------------------------//
/*!
 * East model on a finite window, evaluated lazily from its graphical
 * construction.
 *
 * Each site carries a rate-1 ring clock with Bernoulli(rho) refresh values; a
 * ring at x is legal iff eta_{t-}(x+1) = 0 and a legal ring sets eta(x) to its
 * refresh value. The rings of x split into effective rings, whose refresh
 * differs from the current eta(x), and idle rings, which can never change
 * eta(x). Given the past, effective rings arrive at rate rho from state 0 and
 * 1 - rho from state 1, and idle rings at the complementary rate. The process
 * draws only effective rings: candidates at rate m = max(rho, 1 - rho)
 * (stream EastRing) kept with probability rate / m by a uniform hashed from
 * the candidate time (stream EastThin). Idle rings come from a separate
 * thinned stream (EastIdle) and are generated only by EastClocks.
 *
 * Because constraints only look rightward, the trajectory of site x on
 * [0, t] depends only on data at sites >= x. Candidate times do not depend
 * on the state, so a query at (x, t) first lists the chain of targets (site
 * x to t, site x+1 to the last candidate of x before t, and so on) and then
 * evaluates the chain from its right end.
 */
class EastProcess final : public EnvironmentView {
 public:
  EastProcess(double rho, SiteRange window, double horizon, std::uint64_t seed,
              EastInitial initial = EastInitial::product(),
              EastBoundary boundary = EastBoundary::Frozen0);

  StateSpace state_space() const override { return StateSpace::Binary; }
  SiteRange window() const override { return window_; }
  double horizon() const override { return horizon_; }
  int state_at(Site x, double t) override;
  int state_before(Site x, double t) override;
  SiteHistory history(Site x, double until) override;

  double rho() const noexcept { return rho_; }
  std::uint64_t seed() const noexcept { return seed_; }
  EastBoundary boundary() const noexcept { return boundary_; }
  int initial_state(Site x);

  // Whether a ring of x at `time` would be legal: eta_{time-}(x+1) = 0.
  bool legal_at(Site x, double time);

  // Ring candidates evaluated so far over all sites.
  std::uint64_t rings_processed() const noexcept { return rings_; }

  // Candidate rate m = max(rho, 1 - rho).
  double candidate_rate() const noexcept { return candidate_rate_; }
  // Whether the candidate at (x, time) is an effective ring from `state`.
  bool keeps(Site x, double time, int state) const noexcept;

 private:
  struct SiteState {
    double done_until = 0.0;  // every candidate with time <= done_until applied
    double pending = 0.0;     // next candidate not yet listed
    int current = 0;
    int initial = 0;
    bool started = false;
    SplitMix64 rng{0};
    std::vector<double> queue;  // listed candidates awaiting evaluation
    std::vector<StateChange> changes;
  };

  SiteState& site(Site x);
  void extend(Site x, double t);

  double rho_;
  double effective_rate_[2];
  double candidate_rate_;
  SiteRange window_;
  double horizon_;
  std::uint64_t seed_;
  EastInitial initial_;
  EastBoundary boundary_;
  std::vector<SiteState> sites_;
  std::uint64_t rings_ = 0;
  std::vector<std::pair<std::size_t, double>> chain_;  // scratch for extend
};

//---------------------------------------------------------------------------//
/*!
 * The full rate-1 ring clocks of an East process as a clock source.
 *
 * Arrivals at x are the effective rings (replayed from the process's own
 * stream and change log) merged with the idle rings. The uniform paired with
 * an arrival encodes its refresh value: u < rho iff the refresh is 1.
 * Not thread-safe; tied to one process.
 */
class EastClocks final : public ClockSource {
 public:
  explicit EastClocks(EastProcess& east);

  SiteRange window() const override { return east_.window(); }
  double horizon() const override { return east_.horizon(); }
  std::optional<Arrival> next_after(Site x, double after) override;

 private:
  // Arrivals at or before a query time are skipped unless the clock was
  // rebuilt in full mode after an earlier query went back in time; the lists
  // are complete after skipped_until.
  struct SiteClock {
    bool started = false;
    bool full = false;
    double skipped_until = -1.0;
    // Replay of the effective stream; change_idx walks the process's log.
    SplitMix64 rng{0};
    double time = 0.0;
    std::size_t change_idx = 0;
    bool effective_done = false;
    std::vector<Arrival> effective;
    // Thinned idle stream.
    std::optional<ArrivalStream> idle_stream;
    std::size_t idle_idx = 0;
    bool idle_done = false;
    std::vector<Arrival> idle;
  };

  SiteClock& site(Site x);
  void start(Site x, SiteClock& c);
  void grow_effective(Site x, SiteClock& c, double after);
  void grow_idle(Site x, SiteClock& c, double after);
  double coded_uniform(Site x, double time, int refresh) const noexcept;

  EastProcess& east_;
  std::vector<SiteClock> sites_;
};

struct EastSimulation {
  double rho = 0.5;
  std::uint64_t seed = 0;
  EnvTrajectory trajectory;
  // Legal ring times per window site.
  std::vector<std::vector<double>> legal_rings;
};

// Legal ring times of x on [0, until].
std::vector<double> east_legal_rings(EastProcess& east, EastClocks& clocks, Site x,
                                     double until);

// Fully materialized East trajectory with its legal-ring log.
EastSimulation east_simulate(double rho, EastInitial initial, SiteRange window,
                             double horizon, std::uint64_t seed,
                             EastBoundary boundary = EastBoundary::Frozen0);

// Distinguished zero: sits at x until the first legal ring at x, then jumps
// to x+1. Runs on the process's own ring clocks. A path reaching the window
// edge is returned partial with `truncated_at` set.
WalkerPath east_distinguished_zero(EastProcess& east, EastClocks& clocks, Site start,
                                   double duration);
WalkerPath east_distinguished_zero(EastProcess& east, Site start, double duration);

// Front of the East process started from EastInitial::front(start): on a
// legal ring at x with refresh 1 it moves right; on a legal ring at x-1 with
// refresh 0 it moves left. It listens to the superposed clocks of x and x-1,
// so its path is allowed with respect to SuperposedClocks, not the ring
// clocks alone.
WalkerPath east_front(EastProcess& east, EastClocks& clocks, Site start,
                      double duration);
WalkerPath east_front(EastProcess& east, Site start, double duration);

// Leftmost zero of the process at time t, scanning from `from` rightward.
std::optional<Site> east_leftmost_zero(EastProcess& east, Site from, double t);

}  // namespace rwdre
