#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rwdre/core/clock_field.hpp"
#include "rwdre/core/path.hpp"
#include "rwdre/environments/trajectory.hpp"

namespace rwdre {

// Jump distribution for one environment word.
struct JumpProbabilities {
  double right = 0.0;
  double stay = 1.0;
  double left = 0.0;
};

//---------------------------------------------------------------------------//
/*!
 * Local jump rule g with window radius ell.
 *
 * The rule maps the word (eta(x-ell), ..., eta(x+ell)) to jump probabilities.
 * The paired uniform u selects the step by the interval coding
 * [0, right) -> +1, [right, right+stay) -> 0, [right+stay, 1) -> -1.
 *
 * Two representations: a dense table over binary words (index bit k is the
 * occupation of site x-ell+k) or an opaque function of the raw word.
 */
class JumpRule {
 public:
  using Fn = std::function<JumpProbabilities(std::span<const int>)>;

  JumpRule(int radius, Fn fn, std::string name);
  static JumpRule table(int radius, std::vector<JumpProbabilities> entries,
                        std::string name);

  int radius() const noexcept { return radius_; }
  const std::string& name() const noexcept { return name_; }
  // Whether the rule ignores the environment (no word needs to be read).
  bool blind() const noexcept { return blind_; }

  JumpProbabilities probabilities(std::span<const int> word) const;
  int step(std::span<const int> word, double u) const;

  // Environment-independent rule.
  static JumpRule constant(JumpProbabilities p, std::string name);

 private:
  int radius_;
  Fn fn_;
  std::string name_;
  bool blind_ = false;
};

int coded_step(const JumpProbabilities& p, double u) noexcept;

// g = 0.
JumpRule rule_stay();
// g = +1.
JumpRule rule_always_right();
// +1 w.p. 1/2, -1 w.p. 1/2, regardless of the environment.
JumpRule rule_fair();
// Distinguished zero of the East model: +1 iff eta(x+1) = 0.
JumpRule rule_east_zero();
// Radius 0: (right, left) = (p_occupied, 1 - p_occupied) on occupied sites
// and the mirror image on empty ones; never stays.
JumpRule rule_occupation_drift(StateSpace space, double p_occupied);
// Counterexample colors: gray (1/2, 1/2), black (0.9, 0.1), white (0.1, 0.9).
JumpRule rule_color_drift();

enum class OnTruncation { Throw, Flag };

// Walker of rate given by `clocks`, started at `start`, run for `duration`.
// At each arrival at the current site the word is read with state_before
// at the arrival time. With OnTruncation::Flag a window violation returns the
// partial path with truncated_at set; otherwise TruncationError propagates.
WalkerPath run_walker(EnvironmentView& env, ClockSource& clocks, const JumpRule& rule,
                      SpaceTimePoint start, double duration,
                      OnTruncation on_truncation = OnTruncation::Throw);

struct CoupledEnsemble {
  std::vector<WalkerPath> paths;  // in the order of the requested starts
  std::int64_t coalescences = 0;
};

struct CoupledOptions {
  // Copy the remainder of the previous walker once two walkers share a site
  // at a ring.
  bool coalesce = true;
  OnTruncation on_truncation = OnTruncation::Throw;
};

// Walkers from every start at `start_time` on shared clocks, uniforms and
// environment. Starts must be sorted ascending. Order preservation between
// consecutive walkers is checked at every jump event; a violation throws
// InvariantError.
CoupledEnsemble run_coupled(EnvironmentView& env, ClockSource& clocks,
                            const JumpRule& rule, std::span<const Site> starts,
                            double start_time, double duration,
                            CoupledOptions options = {});

// First time where a is strictly to the right of b, if any. Exact merge of
// the two jump lists.
std::optional<double> first_order_violation(const WalkerPath& a, const WalkerPath& b);

// Nearest-neighbour and every jump at an arrival of the pre-jump site.
bool check_allowed_path(const WalkerPath& path, ClockSource& clocks);

// Number of ring arrivals encountered by the path at its successive sites.
std::int64_t rings_encountered(const WalkerPath& path, ClockSource& clocks);

struct Envelope {
  Site max_right = 0;
  Site min_left = 0;
};

// Extremal sites reachable from `origin` at time 0 by allowed paths within
// [0, T]: the right frontier advances at the first arrival at the frontier
// site after it got there, and symmetrically on the left.
Envelope reachability_envelope(ClockSource& clocks, double T, Site origin = 0);

}  // namespace rwdre
