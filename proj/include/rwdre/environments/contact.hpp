#pragma once

#include <cstdint>
#include <vector>

#include "rwdre/core/clock_field.hpp"
#include "rwdre/environments/trajectory.hpp"

namespace rwdre {

enum class ContactBoundary { Frozen0, Frozen1, Periodic };

struct ContactParams {
  double lambda = 2.0;
  // Arrows are generated at rate lambda_max and kept with probability
  // lambda / lambda_max, so processes sharing a seed and lambda_max are
  // coupled monotonically in lambda. 0 means lambda_max = lambda.
  double lambda_max = 0.0;
  ContactBoundary boundary = ContactBoundary::Frozen0;

  double arrow_rate() const noexcept { return lambda_max > 0.0 ? lambda_max : lambda; }
};

struct ContactInitial {
  enum class Kind { AllOnes, AllZeros, SingleOne, Fixed, UpperInvariant };
  Kind kind = Kind::AllOnes;
  Site site = 0;               // SingleOne
  std::vector<int> fixed;      // Fixed, indexed from window.lo
  double depth = 0.0;          // UpperInvariant burn-in depth

  static ContactInitial all_ones() { return {}; }
  static ContactInitial all_zeros() { return {Kind::AllZeros, 0, {}, 0.0}; }
  static ContactInitial single(Site x) { return {Kind::SingleOne, x, {}, 0.0}; }
  static ContactInitial configuration(std::vector<int> c) {
    return {Kind::Fixed, 0, std::move(c), 0.0};
  }
  // eta_0(x) = 1 iff the dual from (x, 0) survives `depth` time units, sampled
  // as the all-ones process after a burn-in of `depth`. Over-reports 1s.
  static ContactInitial upper_invariant(double depth) {
    return {Kind::UpperInvariant, 0, {}, depth};
  }
};

// Default burn-in depth for the upper invariant measure.
double contact_default_depth(double lambda);

enum class ContactEventKind : std::uint8_t { Mark, ArrowRight, ArrowLeft };

struct ContactEvent {
  double time = 0.0;
  ContactEventKind kind = ContactEventKind::Mark;
};

//---------------------------------------------------------------------------//
/*!
 * Graphical construction of the contact process on a window over [0, horizon).
 *
 * Site x carries one rate (1 + 2 lambda_max) Poisson stream. An arrival with
 * uniform u is a recovery mark if u (1 + 2 lambda_max) < 1; otherwise it is a
 * candidate arrow to x+1 or x-1, accepted iff its position inside its band is
 * below lambda / lambda_max. Arrows x -> x-1 are "left" arrows.
 */
class ContactGraph {
 public:
  ContactGraph(ContactParams p, SiteRange window, double horizon, std::uint64_t seed);

  const ContactParams& params() const noexcept { return p_; }
  SiteRange window() const noexcept { return window_; }
  double horizon() const noexcept { return horizon_; }

  // Events emitted by x (x may be a ghost site next to the window).
  const std::vector<ContactEvent>& events(Site x) const;
  std::size_t total_events() const noexcept;

 private:
  ContactParams p_;
  SiteRange window_;
  double horizon_;
  std::vector<std::vector<ContactEvent>> events_;  // window plus two ghosts
};

// Forward contact process on the window from `init`. A site becomes 0 at its
// marks; an arrow x -> y at time t sets y to 1 when eta_{t-}(x) = 1. Ghost
// sites outside the window are frozen at the boundary value, or wrap around
// for the periodic boundary.
EnvTrajectory contact_simulate(const ContactParams& p, const ContactInitial& init,
                               SiteRange window, double horizon, std::uint64_t seed);

// Same evolution on a prebuilt graph from a configuration indexed from
// window.lo.
EnvTrajectory contact_run(const ContactGraph& g, std::vector<int> init);

struct DualOptions {
  // Whether reaching a window edge site throws TruncationError. With false,
  // the boundary is treated as in the forward process, which makes the dual
  // pathwise identical to the forward all-ones process on the same graph.
  bool edge_is_truncation = true;
};

// Dual contact process from (x, t) run backward for `depth` on the graph
// built from (p, window, t, seed): whether the dual set is nonempty at t -
// depth. Equals eta_t(x) for the all-ones forward process started at t -
// depth on the same graph.
bool contact_dual_survival(Site x, double t, double depth, const ContactParams& p,
                           SiteRange window, std::uint64_t seed,
                           DualOptions options = {});
bool contact_dual_survival(const ContactGraph& g, Site x, double t, double depth,
                           DualOptions options = {});

}  // namespace rwdre
