#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "rwdre/core/geometry.hpp"
#include "rwdre/core/path.hpp"
#include "rwdre/renormalization/ladder.hpp"
#include "rwdre/walker/walker.hpp"

namespace rwdre {

// A point of R^2; anchors of trapped/threatened points need not be lattice
// points.
struct PlanePoint {
  double x = 0.0;
  double t = 0.0;

  friend bool operator==(const PlanePoint&, const PlanePoint&) = default;
};

// Grid spacing floor(delta H / 4); ParameterError unless delta H / 4 >= 1.
std::int64_t rounding_step(double H, double delta);

// (floor(x / Ht) Ht, t) with Ht = floor(delta H / 4), floor toward -inf.
SpaceTimePoint round_point(SpaceTimePoint y, double H, double delta);

// Lattice starts of w + [delta H, 2 delta H] x {0}.
std::vector<Site> trap_window_starts(PlanePoint w, double H, double delta);

// Whether w is H-trapped given the walkers from every start of its trap
// window at time w.t: some displacement after H is <= (v_minus + delta) H.
// The paths must be exactly those starts (ParameterError otherwise).
bool is_trapped(PlanePoint w, double H, double delta, double v_minus,
                std::span<const WalkerPath> window_paths);

using TrapOracle = std::function<bool(PlanePoint)>;

// Some anchor w + j H (v_plus, 1), j = 0..r-1, is trapped.
bool is_threatened(PlanePoint w, double H, int r, double v_plus, const TrapOracle& trapped);

// Trap oracle backed by one environment replica and its clocks: runs the
// coupled walkers of the trap window from each queried anchor.
TrapOracle make_trap_oracle(EnvironmentView& env, ClockSource& clocks, const JumpRule& rule,
                            double H, double delta, double v_minus);

// Fraction of checkpoints j = 0..J-1, at times j h L_{kbar+1} with J =
// L_k / L_{kbar+1}, whose position rounded at scale h L_{kbar} is
// (h L_{kbar}, l_{kbar})-threatened. The path must last h L_k for some
// ladder index k > kbar.
double threatened_density(const WalkerPath& path, double h, const ScaleLadder& ladder,
                          std::size_t kbar, const TrapOracle& trapped, double delta,
                          double v_plus);

}  // namespace rwdre
