#pragma once

#include <cstdint>
#include <iosfwd>

namespace rwdre {

using Site = std::int64_t;

// Largest time accepted anywhere; beyond this doubles cannot separate
// consecutive unit-rate arrivals.
inline constexpr double kMaxHorizon = 9007199254740992.0;  // 2^53

// A point (x, t) of Z x R+.
struct SpaceTimePoint {
  Site x = 0;
  double t = 0.0;

  SpaceTimePoint() = default;
  SpaceTimePoint(Site x_, double t_);

  friend bool operator==(const SpaceTimePoint&, const SpaceTimePoint&) = default;
};

std::ostream& operator<<(std::ostream& os, const SpaceTimePoint& p);

// Closed range of sites [lo, hi].
struct SiteRange {
  Site lo = 0;
  Site hi = -1;

  SiteRange() = default;
  SiteRange(Site lo_, Site hi_) : lo(lo_), hi(hi_) {}

  bool empty() const noexcept { return hi < lo; }
  std::int64_t size() const noexcept { return empty() ? 0 : hi - lo + 1; }
  bool contains(Site x) const noexcept { return lo <= x && x <= hi; }
  bool contains(const SiteRange& o) const noexcept {
    return o.empty() || (lo <= o.lo && o.hi <= hi);
  }

  friend bool operator==(const SiteRange&, const SiteRange&) = default;
};

// Half-open box [x_lo, x_hi) x [t_lo, t_hi) in R^2.
class Box {
 public:
  Box(double x_lo, double x_hi, double t_lo, double t_hi);

  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_hi_; }
  double t_lo() const noexcept { return t_lo_; }
  double t_hi() const noexcept { return t_hi_; }
  double width() const noexcept { return x_hi_ - x_lo_; }
  double height() const noexcept { return t_hi_ - t_lo_; }

  bool contains(double x, double t) const noexcept {
    return x_lo_ <= x && x < x_hi_ && t_lo_ <= t && t < t_hi_;
  }
  // Lattice sites with x in [x_lo, x_hi).
  SiteRange sites() const noexcept;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  double x_lo_, x_hi_, t_lo_, t_hi_;
};

struct TimeDistance {
  double distance = 0.0;
  bool overlap = false;
};

// c2 - d1 for the later box [.., c2) and the earlier box [.., d1); the
// argument order does not matter. Overlapping time intervals give 0 with the
// overlap flag set; touching intervals give 0 without it.
TimeDistance time_distance(const Box& b1, const Box& b2) noexcept;

}  // namespace rwdre
