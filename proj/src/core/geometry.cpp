#include "rwdre/core/geometry.hpp"

#include <cmath>
#include <ostream>

#include "rwdre/core/errors.hpp"

namespace rwdre {

SpaceTimePoint::SpaceTimePoint(Site x_, double t_) : x(x_), t(t_) {
  if (!(t_ >= 0.0)) {
    throw ParameterError("space-time point needs t >= 0");
  }
}

std::ostream& operator<<(std::ostream& os, const SpaceTimePoint& p) {
  return os << '(' << p.x << ", " << p.t << ')';
}

Box::Box(double x_lo, double x_hi, double t_lo, double t_hi)
    : x_lo_(x_lo), x_hi_(x_hi), t_lo_(t_lo), t_hi_(t_hi) {
  if (!(x_lo < x_hi) || !(t_lo < t_hi)) {
    throw ParameterError("box needs x_lo < x_hi and t_lo < t_hi");
  }
}

SiteRange Box::sites() const noexcept {
  return {static_cast<Site>(std::ceil(x_lo_)),
          static_cast<Site>(std::ceil(x_hi_)) - 1};
}

TimeDistance time_distance(const Box& b1, const Box& b2) noexcept {
  const Box& early = b1.t_lo() <= b2.t_lo() ? b1 : b2;
  const Box& late = b1.t_lo() <= b2.t_lo() ? b2 : b1;
  if (late.t_lo() < early.t_hi()) {
    return {0.0, true};
  }
  return {late.t_lo() - early.t_hi(), false};
}

}  // namespace rwdre
