#include "rwdre/core/statistics.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <vector>

#include "rwdre/core/errors.hpp"

namespace rwdre {

double EstimateWithCI::sigma() const noexcept {
  return half_width / normal_z(level);
}

double normal_z(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("confidence level must lie in (0, 1)");
  }
  static const boost::math::normal standard;
  return boost::math::quantile(standard, 0.5 + level / 2.0);
}

EstimateWithCI proportion_estimate(std::int64_t successes, std::int64_t n,
                                   double level, std::uint64_t seed) {
  if (n <= 0) {
    throw StatisticalValidityError("proportion estimate needs at least one replica");
  }
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  EstimateWithCI e;
  e.point = p;
  e.replicas = n;
  e.level = level;
  e.seed = seed;
  e.half_width = normal_z(level) * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return e;
}

EstimateWithCI mean_estimate(std::span<const double> values, double level,
                             std::uint64_t seed) {
  const auto n = static_cast<std::int64_t>(values.size());
  if (n < 2) {
    throw StatisticalValidityError("mean estimate needs at least two replicas");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  EstimateWithCI e;
  e.point = mean;
  e.replicas = n;
  e.level = level;
  e.seed = seed;
  e.half_width = normal_z(level) * sd / std::sqrt(static_cast<double>(n));
  return e;
}

EstimateWithCI covariance_estimate(std::span<const double> a,
                                   std::span<const double> b, double level,
                                   std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw ParameterError("covariance inputs differ in length");
  }
  const auto n = static_cast<std::int64_t>(a.size());
  if (n < 3) {
    throw StatisticalValidityError("covariance estimate needs at least three replicas");
  }
  const double dn = static_cast<double>(n);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= dn;
  mb /= dn;
  // Centered sums; covariance is shift invariant.
  std::vector<double> ca(a.size()), cb(b.size());
  double sa = 0.0, sb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[i] = a[i] - ma;
    cb[i] = b[i] - mb;
    sa += ca[i];
    sb += cb[i];
    sab += ca[i] * cb[i];
  }
  const double cov = (sab - sa * sb / dn) / (dn - 1.0);

  // Delete-one jackknife.
  double jsum = 0.0, jss = 0.0;
  std::vector<double> loo(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ra = sa - ca[i], rb = sb - cb[i];
    loo[i] = (sab - ca[i] * cb[i] - ra * rb / (dn - 1.0)) / (dn - 2.0);
    jsum += loo[i];
  }
  const double jmean = jsum / dn;
  for (double v : loo) jss += (v - jmean) * (v - jmean);
  const double se = std::sqrt((dn - 1.0) / dn * jss);

  EstimateWithCI e;
  e.point = cov;
  e.replicas = n;
  e.level = level;
  e.seed = seed;
  e.half_width = normal_z(level) * se;
  return e;
}

}  // namespace rwdre
