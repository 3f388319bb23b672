#pragma once

#include <cstdint>
#include <span>

namespace rwdre {

// Monte Carlo point estimate with a normal-approximation confidence
// half-width.
struct EstimateWithCI {
  double point = 0.0;
  std::int64_t replicas = 0;
  double half_width = 0.0;
  double level = 0.99;
  std::uint64_t seed = 0;
  std::int64_t discards = 0;

  double lower() const noexcept { return point - half_width; }
  double upper() const noexcept { return point + half_width; }
  // Standard error implied by the half-width.
  double sigma() const noexcept;
};

// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double normal_z(double level);

// half_width = z * sqrt(p(1-p)/n).
EstimateWithCI proportion_estimate(std::int64_t successes, std::int64_t n,
                                   double level, std::uint64_t seed);

// Sample mean with z * s / sqrt(n), s the unbiased sample deviation.
EstimateWithCI mean_estimate(std::span<const double> values, double level,
                             std::uint64_t seed);

// Sample covariance (1/(n-1) normalization) with the delete-one jackknife
// standard error; half_width = z * se.
EstimateWithCI covariance_estimate(std::span<const double> a,
                                   std::span<const double> b, double level,
                                   std::uint64_t seed);

}  // namespace rwdre
