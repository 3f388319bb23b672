#pragma once

// Independent reference computations shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// Binomial standard deviation of a frequency at n trials.
inline double binomial_sigma(double p, std::int64_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// P(|Z| > z) for a standard normal.
inline double normal_two_sided_tail(double z) { return std::erfc(z / std::sqrt(2.0)); }

// P(N >= k) for N ~ Poisson(mu), by summing the lower pmf in log space.
inline double poisson_upper_tail(double mu, std::int64_t k) {
  if (k <= 0) return 1.0;
  double lower = 0.0;
  double log_p = -mu;
  for (std::int64_t j = 0; j < k; ++j) {
    if (j > 0) log_p += std::log(mu) - std::log(static_cast<double>(j));
    lower += std::exp(log_p);
  }
  return std::max(0.0, 1.0 - lower);
}

// P(N <= k) for N ~ Poisson(mu).
inline double poisson_cdf(double mu, std::int64_t k) {
  if (k < 0) return 0.0;
  return 1.0 - poisson_upper_tail(mu, k + 1);
}

// Two-state chain flipping to 1 at rate nu*rho and to 0 at rate nu*(1-rho):
// Cov(eta_0, eta_r) under stationarity.
inline double two_state_autocovariance(double nu, double rho, double r) {
  return rho * (1.0 - rho) * std::exp(-nu * r);
}

// Stationary law of a finite chain with generator Q (row sums 0) by
// Gaussian elimination on pi Q = 0, sum pi = 1.
inline std::vector<double> stationary_law(std::vector<std::vector<double>> Q) {
  const std::size_t n = Q.size();
  // Transpose into A pi = b, replacing the last equation by normalization.
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) A[i][j] = Q[j][i];
  }
  for (std::size_t j = 0; j < n; ++j) A[n - 1][j] = 1.0;
  A[n - 1][n] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    }
    std::swap(A[c], A[p]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = A[i][n] / A[i][i];
  return pi;
}

}  // namespace oracle
