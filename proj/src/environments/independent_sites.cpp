#include "rwdre/environments/independent_sites.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rwdre {

namespace {

void validate_weights(std::span<const double> a) {
  if (a.empty()) {
    throw ParameterError("renewal weights are empty");
  }
  bool positive = false;
  for (double w : a) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ParameterError("renewal weights must be finite and nonnegative");
    }
    positive = positive || w > 0.0;
  }
  if (!positive) {
    throw ParameterError("renewal weights must be positive somewhere");
  }
}

std::vector<double> cumulative(std::span<const double> p) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  cdf.back() = 1.0;
  return cdf;
}

int inverse_cdf(const std::vector<double>& cdf, double u) noexcept {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

}  // namespace

//---------------------------------------------------------------------------//
SpinFlipDynamics::SpinFlipDynamics(SpinFlipParams p) : p_(p) {
  if (!(p.nu >= 0.0) || !std::isfinite(p.nu)) {
    throw ParameterError("spin-flip rate nu must be finite and >= 0");
  }
  if (!(p.rho > 0.0 && p.rho < 1.0)) {
    throw ParameterError("spin-flip density rho must lie in (0, 1)");
  }
}

//---------------------------------------------------------------------------//
RenewalDynamics::RenewalDynamics(RenewalParams p) : p_(std::move(p)) {
  validate_weights(p_.weights);
  const double z = std::accumulate(p_.weights.begin(), p_.weights.end(), 0.0);
  std::vector<double> jumps(p_.weights.size());
  for (std::size_t i = 0; i < jumps.size(); ++i) jumps[i] = p_.weights[i] / z;
  jump_cdf_ = cumulative(jumps);
  stationary_ = renewal_stationary(p_.weights);
  stationary_cdf_ = cumulative(stationary_);
}

int RenewalDynamics::initial(double u) const noexcept {
  return inverse_cdf(stationary_cdf_, u);
}

int RenewalDynamics::update(int state, double u) const {
  if (state > 0) {
    return state - 1;
  }
  const int next = inverse_cdf(jump_cdf_, u) + 1;
  if (next < 1) {
    throw InvariantError("renewal chain jumped from 0 to a nonpositive state");
  }
  return next;
}

std::vector<double> renewal_stationary(std::span<const double> weights) {
  validate_weights(weights);
  const std::size_t n = weights.size();
  const double z = std::accumulate(weights.begin(), weights.end(), 0.0);
  // Balance at n >= 1: pi(n) = pi(n+1) + pi(0) p_n, with pi(n+1) = 0 at the
  // top. Solve with pi(0) = 1, then normalize.
  std::vector<double> pi(n + 1, 0.0);
  pi[0] = 1.0;
  for (std::size_t k = n; k >= 1; --k) {
    const double above = k + 1 <= n ? pi[k + 1] : 0.0;
    pi[k] = above + weights[k - 1] / z;
  }
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= total;
  return pi;
}

std::vector<double> renewal_stationary_tail_sum(std::span<const double> weights) {
  validate_weights(weights);
  const std::size_t n = weights.size();
  std::vector<double> q(n + 1, 0.0);
  double tail = 0.0;
  for (std::size_t k = n; k >= 1; --k) {
    tail += weights[k - 1];
    q[k] = tail;
  }
  q[0] = q[1];
  const double z = std::accumulate(q.begin(), q.end(), 0.0);
  for (double& v : q) v /= z;
  return q;
}

double renewal_generator_residual(std::span<const double> weights,
                                  std::span<const double> pi) {
  validate_weights(weights);
  const std::size_t n = weights.size();
  if (pi.size() != n + 1) {
    throw ParameterError("stationary vector has the wrong length");
  }
  const double z = std::accumulate(weights.begin(), weights.end(), 0.0);
  // (pi L)(m) = sum_k pi(k) L(k, m); every state leaves at total rate 1.
  std::vector<double> flow(n + 1, 0.0);
  for (std::size_t k = 0; k <= n; ++k) {
    flow[k] -= pi[k];
    if (k > 0) {
      flow[k - 1] += pi[k];
    } else {
      for (std::size_t m = 1; m <= n; ++m) flow[m] += pi[0] * weights[m - 1] / z;
    }
  }
  double worst = 0.0;
  for (double f : flow) worst = std::max(worst, std::abs(f));
  return worst;
}

//---------------------------------------------------------------------------//
EnvTrajectory spinflip_simulate(SpinFlipParams p, SiteRange window, double horizon,
                                std::uint64_t seed) {
  SpinFlipEnvironment env(SpinFlipDynamics(p), window, horizon, seed);
  return materialize(env, window, horizon);
}

EnvTrajectory renewal_simulate(const RenewalParams& p, SiteRange window,
                               double horizon, std::uint64_t seed) {
  RenewalEnvironment env(RenewalDynamics(p), window, horizon, seed);
  return materialize(env, window, horizon);
}

}  // namespace rwdre
