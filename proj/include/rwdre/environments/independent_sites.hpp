#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rwdre/core/clock_field.hpp"
#include "rwdre/core/errors.hpp"
#include "rwdre/environments/trajectory.hpp"

namespace rwdre {

//---------------------------------------------------------------------------//
// Environments made of independent per-site Markov chains driven by a
// Poisson clock: each ring maps the current state and the ring's uniform to
// the next state. Sites are evaluated lazily up to the latest queried time.
//---------------------------------------------------------------------------//

struct SpinFlipParams {
  double nu = 1.0;   // refresh rate
  double rho = 0.5;  // density of 1s
};

// Tail-sum stationary law of the renewal chain with weights a_1..a_n.
struct RenewalParams {
  std::vector<double> weights;
};

class SpinFlipDynamics {
 public:
  explicit SpinFlipDynamics(SpinFlipParams p);

  StateSpace space() const noexcept { return StateSpace::Binary; }
  Stream stream() const noexcept { return Stream::SpinFlip; }
  double rate() const noexcept { return p_.nu; }
  int initial(double u) const noexcept { return u < p_.rho ? 1 : 0; }
  int update(int, double u) const noexcept { return u < p_.rho ? 1 : 0; }
  const SpinFlipParams& params() const noexcept { return p_; }

 private:
  SpinFlipParams p_;
};

class RenewalDynamics {
 public:
  explicit RenewalDynamics(RenewalParams p);

  StateSpace space() const noexcept { return StateSpace::Count; }
  Stream stream() const noexcept { return Stream::Renewal; }
  double rate() const noexcept { return 1.0; }
  int initial(double u) const noexcept;
  int update(int state, double u) const;
  const std::vector<double>& stationary() const noexcept { return stationary_; }
  const RenewalParams& params() const noexcept { return p_; }

 private:
  RenewalParams p_;
  std::vector<double> jump_cdf_;        // over 1..n
  std::vector<double> stationary_;      // over 0..n
  std::vector<double> stationary_cdf_;  // over 0..n
};

// Stationary law over {0..n} obtained by solving the balance equations
// pi(n) = pi(n+1) + pi(0) p_n from the top state down.
std::vector<double> renewal_stationary(std::span<const double> weights);
// pi(n) proportional to sum_{j>=n} a_j for n >= 1, pi(0) = pi(1).
std::vector<double> renewal_stationary_tail_sum(std::span<const double> weights);
// max_n |(pi L)(n)| for the renewal generator L.
double renewal_generator_residual(std::span<const double> weights,
                                  std::span<const double> pi);

template <class Dynamics>
class IndependentSitesEnvironment final : public EnvironmentView {
 public:
  // `fixed_initial`, when present, gives the initial state of every window
  // site (index 0 is window.lo) instead of a draw from the initial law.
  IndependentSitesEnvironment(Dynamics dyn, SiteRange window, double horizon,
                              std::uint64_t seed,
                              std::optional<std::vector<int>> fixed_initial = {})
      : dyn_(std::move(dyn)),
        window_(window),
        horizon_(horizon),
        seed_(seed),
        fixed_(std::move(fixed_initial)) {
    if (window.empty() || !(horizon > 0.0) || horizon > kMaxHorizon) {
      throw ParameterError("environment needs a nonempty window and horizon in (0, 2^53]");
    }
    if (fixed_ && static_cast<std::int64_t>(fixed_->size()) != window.size()) {
      throw ParameterError("fixed initial configuration does not cover the window");
    }
    sites_.resize(static_cast<std::size_t>(window.size()));
  }

  StateSpace state_space() const override { return dyn_.space(); }
  SiteRange window() const override { return window_; }
  double horizon() const override { return horizon_; }

  int state_at(Site x, double t) override {
    check_query(x, t);
    const auto& s = extend(x, t);
    return SiteHistory{s.initial, s.changes}.at(t);
  }
  int state_before(Site x, double t) override {
    check_query(x, t);
    const auto& s = extend(x, t);
    return SiteHistory{s.initial, s.changes}.before(t);
  }
  SiteHistory history(Site x, double until) override {
    check_query(x, until);
    const auto& s = extend(x, until);
    return {s.initial, s.changes};
  }

  const Dynamics& dynamics() const noexcept { return dyn_; }
  std::uint64_t rings_processed() const noexcept { return rings_; }

 private:
  struct SiteState {
    bool started = false;
    int initial = 0;
    int current = 0;
    Arrival pending;
    std::optional<ArrivalStream> stream;
    std::vector<StateChange> changes;
  };

  SiteState& extend(Site x, double t) {
    auto& s = sites_[static_cast<std::size_t>(x - window_.lo)];
    if (!s.started) {
      s.started = true;
      SplitMix64 init_rng(mix64(seed_ ^ 0x5bd1e995ull), dyn_.stream(), x);
      s.initial = fixed_ ? (*fixed_)[static_cast<std::size_t>(x - window_.lo)]
                         : dyn_.initial(init_rng.uniform());
      s.current = s.initial;
      s.stream.emplace(seed_, dyn_.stream(), x, dyn_.rate());
      s.pending = s.stream->next();
    }
    while (s.pending.time <= t && s.pending.time < horizon_) {
      const int next = dyn_.update(s.current, s.pending.uniform);
      if (next != s.current) {
        s.changes.push_back({s.pending.time, next});
        s.current = next;
      }
      ++rings_;
      s.pending = s.stream->next();
    }
    return s;
  }

  Dynamics dyn_;
  SiteRange window_;
  double horizon_;
  std::uint64_t seed_;
  std::optional<std::vector<int>> fixed_;
  std::vector<SiteState> sites_;
  std::uint64_t rings_ = 0;
};

using SpinFlipEnvironment = IndependentSitesEnvironment<SpinFlipDynamics>;
using RenewalEnvironment = IndependentSitesEnvironment<RenewalDynamics>;

// Stationary spin-flip trajectory: product Bernoulli(rho) start, each site
// refreshed at rate nu to 1 w.p. rho.
EnvTrajectory spinflip_simulate(SpinFlipParams p, SiteRange window, double horizon,
                                std::uint64_t seed);

// Independent renewal chains started from the stationary law.
EnvTrajectory renewal_simulate(const RenewalParams& p, SiteRange window,
                               double horizon, std::uint64_t seed);

}  // namespace rwdre
