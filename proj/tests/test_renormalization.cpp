#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rwdre/cli/models.hpp"
#include "rwdre/core/errors.hpp"
#include "rwdre/core/rng.hpp"
#include "rwdre/renormalization/ladder.hpp"
#include "rwdre/renormalization/speeds.hpp"
#include "rwdre/renormalization/traps.hpp"

using namespace rwdre;

namespace {

WalkerPath path_with_displacement(Site start, double t0, Site disp, double H) {
  WalkerPath p{{start, t0}, {}, t0 + H, std::nullopt};
  const Site step = disp > 0 ? 1 : -1;
  Site x = start;
  for (Site i = 0; i < std::abs(disp); ++i) {
    x += step;
    p.jumps.push_back({t0 + H * (static_cast<double>(i) + 1.0) / (std::abs(disp) + 1.0), x});
  }
  return p;
}

std::vector<WalkerPath> ensemble(const std::vector<Site>& starts, const std::vector<Site>& disp,
                                 double H, double t0 = 0.0) {
  std::vector<WalkerPath> out;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    out.push_back(path_with_displacement(starts[i], t0, disp[i], H));
  }
  return out;
}

// P(|N / t - 1| >= eps) for N ~ Poisson(t), summed over the exact pmf.
double poisson_deviation_tail(double t, double eps) {
  double total = 0.0;
  double log_p = -t;
  const auto n_max = static_cast<std::int64_t>(t + 40.0 * std::sqrt(t) + 40.0);
  for (std::int64_t n = 0; n <= n_max; ++n) {
    if (n > 0) log_p += std::log(t) - std::log(static_cast<double>(n));
    if (std::abs(static_cast<double>(n) - t) >= eps * t) total += std::exp(log_p);
  }
  return total;
}

}  // namespace

TEST_SUITE("renormalization") {

TEST_CASE("events A and A-tilde on hand-made ensembles") {
  const auto still = ensemble({0, 1, 2}, {0, 0, 0}, 4.0);
  CHECK_FALSE(event_A(still, 0.1, 4.0));
  CHECK(event_A(still, 0.0, 4.0));
  CHECK_FALSE(event_A_tilde(still, -0.1, 4.0));
  CHECK(event_A_tilde(still, 0.0, 4.0));
  CHECK(event_A(ensemble({0, 1}, {1, 5}, 4.0), 1.0, 4.0));
  CHECK(event_A_tilde(ensemble({0, 1}, {-5, 1}, 4.0), -1.0, 4.0));
  CHECK_FALSE(event_A(ensemble({0, 1}, {1, 3}, 4.0), 1.0, 4.0));
}

TEST_CASE("events need untruncated paths") {
  auto paths = ensemble({0}, {2}, 4.0);
  paths[0].truncated_at = 1.0;
  CHECK_THROWS_AS(event_A(paths, 0.0, 4.0), TruncationError);
}

TEST_CASE("event nesting in v") {
  SplitMix64 rng(3, Stream::Test, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Site> starts, disp;
    for (Site x = 0; x < 6; ++x) {
      starts.push_back(x);
      disp.push_back(static_cast<Site>(rng.uniform() * 21.0) - 10);
    }
    const auto paths = ensemble(starts, disp, 10.0);
    for (double v = -1.2; v <= 1.2; v += 0.1) {
      const double lower = v - 0.15;
      if (event_A(paths, v, 10.0)) CHECK(event_A(paths, lower, 10.0));
      if (event_A_tilde(paths, lower, 10.0)) CHECK(event_A_tilde(paths, v, 10.0));
    }
  }
}

TEST_CASE("representative start sets") {
  CHECK(representative_starts(0.0, 4.0) == std::vector<Site>{0, 1, 2, 3});
  CHECK(representative_starts(0.5, 4.0) == std::vector<Site>{1, 2, 3, 4});
  CHECK(representative_starts(0.5, 3.5) == std::vector<Site>{1, 2, 3});
  CHECK_THROWS_AS(representative_starts(1.0, 4.0), ParameterError);
}

TEST_CASE("stay rule probabilities are exact") {
  const Model blind = make_model("blind", {});
  CHECK(estimate_pH(blind, rule_stay(), 10.0, 0.5, 50, 1).point == 0.0);
  CHECK(estimate_pH_tilde(blind, rule_stay(), 10.0, -0.5, 50, 1).point == 0.0);
  const auto one = estimate_pH_tilde(blind, rule_stay(), 10.0, 0.0, 50, 1);
  CHECK(one.point == 1.0);
  CHECK(one.half_width == 0.0);
}

TEST_CASE("always-right p_H against a ring-count oracle") {
  const double H = 10.0, v = 2.0;
  const int n = 10000;
  const Model blind = make_model("blind", {});
  const auto est = estimate_pH(blind, rule_always_right(), H, v, n, 41);
  // Oracle: coupled always-right walkers only count rings. Each site gets
  // its own exponential gaps; a walker at y jumps at the first ring of y
  // after its arrival there.
  const std::vector<Site> reps[2] = {representative_starts(0.0, H),
                                     representative_starts(0.5, H)};
  int hits[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    std::vector<std::vector<double>> rings(80);
    for (std::size_t x = 0; x < rings.size(); ++x) {
      SplitMix64 rng(replica_seed(43, static_cast<std::uint64_t>(i)), Stream::Test, x);
      for (double t = rng.unit_exponential(); t < H; t += rng.unit_exponential()) {
        rings[x].push_back(t);
      }
    }
    for (int r = 0; r < 2; ++r) {
      bool hit = false;
      for (Site y : reps[r]) {
        Site x = y;
        double t = 0.0;
        for (;;) {
          const auto& rx = rings[static_cast<std::size_t>(x)];
          const auto it = std::upper_bound(rx.begin(), rx.end(), t);
          if (it == rx.end()) break;
          t = *it;
          ++x;
        }
        hit = hit || static_cast<double>(x - y) >= v * H;
      }
      hits[r] += hit;
    }
  }
  const double p0 = static_cast<double>(hits[0]) / n, p1 = static_cast<double>(hits[1]) / n;
  const double oracle_p = std::max(p0, p1);
  const double sigma = std::sqrt(2.0) * oracle::binomial_sigma(std::max(oracle_p, est.point), n);
  CHECK(std::abs(est.point - oracle_p) < 3.0 * sigma + 1.0 / n);
}

TEST_CASE("curves under common random numbers are monotone") {
  const Model model = make_model("spinflip", {});
  const JumpRule rule = rule_occupation_drift(StateSpace::Binary, 0.7);
  const auto sample = sample_extremes_batch(model, rule, 30.0, 300, 47);
  const auto grid = uniform_grid(-1.0, 1.0, 21);
  const auto curves = curves_from_extremes(sample, 30.0, grid, 47);
  REQUIRE(curves.p.size() == 21);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(curves.p[i].point <= curves.p[i - 1].point);
    CHECK(curves.p_tilde[i].point >= curves.p_tilde[i - 1].point);
  }
  // The single-v estimators agree with the curves at the same seed.
  const auto p = estimate_pH(model, rule, 30.0, grid[12], 300, 47);
  CHECK(p.point == curves.p[12].point);
}

TEST_CASE("fair blind walker: p-tilde at 0 is at least one half") {
  const Model blind = make_model("blind", {});
  const auto est = estimate_pH_tilde(blind, rule_fair(), 10.0, 0.0, 2000, 53);
  CHECK(est.point >= 0.5 - 3.0 * oracle::binomial_sigma(0.5, 2000));
}

TEST_CASE("always-right bracket sits near speed 1") {
  const Model blind = make_model("blind", {});
  const std::vector<double> H{400.0};
  const auto grid = uniform_grid(0.0, 2.0, 9);
  const auto b = bracket_speeds(blind, rule_always_right(), H, grid, 0.05, 60, 59);
  REQUIRE(b.rows.size() == 1);
  REQUIRE(b.rows[0].v_plus.has_value());
  CHECK(std::abs(*b.rows[0].v_plus - 1.0) <= 0.25 + 1e-12);
}

TEST_CASE("bracket row threshold scan") {
  CurvePair c;
  c.v = {-1.0, 0.0, 1.0};
  auto e = [](double p) {
    EstimateWithCI x;
    x.point = p;
    return x;
  };
  c.p = {e(1.0), e(0.5), e(0.01)};
  c.p_tilde = {e(0.0), e(0.4), e(1.0)};
  const auto row = bracket_row(10.0, c, 0.05);
  CHECK(row.v_plus == 1.0);
  CHECK(row.v_minus == -1.0);
  CHECK(row.width() == 2.0);
  c.p = {e(1.0), e(0.5), e(0.2)};
  CHECK(bracket_row(10.0, c, 0.05).open());
}

TEST_CASE("rounding") {
  CHECK(round_point({5, 3.0}, 16.0, 0.5) == SpaceTimePoint(4, 3.0));
  CHECK(round_point({-5, 1.0}, 16.0, 0.5) == SpaceTimePoint(-6, 1.0));
  CHECK(round_point({4, 2.0}, 16.0, 0.5) == SpaceTimePoint(4, 2.0));
  CHECK_THROWS_AS(round_point({0, 0.0}, 7.0, 0.5), ParameterError);
  for (Site x = -30; x <= 30; ++x) {
    const auto y = round_point({x, 0.0}, 40.0, 0.5);  // step 5
    CHECK(round_point(y, 40.0, 0.5) == y);
    CHECK(round_point({x + 1, 0.0}, 40.0, 0.5).x >= y.x);
    CHECK(y.x <= x);
    CHECK(x - y.x < 5);
  }
}

TEST_CASE("trapped points") {
  const PlanePoint w{0.0, 0.0};
  const double H = 8.0, delta = 0.25, vm = -0.5;  // threshold -2
  const auto starts = trap_window_starts(w, H, delta);
  REQUIRE(starts == std::vector<Site>{2, 3, 4});
  CHECK(is_trapped(w, H, delta, vm, ensemble(starts, {-3, 1, 1}, H)));
  CHECK_FALSE(is_trapped(w, H, delta, vm, ensemble(starts, {0, 1, 0}, H)));
  CHECK(is_trapped(w, H, delta, vm, ensemble(starts, {0, -2, 1}, H)));
  CHECK_THROWS_AS(is_trapped(w, H, delta, vm, ensemble({2, 3}, {0, 0}, H)), ParameterError);
}

TEST_CASE("threatened points") {
  const PlanePoint w{0.0, 0.0};
  const double H = 10.0, vp = 0.5;
  int calls = 0;
  const TrapOracle only_middle = [&](PlanePoint p) {
    ++calls;
    return p.t == 10.0 && p.x == 5.0;
  };
  const TrapOracle none = [](PlanePoint) { return false; };
  const TrapOracle at_w = [&](PlanePoint p) { return p == w; };
  CHECK(is_threatened(w, H, 3, vp, only_middle));
  CHECK_FALSE(is_threatened(w, H, 3, vp, none));
  CHECK(is_threatened(w, H, 1, vp, at_w) == at_w(w));
  CHECK_FALSE(is_threatened(w, H, 1, vp, only_middle));
}

TEST_CASE("threatened density counts checkpoints") {
  const ScaleLadder ladder = build_ladder(LadderVariant::Main, 16, 3);
  // L = 16, 32, 64, 128; kbar = 0, k = 3: four checkpoints at times 0, 32,
  // 64, 96, anchors every 16 time units.
  const WalkerPath still{{0, 0.0}, {}, 128.0, std::nullopt};
  const TrapOracle all = [](PlanePoint) { return true; };
  const TrapOracle none = [](PlanePoint) { return false; };
  const TrapOracle some = [](PlanePoint p) { return p.t == 0.0 || p.t == 64.0; };
  CHECK(threatened_density(still, 1.0, ladder, 0, all, 0.25, 0.5) == 1.0);
  CHECK(threatened_density(still, 1.0, ladder, 0, none, 0.25, 0.5) == 0.0);
  CHECK(threatened_density(still, 1.0, ladder, 0, some, 0.25, 0.5) == 0.5);
  // Mean of per-checkpoint indicators, computed directly.
  const double H = 16.0;
  double direct = 0.0;
  for (int j = 0; j < 4; ++j) {
    const auto y = round_point({still.at(32.0 * j), 32.0 * j}, H, 0.25);
    direct += is_threatened({static_cast<double>(y.x), y.t}, H, 2, 0.5, some);
  }
  CHECK(direct / 4.0 == 0.5);
  const WalkerPath wrong{{0, 0.0}, {}, 100.0, std::nullopt};
  CHECK_THROWS_AS(threatened_density(wrong, 1.0, ladder, 0, all, 0.25, 0.5), ParameterError);
}

TEST_CASE("trap oracle on a blind environment") {
  const Model blind = make_model("blind", {});
  const double H = 16.0, delta = 0.5;
  Replica rep = blind.make(61, walker_window(-40, 40, 3 * H, 0), 3 * H);
  const JumpRule stay = rule_stay();
  const auto trapped = make_trap_oracle(*rep.env, *rep.clocks, stay, H, delta, -1.0);
  // Displacement 0 > (-1 + 0.5) H: never trapped.
  CHECK_FALSE(trapped({0.0, 0.0}));
  const auto trapped2 = make_trap_oracle(*rep.env, *rep.clocks, stay, H, delta, -0.5);
  CHECK(trapped2({0.0, 5.0}));
}

TEST_CASE("ladder reference values") {
  const auto main = build_ladder(LadderVariant::Main, 10'000'000'000, 1);
  CHECK(main.l(0) == 316);
  CHECK(main.L(1) == 3'160'000'000'000);
  const auto ce = build_ladder(LadderVariant::Counterexample, 100'000, 1);
  CHECK(ce.l(0) == 10);
  CHECK(ce.L(1) == 1'000'000);
  CHECK(integer_root(81, 4) == 3);
  CHECK(integer_root(80, 4) == 2);
  CHECK(integer_root(1'000'000'000'000'000'000, 4) == 31622);
  CHECK_THROWS_AS(build_ladder(LadderVariant::Main, 1, 2), ParameterError);
  CHECK_THROWS_AS(build_ladder(LadderVariant::Main, 100, 60), ParameterError);
}

TEST_CASE("ladder recursion and sandwich, exactly") {
  for (auto variant : {LadderVariant::Main, LadderVariant::Counterexample}) {
    const int d = variant == LadderVariant::Main ? 4 : 5;
    for (std::int64_t L0 : {2LL, 16LL, 100LL, 1000LL, 12345LL, 100000LL, 10'000'000'000LL}) {
      int k_max = 0;
      while (k_max < 12) {
        try {
          build_ladder(variant, L0, k_max + 1);
          ++k_max;
        } catch (const ParameterError&) {
          break;
        }
      }
      const auto ladder = build_ladder(variant, L0, k_max);
      CHECK_FALSE(first_ladder_violation(ladder).has_value());
      for (std::size_t k = 0; k < ladder.entries.size(); ++k) {
        const __int128 L = ladder.L(k), l = ladder.l(k);
        __int128 lo = 1, hi = 1;
        for (int i = 0; i < d; ++i) {
          lo *= l;
          hi *= l + 1;
        }
        // l = floor(L^{1/d}), hence L_{k+1} = l L <= L^{1+1/d}.
        CHECK(lo <= L);
        CHECK(L < hi);
        if (k + 1 < ladder.entries.size()) CHECK(ladder.L(k + 1) == static_cast<std::int64_t>(l * L));
      }
    }
  }
}

TEST_CASE("ladder speed and density sequences") {
  const auto ladder = build_ladder(LadderVariant::Main, 10'000, 3, 0.25);
  REQUIRE(ladder.speeds.size() == 4);
  REQUIRE(ladder.densities.size() == 4);
  CHECK(ladder.speeds[0] == 0.25);
  CHECK(ladder.densities[0] == 1.0);
  for (std::size_t k = 0; k + 1 < 4; ++k) {
    CHECK(ladder.speeds[k + 1] == doctest::Approx(ladder.speeds[k] + 8.0 / ladder.l(k)));
    CHECK(ladder.densities[k + 1] == doctest::Approx(ladder.densities[k] - 2.0 / ladder.l(k)));
  }
  CHECK(ladder.densities_at_least_half());
  CHECK_FALSE(build_ladder(LadderVariant::Main, 16, 3).densities_at_least_half());
}

TEST_CASE("concentration: stay rule gives exact zeros") {
  const Model blind = make_model("blind", {});
  const std::vector<double> t{10.0, 100.0};
  const auto table = concentration_diagnostic(blind, rule_stay(), t, 0.1, 100, 67, 0.0);
  for (const auto& row : table.rows) CHECK(row.frequency.point == 0.0);
}

TEST_CASE("concentration: always-right matches the Poisson tail") {
  const Model blind = make_model("blind", {});
  const std::vector<double> t{10.0, 100.0, 1000.0};
  const int n = 4000;
  const auto table = concentration_diagnostic(blind, rule_always_right(), t, 0.2, n, 71, 1.0);
  REQUIRE(table.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = poisson_deviation_tail(t[i], 0.2);
    const double got = table.rows[i].frequency.point;
    CHECK(std::abs(got - p) <= 3.0 * oracle::binomial_sigma(p, n) + 1.0 / n);
    if (i > 0) CHECK(got < table.rows[i - 1].frequency.point);
  }
}

TEST_CASE("walker window margin") {
  const SiteRange w = walker_window(-3, 4, 100.0, 2);
  const Site margin = static_cast<Site>(std::ceil(100.0 + 60.0 + 20.0)) + 2;
  CHECK(w.lo == -3 - margin);
  CHECK(w.hi == 4 + margin);
  // P(Poisson(100) >= margin) is far below 1e-9.
  CHECK(oracle::poisson_upper_tail(100.0, margin - 2) < 1e-9);
}

}  // TEST_SUITE renormalization
