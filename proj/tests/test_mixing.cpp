#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rwdre/cli/models.hpp"
#include "rwdre/core/errors.hpp"
#include "rwdre/mixing/covariance.hpp"

using namespace rwdre;

TEST_SUITE("mixing") {

TEST_CASE("power-law fit on exact synthetic data") {
  std::vector<DecayPoint> pts;
  for (double r : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.push_back({r, std::pow(r, -3.0), 0.0});
  const DecayFit fit = fit_decay(pts);
  REQUIRE(fit.alpha_hat().has_value());
  CHECK(std::abs(*fit.alpha_hat() - 3.0) < 1e-9);
  CHECK(fit.preferred == DecayModel::PowerLaw);
  CHECK(fit.power->residual < 1e-20);
}

TEST_CASE("exponential fit on exact synthetic data") {
  std::vector<DecayPoint> pts;
  for (double r : {0.5, 1.0, 2.0, 4.0}) pts.push_back({r, 0.3 * std::exp(-1.7 * r), 0.0});
  const DecayFit fit = fit_decay(pts);
  REQUIRE(fit.beta_hat().has_value());
  CHECK(std::abs(*fit.beta_hat() - 1.7) < 1e-9);
  CHECK(std::abs(std::exp(fit.exponential->log_prefactor) - 0.3) < 1e-9);
  CHECK(fit.preferred == DecayModel::Exponential);
}

TEST_CASE("fit needs three positive points and flags noise") {
  const DecayFit two = fit_decay({{1.0, 0.5, 0.01}, {2.0, 0.2, 0.01}, {4.0, -0.1, 0.01}});
  CHECK_FALSE(two.alpha_hat().has_value());
  CHECK_FALSE(two.below_noise);
  const DecayFit noise = fit_decay({{1.0, 0.001, 0.01}, {2.0, -0.002, 0.01}, {4.0, 0.0, 0.01}});
  CHECK(noise.below_noise);
  CHECK_FALSE(noise.alpha_hat().has_value());
}

TEST_CASE("box observables on a hand-made trajectory") {
  // Site 0 occupied on [1, 3), site 1 occupied throughout.
  std::vector<EnvTrajectory::SiteLog> logs{{0, {{1.0, 1}, {3.0, 0}}}, {1, {}}};
  EnvTrajectory env(StateSpace::Binary, {0, 1}, 10.0, logs);
  const BoxObservable avg{Box(0.0, 2.0, 0.0, 4.0), BoxObservable::Kind::BoxAverage, 0.5};
  CHECK(avg.evaluate(env) == doctest::Approx((2.0 + 4.0) / 8.0).epsilon(1e-15));
  const BoxObservable thr{Box(0.0, 2.0, 0.0, 4.0), BoxObservable::Kind::Threshold, 0.75};
  CHECK(thr.evaluate(env) == 1.0);
  const BoxObservable thr2{Box(0.0, 2.0, 0.0, 4.0), BoxObservable::Kind::Threshold, 0.8};
  CHECK(thr2.evaluate(env) == 0.0);
  CHECK(point_indicator(0, 0.5).evaluate(env) == 0.0);
  CHECK(point_indicator(0, 1.0).evaluate(env) == 1.0);
  const BoxObservable single{Box(0.0, 1.0, 3.0, 5.0), BoxObservable::Kind::BoxAverage, 0.5};
  CHECK(single.evaluate(env) == 0.0);
}

TEST_CASE("lag and box templates have time distance r") {
  for (double r : {0.5, 2.0, 7.0}) {
    const auto [a, b] = lag_template()(r);
    CHECK(time_distance(a.box, b.box).distance == doctest::Approx(r - 1e-6));
    const auto [c, d] = box_template(BoxObservable::Kind::BoxAverage, 1.0)(r);
    CHECK(time_distance(c.box, d.box).distance == doctest::Approx(r));
    CHECK(c.box.width() <= 5.0 * r);
  }
  CHECK_THROWS_AS(box_template(BoxObservable::Kind::BoxAverage, 6.0), ParameterError);
}

TEST_CASE("constant observable has zero covariance") {
  const Model model = make_model("spinflip", {});
  const BoxObservable one{Box(0.0, 1.0, 0.0, 1.0), BoxObservable::Kind::Threshold, 0.0};
  const auto est = estimate_box_covariance(model, one, point_indicator(0, 2.0), 200, 3);
  CHECK(est.point == 0.0);
  CHECK(est.half_width == 0.0);
}

TEST_CASE("too few replicas are refused") {
  const Model model = make_model("spinflip", {});
  CHECK_THROWS_AS(
      estimate_box_covariance(model, point_indicator(0, 0.0), point_indicator(0, 1.0), 29, 1),
      StatisticalValidityError);
}

TEST_CASE("spin-flip lag covariance matches the two-state chain") {
  const Model model = make_model("spinflip", {{"nu", 1.0}, {"rho", 0.5}});
  const auto est =
      estimate_box_covariance(model, point_indicator(0, 0.0), point_indicator(0, 1.0), 20000, 5);
  // The indicators sit 1 - 1e-6 apart.
  const double expected = oracle::two_state_autocovariance(1.0, 0.5, 1.0 - 1e-6);
  CHECK(std::abs(est.point - expected) < 3.0 * est.sigma());
}

TEST_CASE("spin-flip distinct sites are uncorrelated") {
  const Model model = make_model("spinflip", {});
  for (double lag : {0.0, 1.0}) {
    const auto est = estimate_box_covariance(model, point_indicator(0, 0.0),
                                             point_indicator(3, lag), 20000, 7);
    CHECK(std::abs(est.point) < 3.0 * est.sigma());
  }
  // Spatially disjoint box averages.
  const BoxObservable a{Box(0.0, 3.0, 0.0, 2.0), BoxObservable::Kind::BoxAverage, 0.5};
  const BoxObservable b{Box(5.0, 8.0, 0.0, 2.0), BoxObservable::Kind::BoxAverage, 0.5};
  const auto est = estimate_box_covariance(model, a, b, 20000, 11);
  CHECK(std::abs(est.point) < 3.0 * est.sigma());
}

TEST_CASE("covariance estimate is symmetric") {
  const Model model = make_model("renewal", {{"weights", {1.0, 2.0, 1.0}}});
  const BoxObservable a{Box(0.0, 2.0, 0.0, 1.0), BoxObservable::Kind::BoxAverage, 0.5};
  const BoxObservable b{Box(0.0, 2.0, 1.5, 3.0), BoxObservable::Kind::BoxAverage, 0.5};
  const auto ab = estimate_box_covariance(model, a, b, 500, 13);
  const auto ba = estimate_box_covariance(model, b, a, 500, 13);
  CHECK(std::abs(ab.point - ba.point) < 1e-12);
  CHECK(std::abs(ab.half_width - ba.half_width) < 1e-12);
}

TEST_CASE("serial and parallel covariance agree") {
  const Model model = make_model("spinflip", {});
  const auto s = estimate_box_covariance(model, point_indicator(0, 0.0), point_indicator(0, 0.5),
                                         300, 17, {0.99, Execution::Serial});
  const auto p = estimate_box_covariance(model, point_indicator(0, 0.0), point_indicator(0, 0.5),
                                         300, 17, {0.99, Execution::Parallel});
  CHECK(s.point == p.point);
  CHECK(s.half_width == p.half_width);
}

TEST_CASE("renewal with light-tailed weights decorrelates in r") {
  std::vector<double> w;
  for (int n = 1; n <= 8; ++n) w.push_back(std::exp(-static_cast<double>(n)));
  const Model model = make_model("renewal", {{"weights", w}});
  const std::vector<double> r{0.25, 0.5, 1.0, 2.0};
  const DecayFit fit = covariance_decay_profile(model, lag_template(), r, 20000, 19);
  REQUIRE(fit.pairs.size() == 4);
  for (std::size_t i = 1; i < fit.pairs.size(); ++i) {
    CHECK(fit.pairs[i].estimate < fit.pairs[i - 1].estimate);
  }
}

TEST_CASE("decay profile validates its r list") {
  const Model model = make_model("spinflip", {});
  const std::vector<double> two{1.0, 2.0}, unsorted{2.0, 1.0, 3.0};
  CHECK_THROWS_AS(covariance_decay_profile(model, lag_template(), two, 100, 1), ParameterError);
  CHECK_THROWS_AS(covariance_decay_profile(model, lag_template(), unsorted, 100, 1),
                  ParameterError);
}

}  // TEST_SUITE mixing
