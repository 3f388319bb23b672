#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "rwdre/core/clock_field.hpp"
#include "rwdre/core/errors.hpp"
#include "rwdre/core/geometry.hpp"
#include "rwdre/core/path.hpp"
#include "rwdre/core/replicas.hpp"
#include "rwdre/core/rng.hpp"
#include "rwdre/core/statistics.hpp"
#include "rwdre/environments/trajectory.hpp"

using namespace rwdre;

TEST_SUITE("core") {

TEST_CASE("streams are deterministic and separated by key") {
  SplitMix64 a(7, Stream::Test, 3), b(7, Stream::Test, 3), c(7, Stream::Test, 4),
      d(8, Stream::Test, 3);
  const auto va = a(), vb = b(), vc = c(), vd = d();
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  CHECK(stream_key(1, Stream::WalkerClock, 0) != stream_key(1, Stream::SpinFlip, 0));
  CHECK(replica_seed(5, 0) != replica_seed(5, 1));
}

TEST_CASE("uniform and exponential moments") {
  SplitMix64 rng(11, Stream::Test, 0);
  const int n = 1'000'000;
  double su = 0.0, se = 0.0, se2 = 0.0;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double e = rng.unit_exponential();
    REQUIRE(e >= 0.0);
    se += e;
    se2 += e * e;
    tail += e > 2.0;
  }
  CHECK(std::abs(su / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(se / n - 1.0) < 3.0 / std::sqrt(n));
  // Var of E^2 is 20, so the second moment has sd sqrt(20/n).
  CHECK(std::abs(se2 / n - 2.0) < 3.0 * std::sqrt(20.0 / n));
  const double p = std::exp(-2.0);
  CHECK(std::abs(static_cast<double>(tail) / n - p) < 3.0 * oracle::binomial_sigma(p, n));
}

TEST_CASE("exponential tail deep in the ziggurat base strip") {
  SplitMix64 rng(12, Stream::Test, 0);
  const int n = 2'000'000;
  int tail = 0;
  for (int i = 0; i < n; ++i) tail += rng.unit_exponential() > 8.0;
  const double p = std::exp(-8.0);
  CHECK(std::abs(static_cast<double>(tail) / n - p) < 3.0 * oracle::binomial_sigma(p, n));
}

TEST_CASE("clock field counts are Poisson and arrivals increase") {
  const double rate = 1.5, H = 20.0;
  const ClockField f = sample_clock_field(rate, {0, 1999}, H, 3);
  double sum = 0.0, sum2 = 0.0;
  for (Site x = 0; x <= 1999; ++x) {
    const auto a = f.arrivals(x);
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].time >= 0.0);
      REQUIRE(a[i].time < H);
      if (i > 0) REQUIRE(a[i].time > a[i - 1].time);
    }
    sum += static_cast<double>(a.size());
    sum2 += static_cast<double>(a.size() * a.size());
  }
  const double mean = sum / 2000.0;
  const double var = sum2 / 2000.0 - mean * mean;
  CHECK(std::abs(mean - rate * H) < 3.0 * std::sqrt(rate * H / 2000.0));
  CHECK(var == doctest::Approx(rate * H).epsilon(0.1));
}

TEST_CASE("lazy clocks reproduce the materialized field") {
  const ClockField f = sample_clock_field(1.0, {-20, 20}, 50.0, 9);
  LazyClocks lazy({-20, 20}, 50.0, 1.0, 9);
  for (Site x = -20; x <= 20; ++x) {
    double t = 0.0;
    for (const auto& a : f.arrivals(x)) {
      const auto got = lazy.next_after(x, t);
      REQUIRE(got.has_value());
      CHECK(got->time == a.time);
      CHECK(got->uniform == a.uniform);
      t = a.time;
    }
    CHECK_FALSE(lazy.next_after(x, t).has_value());
  }
  CHECK(f.tie_breaks() == 0);
}

TEST_CASE("clock field binary cache round trip") {
  const ClockField f = sample_clock_field(2.0, {3, 9}, 5.0, 4);
  std::stringstream ss;
  f.write_binary(ss);
  const ClockField g = ClockField::read_binary(ss);
  CHECK(f == g);
  std::stringstream bad("xx");
  CHECK_THROWS_AS(ClockField::read_binary(bad), ParameterError);
}

TEST_CASE("boxes and time distances") {
  const Box a(0, 4, 0, 2), b(0, 4, 5, 6), c(1, 2, 1, 3), d(0, 1, 2, 3);
  CHECK(time_distance(a, b).distance == 3.0);
  CHECK(time_distance(b, a).distance == 3.0);
  CHECK(time_distance(a, c).overlap);
  CHECK_FALSE(time_distance(a, d).overlap);
  CHECK(time_distance(a, d).distance == 0.0);
  CHECK(a.sites() == SiteRange(0, 3));
  CHECK(Box(0.5, 1.5, 0, 1).sites() == SiteRange(1, 1));
  CHECK_THROWS_AS(Box(1, 1, 0, 1), ParameterError);
  CHECK_THROWS_AS(SpaceTimePoint(0, -1.0), ParameterError);
}

TEST_CASE("paths are right-continuous") {
  WalkerPath p{{0, 0.0}, {{1.0, 1}, {2.0, 0}, {3.0, -1}}, 4.0, std::nullopt};
  CHECK(p.at(0.5) == 0);
  CHECK(p.at(1.0) == 1);
  CHECK(p.before(1.0) == 0);
  CHECK(p.at(3.5) == -1);
  CHECK(p.displacement() == -1);
  CHECK_THROWS_AS(p.at(4.5), ParameterError);
}

TEST_CASE("normal quantile and proportion half-width") {
  CHECK(normal_z(0.99) == doctest::Approx(2.5758293035489).epsilon(1e-10));
  CHECK(normal_z(0.95) == doctest::Approx(1.9599639845401).epsilon(1e-10));
  const auto e = proportion_estimate(30, 100, 0.99, 1);
  CHECK(e.point == 0.3);
  CHECK(e.half_width == doctest::Approx(normal_z(0.99) * std::sqrt(0.3 * 0.7 / 100)));
  CHECK(e.sigma() == doctest::Approx(std::sqrt(0.3 * 0.7 / 100)));
  CHECK_THROWS_AS(proportion_estimate(0, 0, 0.99, 1), StatisticalValidityError);
}

TEST_CASE("covariance jackknife against a direct leave-one-out") {
  SplitMix64 rng(5, Stream::Test, 0);
  std::vector<double> a(57), b(57);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.uniform();
    b[i] = 0.5 * a[i] + rng.uniform();
  }
  auto cov = [](const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / (n - 1.0);
  };
  std::vector<double> loo;
  for (std::size_t k = 0; k < a.size(); ++k) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i != k) {
        x.push_back(a[i]);
        y.push_back(b[i]);
      }
    }
    loo.push_back(cov(x, y));
  }
  const double n = static_cast<double>(a.size());
  const double m = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - m) * (v - m);
  const double se = std::sqrt((n - 1.0) / n * ss);

  const auto e = covariance_estimate(a, b, 0.99, 1);
  CHECK(e.point == doctest::Approx(cov(a, b)).epsilon(1e-12));
  CHECK(e.sigma() == doctest::Approx(se).epsilon(1e-9));
  const auto f = covariance_estimate(b, a, 0.99, 1);
  CHECK(std::abs(e.point - f.point) <= 1e-12);
  CHECK(std::abs(e.half_width - f.half_width) <= 1e-12);
}

TEST_CASE("serial and parallel replica maps agree") {
  auto fn = [](std::int64_t i) {
    SplitMix64 r(replica_seed(3, static_cast<std::uint64_t>(i)));
    return r.uniform();
  };
  const auto s = map_replicas<double>(200, fn, Execution::Serial);
  const auto p = map_replicas<double>(200, fn, Execution::Parallel);
  CHECK(s == p);
  CHECK_THROWS_AS(map_replicas<int>(
                      10,
                      [](std::int64_t i) -> int {
                        if (i == 4) throw InvariantError("boom");
                        return 0;
                      },
                      Execution::Serial),
                  InvariantError);
}

TEST_CASE("trajectory queries and event log round trip") {
  EnvTrajectory tr(StateSpace::Binary, {0, 1}, 10.0,
                   {{0, {{1.0, 1}, {4.0, 0}}}, {1, {}}});
  CHECK(tr.at(0, 1.0) == 1);
  CHECK(tr.before(0, 1.0) == 0);
  CHECK(tr.at(0, 3.999) == 1);
  CHECK(tr.at(0, 4.0) == 0);
  CHECK(tr.site(0).occupied_time(StateSpace::Binary, 0.0, 10.0) == doctest::Approx(3.0));
  CHECK(tr.site(0).occupied_time(StateSpace::Binary, 2.0, 5.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(tr.at(2, 1.0), TruncationError);
  CHECK_THROWS_AS(tr.at(0, 11.0), TruncationError);
  std::stringstream ss;
  tr.write_event_log(ss);
  CHECK(EnvTrajectory::read_event_log(ss) == tr);
}

}  // TEST_SUITE
