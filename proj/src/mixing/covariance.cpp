#include "rwdre/mixing/covariance.hpp"

#include <algorithm>
#include <cmath>

#include "rwdre/core/errors.hpp"
#include "rwdre/core/rng.hpp"

namespace rwdre {

namespace {

constexpr double kPointHeight = 1e-6;

SiteRange box_sites(const Box& b) {
  const SiteRange s = b.sites();
  if (s.empty()) throw ParameterError("observable box contains no lattice site");
  return s;
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("decay fit needs distinct r values");
  const double slope = sxy / sxx;
  LineFit f;
  f.exponent = -slope;
  f.log_prefactor = my - slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.log_prefactor + slope * x[i]);
    f.residual += e * e;
  }
  return f;
}

}  // namespace

double BoxObservable::evaluate(EnvironmentView& env) const {
  const SiteRange sites = box_sites(box);
  if (kind == Kind::SiteIndicator) {
    return occupation(env.state_space(), env.state_at(sites.lo, box.t_lo()));
  }
  const StateSpace space = env.state_space();
  double occupied = 0.0;
  for (Site x = sites.lo; x <= sites.hi; ++x) {
    occupied += env.history(x, box.t_hi()).occupied_time(space, box.t_lo(), box.t_hi());
  }
  const double avg = std::clamp(
      occupied / (static_cast<double>(sites.size()) * box.height()), 0.0, 1.0);
  if (kind == Kind::BoxAverage) return avg;
  return avg >= threshold ? 1.0 : 0.0;
}

BoxObservable point_indicator(Site x, double t) {
  return {Box(static_cast<double>(x), static_cast<double>(x) + 1.0, t, t + kPointHeight),
          BoxObservable::Kind::SiteIndicator, 0.5};
}

EstimateWithCI estimate_box_covariance(const Model& model, const BoxObservable& f1,
                                       const BoxObservable& f2, std::int64_t replicas,
                                       std::uint64_t seed, const CovarianceOptions& opt) {
  if (replicas < 30) {
    throw StatisticalValidityError("covariance estimate needs at least 30 replicas");
  }
  const SiteRange s1 = box_sites(f1.box), s2 = box_sites(f2.box);
  const SiteRange window(std::min(s1.lo, s2.lo), std::max(s1.hi, s2.hi));
  const double horizon = std::max(f1.box.t_hi(), f2.box.t_hi());
  struct Pair {
    double a, b;
  };
  const auto values = map_replicas<Pair>(
      replicas,
      [&](std::int64_t i) {
        Replica rep = model.make(replica_seed(seed, static_cast<std::uint64_t>(i)), window,
                                 horizon);
        return Pair{f1.evaluate(*rep.env), f2.evaluate(*rep.env)};
      },
      opt.execution);
  std::vector<double> a, b;
  a.reserve(values.size());
  b.reserve(values.size());
  for (const auto& v : values) {
    a.push_back(v.a);
    b.push_back(v.b);
  }
  return covariance_estimate(a, b, opt.level, seed);
}

std::optional<double> DecayFit::alpha_hat() const noexcept {
  if (!power) return std::nullopt;
  return power->exponent;
}

std::optional<double> DecayFit::beta_hat() const noexcept {
  if (!exponential) return std::nullopt;
  return exponential->exponent;
}

DecayFit fit_decay(std::vector<DecayPoint> pairs) {
  DecayFit fit;
  fit.pairs = std::move(pairs);
  fit.below_noise = !fit.pairs.empty() &&
                    std::all_of(fit.pairs.begin(), fit.pairs.end(), [](const DecayPoint& p) {
                      return std::abs(p.estimate) <= p.half_width;
                    });
  if (fit.below_noise) return fit;
  std::vector<double> log_r, r, log_c;
  for (const auto& p : fit.pairs) {
    if (p.estimate > 0.0 && p.r > 0.0) {
      log_r.push_back(std::log(p.r));
      r.push_back(p.r);
      log_c.push_back(std::log(p.estimate));
    }
  }
  if (log_c.size() < 3) return fit;
  fit.power = least_squares(log_r, log_c);
  fit.exponential = least_squares(r, log_c);
  fit.preferred = fit.exponential->residual < fit.power->residual ? DecayModel::Exponential
                                                                  : DecayModel::PowerLaw;
  return fit;
}

ObservablePairTemplate lag_template(Site x, double t0) {
  return [x, t0](double r) {
    return std::pair{point_indicator(x, t0), point_indicator(x, t0 + r)};
  };
}

ObservablePairTemplate box_template(BoxObservable::Kind kind, double side_factor,
                                    double threshold) {
  if (!(side_factor > 0.0 && side_factor <= 5.0)) {
    throw ParameterError("box side factor must lie in (0, 5]");
  }
  return [kind, side_factor, threshold](double r) {
    const double s = side_factor * r;
    return std::pair{BoxObservable{Box(0.0, s, 0.0, s), kind, threshold},
                     BoxObservable{Box(0.0, s, s + r, 2.0 * s + r), kind, threshold}};
  };
}

DecayFit covariance_decay_profile(const Model& model, const ObservablePairTemplate& pairs,
                                  std::span<const double> r_list, std::int64_t replicas,
                                  std::uint64_t seed, const CovarianceOptions& opt) {
  if (r_list.size() < 3) throw ParameterError("decay profile needs at least three r values");
  if (!std::is_sorted(r_list.begin(), r_list.end())) {
    throw ParameterError("decay profile r values must be sorted");
  }
  std::vector<DecayPoint> points;
  for (double r : r_list) {
    if (!(r > 0.0)) throw ParameterError("decay profile r values must be positive");
    const auto [f1, f2] = pairs(r);
    // Common seed across r: the trend is compared under shared randomness.
    const auto e = estimate_box_covariance(model, f1, f2, replicas, seed, opt);
    points.push_back({r, e.point, e.half_width});
  }
  return fit_decay(std::move(points));
}

}  // namespace rwdre
