#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rwdre/core/geometry.hpp"
#include "rwdre/core/replicas.hpp"
#include "rwdre/core/statistics.hpp"
#include "rwdre/walker/model.hpp"

namespace rwdre {

// [0,1]-valued function of the environment restricted to a box.
struct BoxObservable {
  enum class Kind {
    SiteIndicator,  // occupation at the box's lower-left lattice point
    BoxAverage,     // space-time average occupation over the box
    Threshold,      // 1{box average >= threshold}
  };
  Box box;
  Kind kind = Kind::SiteIndicator;
  double threshold = 0.5;

  // Computed exactly from the event logs of the box's sites.
  double evaluate(EnvironmentView& env) const;
};

// Site indicator at the lattice point (x, t), on a box of height 1e-6 so that
// two such observables at lag r have time distance r - 1e-6.
BoxObservable point_indicator(Site x, double t);

struct CovarianceOptions {
  double level = 0.99;
  Execution execution = Execution::Parallel;
};

// Sample covariance of f1 and f2 over independent stationary replicas, with
// a jackknife half-width. Refuses fewer than 30 replicas.
EstimateWithCI estimate_box_covariance(const Model& model, const BoxObservable& f1,
                                       const BoxObservable& f2, std::int64_t replicas,
                                       std::uint64_t seed, const CovarianceOptions& opt = {});

enum class DecayModel { PowerLaw, Exponential };

struct DecayPoint {
  double r = 0.0;
  double estimate = 0.0;
  double half_width = 0.0;
};

struct LineFit {
  double exponent = 0.0;  // alpha (power law) or beta (exponential)
  double log_prefactor = 0.0;
  double residual = 0.0;  // sum of squared log residuals
};

struct DecayFit {
  std::vector<DecayPoint> pairs;
  // Set when at least three estimates are positive.
  std::optional<LineFit> power;
  std::optional<LineFit> exponential;
  // Smaller residual of the two; PowerLaw when no fit exists.
  DecayModel preferred = DecayModel::PowerLaw;
  // Every estimate is within its half-width of 0: decay below the noise
  // floor, reported without a fit.
  bool below_noise = false;

  std::optional<double> alpha_hat() const noexcept;  // power-law exponent
  std::optional<double> beta_hat() const noexcept;   // exponential rate
};

// Least squares of log(estimate) against log r and against r, on the
// positive estimates.
DecayFit fit_decay(std::vector<DecayPoint> pairs);

using ObservablePairTemplate = std::function<std::pair<BoxObservable, BoxObservable>(double r)>;

// Point indicators at the same site, lag r.
ObservablePairTemplate lag_template(Site x = 0, double t0 = 0.0);
// Congruent boxes B1 = [0, s) x [0, s) and B2 = B1 shifted up by s + r, so
// their time distance is r. s = side_factor * r; side_factor must lie in
// (0, 5].
ObservablePairTemplate box_template(BoxObservable::Kind kind, double side_factor = 1.0,
                                    double threshold = 0.5);

DecayFit covariance_decay_profile(const Model& model, const ObservablePairTemplate& pairs,
                                  std::span<const double> r_list, std::int64_t replicas,
                                  std::uint64_t seed, const CovarianceOptions& opt = {});

}  // namespace rwdre
