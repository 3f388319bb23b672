#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rwdre/core/clock_field.hpp"
#include "rwdre/core/geometry.hpp"
#include "rwdre/core/replicas.hpp"
#include "rwdre/core/statistics.hpp"
#include "rwdre/mixing/covariance.hpp"
#include "rwdre/renormalization/ladder.hpp"
#include "rwdre/walker/walker.hpp"

namespace rwdre {

// Colors as environment states (StateSpace::Color).
enum class Color : int { Gray = 0, Black = 1, White = 2 };

// Tilted rectangle in the (x, t) plane. Its long axis makes 30 degrees with
// the time axis, leaning toward +x for black and toward -x for white.
struct Rectangle {
  int scale = 0;
  double cx = 0.0;
  double ct = 0.0;
  double length = 0.0;
  double width = 0.0;
  Color color = Color::Black;
  double height = 0.0;

  // Unit vector of the long axis, (dx, dt).
  double axis_x() const noexcept;
  double axis_t() const noexcept;
  // Closed rectangle: boundary points are covered.
  bool covers(double x, double t) const noexcept;
  // Whether the closed rectangle meets the closed box [x_lo, x_hi] x [t_lo, t_hi].
  bool meets(const Box& box) const noexcept;
  // Times at which the vertical line through x enters and leaves the
  // rectangle, if it meets it.
  std::optional<std::pair<double, double>> vertical_section(double x) const noexcept;
};

// Width log^2(L) with the natural logarithm.
double soup_width(std::int64_t L);

//---------------------------------------------------------------------------//
/*!
 * Multi-scale Poisson soup of black and white rectangles restricted to the
 * rectangles that meet a generation window.
 *
 * Scale k has length L_k and width (ln L_k)^2 and centers forming a Poisson
 * process of intensity L_k^{-2} per unit area. Scales are generated
 * independently from (seed, k), so a scale's rectangles do not depend on
 * k_max.
 */
class RectangleSoup {
 public:
  RectangleSoup(ScaleLadder ladder, int k_max, Box window, std::uint64_t seed);

  const ScaleLadder& ladder() const noexcept { return ladder_; }
  int k_max() const noexcept { return k_max_; }
  const Box& window() const noexcept { return window_; }
  std::uint64_t seed() const noexcept { return seed_; }
  // Sorted by decreasing (scale, height): the first cover decides the color.
  std::span<const Rectangle> rectangles() const noexcept { return rects_; }
  std::size_t count(int scale) const noexcept;

  // Largest covering scale wins, ties broken by larger height; gray if
  // uncovered. ParameterError-free: the caller checks the window.
  Color color_at(double x, double t) const noexcept;
  // Number of rectangles covering (x, t).
  int cover_multiplicity(double x, double t) const noexcept;

 private:
  ScaleLadder ladder_;
  int k_max_;
  Box window_;
  std::uint64_t seed_;
  std::vector<Rectangle> rects_;
};

// Rectangles of scale `scale` (length L) that meet the window. Centers are
// drawn on the window dilated by the half-diagonal, then filtered.
std::vector<Rectangle> sample_scale(std::int64_t L, int scale, const Box& window,
                                    std::uint64_t seed);

enum class SoupForcing { None, AllGray, AllBlack, AllWhite };

// The color field as an environment over a site window. The walker reads the
// color at the ring point itself; the field is static in the plane, so the
// left limit differs from it only on rectangle boundaries.
class ColorEnvironment final : public EnvironmentView {
 public:
  ColorEnvironment(std::shared_ptr<const RectangleSoup> soup, SiteRange window, double horizon,
                   SoupForcing forcing = SoupForcing::None);

  StateSpace state_space() const override { return StateSpace::Color; }
  SiteRange window() const override { return window_; }
  double horizon() const override { return horizon_; }
  int state_at(Site x, double t) override;
  int state_before(Site x, double t) override;
  // Color changes along the vertical line through x; boundary times are the
  // entry and exit times of the covering rectangles.
  SiteHistory history(Site x, double until) override;

  Color color_at(double x, double t) const;

 private:
  std::shared_ptr<const RectangleSoup> soup_;
  SiteRange window_;
  double horizon_;
  SoupForcing forcing_;
  std::vector<std::optional<std::vector<StateChange>>> histories_;
  std::vector<int> initial_;
};

// Soup window covering the walker envelope for a run of length T from 0.
Box fluctuation_box(double T);

// Drift walker on a color environment with its own rate-1 clocks.
WalkerPath run_drift_walker(ColorEnvironment& field, ClockSource& clocks,
                            SpaceTimePoint start, double duration);

struct FluctuationRow {
  std::int64_t L = 0;
  EstimateWithCI right;  // P(X_L / L > 0.1)
  EstimateWithCI left;   // P(X_L / L < -0.1)
};

struct FluctuationOptions {
  int k_max = 2;
  double threshold = 0.1;
  SoupForcing forcing = SoupForcing::None;
  double level = 0.99;
  Execution execution = Execution::Parallel;
};

// Fresh soup and clocks per replica; one row per scale L in `scales`.
std::vector<FluctuationRow> fluctuation_experiment(std::int64_t L0,
                                                   std::span<const std::int64_t> scales,
                                                   std::int64_t replicas, std::uint64_t seed,
                                                   const FluctuationOptions& opt = {});

// Baseline: the symmetric occupation walker on the stationary spin-flip
// environment (nu = 1, rho = 1/2) over the same times.
std::vector<FluctuationRow> fluctuation_baseline(std::span<const std::int64_t> scales,
                                                 std::int64_t replicas, std::uint64_t seed,
                                                 double threshold = 0.1,
                                                 Execution execution = Execution::Parallel);

struct TouchRow {
  double r = 0.0;
  double side = 0.0;
  EstimateWithCI touch;  // P(some rectangle meets both boxes)
  double bound = 0.0;    // union-bound curve at r
};

struct TouchOptions {
  int k_max = 4;
  double side_exponent = 0.5;
  double level = 0.99;
  Execution execution = Execution::Parallel;
};

// Union-bound curve sum_{k >= kbar} (L_k + s)(log^2 L_k + s) L_k^{-2} with s the
// box side and kbar the first scale with r <= L_kbar; summed until the terms
// fall below 1e-15 of the total.
double soup_touch_bound(std::int64_t L0, double r, double side);

struct SoupCovarianceCheck {
  std::vector<TouchRow> rows;
  // Fit of the touch frequencies, which bound the covariance of [0,1]-valued
  // box observables up to the factor 4.
  DecayFit fit;

  bool decreasing() const noexcept;
  // Every touch frequency is at most the bound plus `sigmas` standard errors.
  bool under_bound(double sigmas = 3.0) const noexcept;
};

// Boxes B1 = [0, s] x [0, s] and B2 = B1 shifted by (r tan 30deg, s + r), so
// their time distance is r and B2 lies along the black tilt, with s = r^a.
SoupCovarianceCheck soup_covariance_check(std::int64_t L0, std::span<const double> r_list,
                                          std::int64_t replicas, std::uint64_t seed,
                                          const TouchOptions& opt = {});

}  // namespace rwdre
