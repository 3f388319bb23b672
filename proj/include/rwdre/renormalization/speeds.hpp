#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rwdre/core/replicas.hpp"
#include "rwdre/core/statistics.hpp"
#include "rwdre/walker/model.hpp"
#include "rwdre/walker/walker.hpp"

namespace rwdre {

// Displacement X_{t0+H} - x of a path started at (x, t0). Throws
// TruncationError for a path truncated before t0 + H.
Site displacement_at(const WalkerPath& path, double H);

// Some path has displacement >= v H after time H.
bool event_A(std::span<const WalkerPath> paths, double v, double H);
// Some path has displacement <= v H after time H.
bool event_A_tilde(std::span<const WalkerPath> paths, double v, double H);

// Lattice starts of (w + [0, H)) for w in [0, 1): two representatives, w = 0
// and w = 1/2, which cover the distinct start sets up to translation.
std::vector<Site> representative_starts(double w, double H);

struct EstimatorOptions {
  double level = 0.99;
  // Maximum tolerated fraction of truncated (discarded) replicas.
  double discard_cap = 0.01;
  Execution execution = Execution::Parallel;
};

// Per-replica extremes of displacement over each representative start set.
struct ReplicaExtremes {
  bool discarded = false;
  Site max_disp[2] = {0, 0};
  Site min_disp[2] = {0, 0};
};

// Coupled walkers from all starts of both representatives over [0, H] on one
// fresh replica. The replica window covers the rate-1 ring bound with a
// 1e-9 tail margin.
ReplicaExtremes sample_extremes(const Model& model, const JumpRule& rule, double H,
                                std::uint64_t seed);

std::vector<ReplicaExtremes> sample_extremes_batch(const Model& model, const JumpRule& rule,
                                                   double H, std::int64_t replicas,
                                                   std::uint64_t seed,
                                                   const EstimatorOptions& opt = {});

// Frequency of A_{H,w}(v) maximized over the two representatives. Truncated
// replicas are discarded and counted; above the cap, StatisticalValidityError.
EstimateWithCI estimate_pH(const Model& model, const JumpRule& rule, double H, double v,
                           std::int64_t replicas, std::uint64_t seed,
                           const EstimatorOptions& opt = {});
EstimateWithCI estimate_pH_tilde(const Model& model, const JumpRule& rule, double H,
                                 double v, std::int64_t replicas, std::uint64_t seed,
                                 const EstimatorOptions& opt = {});

// The same estimates for every v of a grid from one sample (common random
// numbers): p_H is nonincreasing and p~_H nondecreasing in v, exactly.
struct CurvePair {
  std::vector<double> v;
  std::vector<EstimateWithCI> p;
  std::vector<EstimateWithCI> p_tilde;
};
CurvePair curves_from_extremes(std::span<const ReplicaExtremes> sample, double H,
                               std::span<const double> v_grid, std::uint64_t seed,
                               const EstimatorOptions& opt = {});

struct BracketRow {
  double H = 0.0;
  // Smallest grid v with p_H(v) <= theta; nullopt if none (open bracket).
  std::optional<double> v_plus;
  // Largest grid v with p~_H(v) <= theta; nullopt if none.
  std::optional<double> v_minus;
  CurvePair curves;
  std::int64_t discards = 0;

  bool open() const noexcept { return !v_plus || !v_minus; }
  // v_plus - v_minus when both exist.
  std::optional<double> width() const noexcept;
};

struct SpeedBracket {
  double theta = 0.05;
  std::vector<double> v_grid;
  std::vector<BracketRow> rows;  // one per H
};

SpeedBracket bracket_speeds(const Model& model, const JumpRule& rule,
                            std::span<const double> H_grid, std::span<const double> v_grid,
                            double theta, std::int64_t replicas, std::uint64_t seed,
                            const EstimatorOptions& opt = {});

// Threshold scan of one curve pair.
BracketRow bracket_row(double H, CurvePair curves, double theta);

// Uniform grid of n points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, int n);

struct ConcentrationRow {
  double t = 0.0;
  EstimateWithCI frequency;  // P(|X_t / t - v| >= eps)
};

// Frequency of |X_t - v t| >= eps t for a walker from the origin. Each t of
// the grid gets its own replica set, so the rows are independent. When v is
// absent it is estimated as the mean of X_t / t at the largest t.
struct ConcentrationTable {
  double v = 0.0;
  double eps = 0.0;
  std::vector<ConcentrationRow> rows;
};
ConcentrationTable concentration_diagnostic(const Model& model, const JumpRule& rule,
                                            std::span<const double> t_grid, double eps,
                                            std::int64_t replicas, std::uint64_t seed,
                                            std::optional<double> v = std::nullopt,
                                            const EstimatorOptions& opt = {});

// Window of sites a rate-1 walker started in [lo, hi] cannot leave before
// time T except with probability below 1e-9, widened by `radius`.
SiteRange walker_window(Site lo, Site hi, double T, int radius);

}  // namespace rwdre
