#include "rwdre/renormalization/speeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rwdre/core/errors.hpp"

namespace rwdre {

Site displacement_at(const WalkerPath& path, double H) {
  const double t = path.start.t + H;
  if (path.truncated_at && *path.truncated_at <= t) {
    throw TruncationError("path truncated before the event time", *path.truncated_at);
  }
  if (t > path.end_time) {
    throw ParameterError("path ends before the event time");
  }
  return path.at(t) - path.start.x;
}

bool event_A(std::span<const WalkerPath> paths, double v, double H) {
  bool hit = false;
  for (const auto& p : paths) {
    hit = hit || static_cast<double>(displacement_at(p, H)) >= v * H;
  }
  return hit;
}

bool event_A_tilde(std::span<const WalkerPath> paths, double v, double H) {
  bool hit = false;
  for (const auto& p : paths) {
    hit = hit || static_cast<double>(displacement_at(p, H)) <= v * H;
  }
  return hit;
}

std::vector<Site> representative_starts(double w, double H) {
  if (!(w >= 0.0 && w < 1.0) || !(H > 0.0)) {
    throw ParameterError("representative needs w in [0, 1) and H > 0");
  }
  std::vector<Site> out;
  for (auto x = static_cast<Site>(std::ceil(w)); static_cast<double>(x) < w + H; ++x) {
    out.push_back(x);
  }
  return out;
}

SiteRange walker_window(Site lo, Site hi, double T, int radius) {
  const auto margin = static_cast<Site>(std::ceil(T + 6.0 * std::sqrt(T) + 20.0)) + radius;
  return {lo - margin, hi + margin};
}

//---------------------------------------------------------------------------//
ReplicaExtremes sample_extremes(const Model& model, const JumpRule& rule, double H,
                                std::uint64_t seed) {
  const std::vector<Site> reps[2] = {representative_starts(0.0, H),
                                     representative_starts(0.5, H)};
  Site lo = std::numeric_limits<Site>::max();
  Site hi = std::numeric_limits<Site>::min();
  for (const auto& r : reps) {
    lo = std::min(lo, r.front());
    hi = std::max(hi, r.back());
  }
  std::vector<Site> starts;
  for (Site x = lo; x <= hi; ++x) starts.push_back(x);
  Replica rep = model.make(seed, walker_window(lo, hi, H, rule.radius()), H);
  ReplicaExtremes out;
  CoupledEnsemble ens;
  try {
    ens = run_coupled(*rep.env, *rep.clocks, rule, starts, 0.0, H);
  } catch (const TruncationError&) {
    out.discarded = true;
    return out;
  }
  for (int r = 0; r < 2; ++r) {
    Site mx = std::numeric_limits<Site>::min();
    Site mn = std::numeric_limits<Site>::max();
    for (Site x : reps[r]) {
      const Site d = displacement_at(ens.paths[static_cast<std::size_t>(x - lo)], H);
      mx = std::max(mx, d);
      mn = std::min(mn, d);
    }
    out.max_disp[r] = mx;
    out.min_disp[r] = mn;
  }
  return out;
}

std::vector<ReplicaExtremes> sample_extremes_batch(const Model& model, const JumpRule& rule,
                                                   double H, std::int64_t replicas,
                                                   std::uint64_t seed,
                                                   const EstimatorOptions& opt) {
  if (replicas < 1) throw ParameterError("need at least one replica");
  auto sample = map_replicas<ReplicaExtremes>(
      replicas,
      [&](std::int64_t i) { return sample_extremes(model, rule, H, replica_seed(seed, i)); },
      opt.execution);
  const auto discards = std::count_if(sample.begin(), sample.end(),
                                      [](const ReplicaExtremes& e) { return e.discarded; });
  if (static_cast<double>(discards) > opt.discard_cap * static_cast<double>(replicas)) {
    throw StatisticalValidityError(std::to_string(discards) + " of " +
                                   std::to_string(replicas) +
                                   " replicas truncated, above the discard cap");
  }
  return sample;
}

namespace {

EstimateWithCI frequency(std::span<const ReplicaExtremes> sample, bool upper, double v,
                         double H, std::uint64_t seed, double level) {
  std::int64_t kept = 0;
  std::int64_t hits[2] = {0, 0};
  for (const auto& e : sample) {
    if (e.discarded) continue;
    ++kept;
    for (int r = 0; r < 2; ++r) {
      const bool hit = upper ? static_cast<double>(e.max_disp[r]) >= v * H
                             : static_cast<double>(e.min_disp[r]) <= v * H;
      hits[r] += hit;
    }
  }
  if (kept == 0) throw StatisticalValidityError("every replica was discarded");
  auto est = proportion_estimate(std::max(hits[0], hits[1]), kept, level, seed);
  est.discards = static_cast<std::int64_t>(sample.size()) - kept;
  return est;
}

}  // namespace

EstimateWithCI estimate_pH(const Model& model, const JumpRule& rule, double H, double v,
                           std::int64_t replicas, std::uint64_t seed,
                           const EstimatorOptions& opt) {
  const auto sample = sample_extremes_batch(model, rule, H, replicas, seed, opt);
  return frequency(sample, true, v, H, seed, opt.level);
}

EstimateWithCI estimate_pH_tilde(const Model& model, const JumpRule& rule, double H,
                                 double v, std::int64_t replicas, std::uint64_t seed,
                                 const EstimatorOptions& opt) {
  const auto sample = sample_extremes_batch(model, rule, H, replicas, seed, opt);
  return frequency(sample, false, v, H, seed, opt.level);
}

CurvePair curves_from_extremes(std::span<const ReplicaExtremes> sample, double H,
                               std::span<const double> v_grid, std::uint64_t seed,
                               const EstimatorOptions& opt) {
  CurvePair out;
  out.v.assign(v_grid.begin(), v_grid.end());
  for (double v : v_grid) {
    out.p.push_back(frequency(sample, true, v, H, seed, opt.level));
    out.p_tilde.push_back(frequency(sample, false, v, H, seed, opt.level));
  }
  return out;
}

//---------------------------------------------------------------------------//
std::optional<double> BracketRow::width() const noexcept {
  if (!v_plus || !v_minus) return std::nullopt;
  return *v_plus - *v_minus;
}

BracketRow bracket_row(double H, CurvePair curves, double theta) {
  BracketRow row;
  row.H = H;
  for (std::size_t i = 0; i < curves.v.size(); ++i) {
    if (curves.p[i].point <= theta) {
      row.v_plus = curves.v[i];
      break;
    }
  }
  for (std::size_t i = curves.v.size(); i-- > 0;) {
    if (curves.p_tilde[i].point <= theta) {
      row.v_minus = curves.v[i];
      break;
    }
  }
  row.discards = curves.p.empty() ? 0 : curves.p.front().discards;
  row.curves = std::move(curves);
  return row;
}

SpeedBracket bracket_speeds(const Model& model, const JumpRule& rule,
                            std::span<const double> H_grid, std::span<const double> v_grid,
                            double theta, std::int64_t replicas, std::uint64_t seed,
                            const EstimatorOptions& opt) {
  if (!std::is_sorted(H_grid.begin(), H_grid.end()) ||
      !std::is_sorted(v_grid.begin(), v_grid.end())) {
    throw ParameterError("bracket grids must be sorted");
  }
  if (v_grid.empty() || H_grid.empty()) throw ParameterError("bracket grids are empty");
  SpeedBracket out;
  out.theta = theta;
  out.v_grid.assign(v_grid.begin(), v_grid.end());
  for (std::size_t h = 0; h < H_grid.size(); ++h) {
    const std::uint64_t s = stream_key(seed, Stream::Replica, static_cast<std::int64_t>(h));
    const auto sample = sample_extremes_batch(model, rule, H_grid[h], replicas, s, opt);
    out.rows.push_back(
        bracket_row(H_grid[h], curves_from_extremes(sample, H_grid[h], v_grid, s, opt), theta));
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw ParameterError("grid needs n >= 2 and hi > lo");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Endpoints exact; interior points rounded to 12 digits so that values
    // such as 0 and 0.1 are represented as their nearest doubles.
    const double raw = lo + (hi - lo) * i / (n - 1);
    g[static_cast<std::size_t>(i)] = std::round(raw * 1e12) / 1e12;
  }
  return g;
}

//---------------------------------------------------------------------------//
ConcentrationTable concentration_diagnostic(const Model& model, const JumpRule& rule,
                                            std::span<const double> t_grid, double eps,
                                            std::int64_t replicas, std::uint64_t seed,
                                            std::optional<double> v,
                                            const EstimatorOptions& opt) {
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw ParameterError("concentration grid must be nonempty and sorted");
  }
  if (replicas < 1) throw ParameterError("need at least one replica");
  // Displacements X_t per t, independent replica sets per t.
  std::vector<std::vector<std::optional<Site>>> speeds;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    const std::uint64_t s = stream_key(seed, Stream::Replica, static_cast<std::int64_t>(k));
    speeds.push_back(map_replicas<std::optional<Site>>(
        replicas,
        [&](std::int64_t i) -> std::optional<Site> {
          Replica rep = model.make(replica_seed(s, i), walker_window(0, 0, t, rule.radius()), t);
          try {
            const WalkerPath p = run_walker(*rep.env, *rep.clocks, rule, {0, 0.0}, t);
            return p.displacement();
          } catch (const TruncationError&) {
            return std::nullopt;
          }
        },
        opt.execution));
  }
  ConcentrationTable out;
  out.eps = eps;
  if (v) {
    out.v = *v;
  } else {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& x : speeds.back()) {
      if (x) {
        sum += static_cast<double>(*x) / t_grid.back();
        ++n;
      }
    }
    out.v = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    std::int64_t kept = 0;
    std::int64_t hits = 0;
    for (const auto& x : speeds[k]) {
      if (!x) continue;
      ++kept;
      // Compared on the displacement scale to avoid rounding X_t / t.
      const double t = t_grid[k];
      hits += std::abs(static_cast<double>(*x) - out.v * t) >= eps * t;
    }
    const std::int64_t discards = replicas - kept;
    if (static_cast<double>(discards) > opt.discard_cap * static_cast<double>(replicas)) {
      throw StatisticalValidityError("concentration replicas truncated above the cap");
    }
    auto est = proportion_estimate(hits, kept, opt.level, seed);
    est.discards = discards;
    out.rows.push_back({t_grid[k], est});
  }
  return out;
}

}  // namespace rwdre
