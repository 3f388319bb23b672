#include "rwdre/counterexample/soup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rwdre/core/errors.hpp"
#include "rwdre/core/replicas.hpp"
#include "rwdre/environments/independent_sites.hpp"
#include "rwdre/renormalization/speeds.hpp"

namespace rwdre {

namespace {

constexpr double kSin30 = 0.5;
const double kCos30 = std::sqrt(3.0) / 2.0;

double sign_of(Color c) noexcept { return c == Color::White ? -1.0 : 1.0; }

struct Interval {
  double lo, hi;
};

// Projection of the rectangle onto the unit axis (ax, at).
Interval project(const Rectangle& r, double ax, double at) noexcept {
  const double ux = r.axis_x(), ut = r.axis_t();
  const double nx = kCos30, nt = -sign_of(r.color) * kSin30;
  const double c = r.cx * ax + r.ct * at;
  const double e = 0.5 * r.length * std::abs(ux * ax + ut * at) +
                   0.5 * r.width * std::abs(nx * ax + nt * at);
  return {c - e, c + e};
}

Interval project(const Box& b, double ax, double at) noexcept {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x : {b.x_lo(), b.x_hi()}) {
    for (double t : {b.t_lo(), b.t_hi()}) {
      const double v = x * ax + t * at;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

// Interval of t with |a + b t| <= h, given b != 0.
Interval slab(double a, double b, double h) noexcept {
  double t1 = (-h - a) / b;
  double t2 = (h - a) / b;
  if (t1 > t2) std::swap(t1, t2);
  return {t1, t2};
}

}  // namespace

double Rectangle::axis_x() const noexcept { return sign_of(color) * kSin30; }
double Rectangle::axis_t() const noexcept { return kCos30; }

bool Rectangle::covers(double x, double t) const noexcept {
  const double dx = x - cx, dt = t - ct;
  const double along = dx * axis_x() + dt * axis_t();
  const double across = dx * kCos30 - dt * sign_of(color) * kSin30;
  return std::abs(along) <= 0.5 * length && std::abs(across) <= 0.5 * width;
}

bool Rectangle::meets(const Box& box) const noexcept {
  const double axes[4][2] = {
      {1.0, 0.0}, {0.0, 1.0}, {axis_x(), axis_t()}, {kCos30, -sign_of(color) * kSin30}};
  for (const auto& a : axes) {
    const Interval p = project(*this, a[0], a[1]);
    const Interval q = project(box, a[0], a[1]);
    if (p.hi < q.lo || q.hi < p.lo) return false;
  }
  return true;
}

std::optional<std::pair<double, double>> Rectangle::vertical_section(double x) const noexcept {
  const double dx = x - cx;
  const Interval a = slab(dx * axis_x() - ct * axis_t(), axis_t(), 0.5 * length);
  const double nt = -sign_of(color) * kSin30;
  const Interval b = slab(dx * kCos30 - ct * nt, nt, 0.5 * width);
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi) return std::nullopt;
  return std::pair{lo, hi};
}

double soup_width(std::int64_t L) {
  const double g = std::log(static_cast<double>(L));
  return g * g;
}

//---------------------------------------------------------------------------//
std::vector<Rectangle> sample_scale(std::int64_t L, int scale, const Box& window,
                                    std::uint64_t seed) {
  const double len = static_cast<double>(L);
  const double width = soup_width(L);
  const double reach = 0.5 * std::hypot(len, width);
  const double x0 = window.x_lo() - reach, x1 = window.x_hi() + reach;
  const double t0 = window.t_lo() - reach, t1 = window.t_hi() + reach;
  // Poisson process of intensity L^-2 on the dilated box, swept along x.
  const double line_rate = (t1 - t0) / (len * len);
  SplitMix64 rng(seed, Stream::Soup, scale);
  std::vector<Rectangle> out;
  for (double x = x0 + rng.exponential(line_rate); x < x1; x += rng.exponential(line_rate)) {
    Rectangle r;
    r.scale = scale;
    r.cx = x;
    r.ct = t0 + (t1 - t0) * rng.uniform();
    r.length = len;
    r.width = width;
    r.color = rng.uniform() < 0.5 ? Color::Black : Color::White;
    r.height = rng.uniform();
    if (r.meets(window)) out.push_back(r);
  }
  return out;
}

RectangleSoup::RectangleSoup(ScaleLadder ladder, int k_max, Box window, std::uint64_t seed)
    : ladder_(std::move(ladder)), k_max_(k_max), window_(window), seed_(seed) {
  if (ladder_.variant != LadderVariant::Counterexample) {
    throw ParameterError("rectangle soup needs the counterexample ladder");
  }
  if (k_max < 0 || static_cast<std::size_t>(k_max) >= ladder_.entries.size()) {
    throw ParameterError("soup k_max exceeds the ladder");
  }
  for (int k = 0; k <= k_max; ++k) {
    auto rs = sample_scale(ladder_.L(static_cast<std::size_t>(k)), k, window, seed);
    rects_.insert(rects_.end(), rs.begin(), rs.end());
  }
  std::sort(rects_.begin(), rects_.end(), [](const Rectangle& a, const Rectangle& b) {
    return a.scale != b.scale ? a.scale > b.scale : a.height > b.height;
  });
}

std::size_t RectangleSoup::count(int scale) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      rects_.begin(), rects_.end(), [scale](const Rectangle& r) { return r.scale == scale; }));
}

Color RectangleSoup::color_at(double x, double t) const noexcept {
  for (const auto& r : rects_) {
    if (r.covers(x, t)) return r.color;
  }
  return Color::Gray;
}

int RectangleSoup::cover_multiplicity(double x, double t) const noexcept {
  int n = 0;
  for (const auto& r : rects_) n += r.covers(x, t);
  return n;
}

//---------------------------------------------------------------------------//
ColorEnvironment::ColorEnvironment(std::shared_ptr<const RectangleSoup> soup, SiteRange window,
                                   double horizon, SoupForcing forcing)
    : soup_(std::move(soup)), window_(window), horizon_(horizon), forcing_(forcing) {
  if (window.empty() || !(horizon > 0.0) || horizon > kMaxHorizon) {
    throw ParameterError("color environment needs a nonempty window and horizon in (0, 2^53]");
  }
  if (forcing == SoupForcing::None) {
    if (!soup_) throw ParameterError("color environment needs a soup");
    const Box& b = soup_->window();
    if (b.x_lo() > static_cast<double>(window.lo) || b.x_hi() < static_cast<double>(window.hi) ||
        b.t_lo() > 0.0 || b.t_hi() < horizon) {
      throw ParameterError("soup window does not cover the environment window");
    }
  }
  histories_.resize(static_cast<std::size_t>(window.size()));
  initial_.resize(static_cast<std::size_t>(window.size()));
}

Color ColorEnvironment::color_at(double x, double t) const {
  switch (forcing_) {
    case SoupForcing::AllGray: return Color::Gray;
    case SoupForcing::AllBlack: return Color::Black;
    case SoupForcing::AllWhite: return Color::White;
    case SoupForcing::None: break;
  }
  return soup_->color_at(x, t);
}

int ColorEnvironment::state_at(Site x, double t) {
  check_query(x, t);
  return static_cast<int>(color_at(static_cast<double>(x), t));
}

int ColorEnvironment::state_before(Site x, double t) { return state_at(x, t); }

SiteHistory ColorEnvironment::history(Site x, double until) {
  check_query(x, until);
  const auto i = static_cast<std::size_t>(x - window_.lo);
  if (!histories_[i]) {
    const double xd = static_cast<double>(x);
    std::vector<double> cuts;
    if (forcing_ == SoupForcing::None) {
      for (const auto& r : soup_->rectangles()) {
        if (const auto s = r.vertical_section(xd)) {
          for (double c : {s->first, s->second}) {
            if (c > 0.0 && c < horizon_) cuts.push_back(c);
          }
        }
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    initial_[i] = static_cast<int>(color_at(xd, 0.0));
    std::vector<StateChange> changes;
    int current = initial_[i];
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const double next = k + 1 < cuts.size() ? cuts[k + 1] : horizon_;
      const int c = static_cast<int>(color_at(xd, 0.5 * (cuts[k] + next)));
      if (c != current) {
        changes.push_back({cuts[k], c});
        current = c;
      }
    }
    histories_[i] = std::move(changes);
  }
  return {initial_[i], *histories_[i]};
}

//---------------------------------------------------------------------------//
Box fluctuation_box(double T) {
  const SiteRange w = walker_window(0, 0, T, 0);
  return Box(static_cast<double>(w.lo), static_cast<double>(w.hi) + 1.0, 0.0, T);
}

WalkerPath run_drift_walker(ColorEnvironment& field, ClockSource& clocks,
                            SpaceTimePoint start, double duration) {
  static const JumpRule rule = rule_color_drift();
  return run_walker(field, clocks, rule, start, duration);
}

namespace {

FluctuationRow tally(std::int64_t L, std::span<const std::optional<Site>> disp,
                     double threshold, double level, std::uint64_t seed) {
  std::int64_t kept = 0, right = 0, left = 0;
  const double cut = threshold * static_cast<double>(L);
  for (const auto& d : disp) {
    if (!d) continue;
    ++kept;
    right += static_cast<double>(*d) > cut;
    left += static_cast<double>(*d) < -cut;
  }
  if (kept == 0) throw StatisticalValidityError("every fluctuation replica was discarded");
  const auto discards = static_cast<std::int64_t>(disp.size()) - kept;
  if (static_cast<double>(discards) > 0.01 * static_cast<double>(disp.size())) {
    throw StatisticalValidityError("fluctuation replicas truncated above the cap");
  }
  FluctuationRow row{L, proportion_estimate(right, kept, level, seed),
                     proportion_estimate(left, kept, level, seed)};
  row.right.discards = row.left.discards = discards;
  return row;
}

}  // namespace

std::vector<FluctuationRow> fluctuation_experiment(std::int64_t L0,
                                                   std::span<const std::int64_t> scales,
                                                   std::int64_t replicas, std::uint64_t seed,
                                                   const FluctuationOptions& opt) {
  if (replicas < 1) throw ParameterError("need at least one replica");
  const ScaleLadder ladder = build_ladder(LadderVariant::Counterexample, L0, opt.k_max);
  std::vector<FluctuationRow> out;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const std::int64_t L = scales[s];
    if (std::none_of(ladder.entries.begin(), ladder.entries.end(),
                     [L](const LadderEntry& e) { return e.L == L; })) {
      throw ParameterError("fluctuation scale " + std::to_string(L) + " is not a ladder scale");
    }
    const double T = static_cast<double>(L);
    const std::uint64_t key = stream_key(seed, Stream::Replica, static_cast<std::int64_t>(s));
    const auto disp = map_replicas<std::optional<Site>>(
        replicas,
        [&](std::int64_t i) -> std::optional<Site> {
          const std::uint64_t rs = replica_seed(key, i);
          const Box box = fluctuation_box(T);
          std::shared_ptr<const RectangleSoup> soup;
          if (opt.forcing == SoupForcing::None) {
            soup = std::make_shared<RectangleSoup>(ladder, opt.k_max, box, rs);
          }
          const SiteRange sites = walker_window(0, 0, T, 0);
          ColorEnvironment env(soup, sites, T, opt.forcing);
          LazyClocks clocks(sites, T, 1.0, rs, Stream::WalkerClock);
          try {
            return run_drift_walker(env, clocks, {0, 0.0}, T).displacement();
          } catch (const TruncationError&) {
            return std::nullopt;
          }
        },
        opt.execution);
    out.push_back(tally(L, disp, opt.threshold, opt.level, key));
  }
  return out;
}

std::vector<FluctuationRow> fluctuation_baseline(std::span<const std::int64_t> scales,
                                                 std::int64_t replicas, std::uint64_t seed,
                                                 double threshold, Execution execution) {
  const JumpRule rule = rule_occupation_drift(StateSpace::Binary, 0.6);
  std::vector<FluctuationRow> out;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double T = static_cast<double>(scales[s]);
    const std::uint64_t key = stream_key(seed, Stream::Replica, static_cast<std::int64_t>(s));
    const auto disp = map_replicas<std::optional<Site>>(
        replicas,
        [&](std::int64_t i) -> std::optional<Site> {
          const std::uint64_t rs = replica_seed(key, i);
          const SiteRange sites = walker_window(0, 0, T, 0);
          SpinFlipEnvironment env(SpinFlipDynamics({1.0, 0.5}), sites, T, rs);
          LazyClocks clocks(sites, T, 1.0, rs, Stream::WalkerClock);
          try {
            return run_walker(env, clocks, rule, {0, 0.0}, T).displacement();
          } catch (const TruncationError&) {
            return std::nullopt;
          }
        },
        execution);
    out.push_back(tally(scales[s], disp, threshold, 0.99, key));
  }
  return out;
}

//---------------------------------------------------------------------------//
double soup_touch_bound(std::int64_t L0, double r, double side) {
  if (L0 < 2 || !(r > 0.0) || !(side >= 0.0)) {
    throw ParameterError("touch bound needs L0 >= 2, r > 0 and side >= 0");
  }
  double total = 0.0;
  std::int64_t L = L0;
  bool started = false;
  for (;;) {
    if (!started && r <= static_cast<double>(L)) started = true;
    if (started) {
      const double Ld = static_cast<double>(L);
      const double term = (Ld + side) * (soup_width(L) + side) / (Ld * Ld);
      total += term;
      if (term < 1e-15 * total) break;
    }
    const std::int64_t l = integer_root(L, 5);
    std::int64_t next = 0;
    if (l < 2 || __builtin_mul_overflow(l, L, &next)) break;
    L = next;
  }
  return total;
}

bool SoupCovarianceCheck::decreasing() const noexcept {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].touch.point < rows[i - 1].touch.point)) return false;
  }
  return true;
}

bool SoupCovarianceCheck::under_bound(double sigmas) const noexcept {
  for (const auto& row : rows) {
    if (row.touch.point > row.bound + sigmas * row.touch.sigma()) return false;
  }
  return true;
}

SoupCovarianceCheck soup_covariance_check(std::int64_t L0, std::span<const double> r_list,
                                          std::int64_t replicas, std::uint64_t seed,
                                          const TouchOptions& opt) {
  if (replicas < 1) throw ParameterError("need at least one replica");
  const ScaleLadder ladder = build_ladder(LadderVariant::Counterexample, L0, opt.k_max);
  const double shift = kSin30 / kCos30;
  std::vector<TouchRow> out;
  for (std::size_t j = 0; j < r_list.size(); ++j) {
    const double r = r_list[j];
    const double s = std::pow(r, opt.side_exponent);
    const Box b1(0.0, s, 0.0, s);
    const Box b2(r * shift, r * shift + s, s + r, 2.0 * s + r);
    const std::uint64_t key = stream_key(seed, Stream::Replica, static_cast<std::int64_t>(j));
    const auto hits = map_replicas<int>(
        replicas,
        [&](std::int64_t i) {
          const RectangleSoup soup(ladder, opt.k_max, b1, replica_seed(key, i));
          for (const auto& rect : soup.rectangles()) {
            if (rect.meets(b2)) return 1;
          }
          return 0;
        },
        opt.execution);
    std::int64_t n = 0;
    for (int h : hits) n += h;
    out.push_back({r, s, proportion_estimate(n, replicas, opt.level, key),
                   soup_touch_bound(L0, r, s)});
  }
  std::vector<DecayPoint> points;
  for (const auto& row : out) points.push_back({row.r, row.touch.point, row.touch.half_width});
  return {out, fit_decay(std::move(points))};
}

}  // namespace rwdre
