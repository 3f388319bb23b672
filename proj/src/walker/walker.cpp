#include "rwdre/walker/walker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rwdre/core/errors.hpp"

namespace rwdre {

namespace {

void validate(const JumpProbabilities& p) {
  const double total = p.right + p.stay + p.left;
  if (!(p.right >= 0.0 && p.stay >= 0.0 && p.left >= 0.0) ||
      std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("jump probabilities must be nonnegative and sum to 1");
  }
}

}  // namespace

int coded_step(const JumpProbabilities& p, double u) noexcept {
  if (u < p.right) return 1;
  if (u < p.right + p.stay) return 0;
  return -1;
}

//---------------------------------------------------------------------------//
JumpRule::JumpRule(int radius, Fn fn, std::string name)
    : radius_(radius), fn_(std::move(fn)), name_(std::move(name)) {
  if (radius < 0) {
    throw ParameterError("jump rule radius must be >= 0");
  }
  if (!fn_) {
    throw ParameterError("jump rule needs a rule function");
  }
}

JumpRule JumpRule::table(int radius, std::vector<JumpProbabilities> entries,
                         std::string name) {
  if (radius < 0 || radius > 10) {
    throw ParameterError("table rules support radius 0..10");
  }
  const std::size_t n = std::size_t{1} << (2 * radius + 1);
  if (entries.size() != n) {
    throw ParameterError("table rule needs 2^(2 ell + 1) entries");
  }
  for (const auto& e : entries) validate(e);
  return JumpRule(
      radius,
      [entries = std::move(entries)](std::span<const int> word) {
        std::size_t index = 0;
        for (std::size_t k = 0; k < word.size(); ++k) {
          if (word[k] > 0) index |= std::size_t{1} << k;
        }
        return entries[index];
      },
      std::move(name));
}

JumpRule JumpRule::constant(JumpProbabilities p, std::string name) {
  validate(p);
  JumpRule r(0, [p](std::span<const int>) { return p; }, std::move(name));
  r.blind_ = true;
  return r;
}

JumpProbabilities JumpRule::probabilities(std::span<const int> word) const {
  if (static_cast<int>(word.size()) != 2 * radius_ + 1) {
    throw ParameterError("jump rule word has the wrong length");
  }
  return fn_(word);
}

int JumpRule::step(std::span<const int> word, double u) const {
  return coded_step(fn_(word), u);
}

JumpRule rule_stay() { return JumpRule::constant({0.0, 1.0, 0.0}, "stay"); }

JumpRule rule_always_right() {
  return JumpRule::constant({1.0, 0.0, 0.0}, "always_right");
}

JumpRule rule_fair() { return JumpRule::constant({0.5, 0.0, 0.5}, "fair"); }

JumpRule rule_east_zero() {
  return JumpRule(
      1,
      [](std::span<const int> w) {
        return w[2] == 0 ? JumpProbabilities{1.0, 0.0, 0.0}
                         : JumpProbabilities{0.0, 1.0, 0.0};
      },
      "east_zero");
}

JumpRule rule_occupation_drift(StateSpace space, double p_occupied) {
  if (!(p_occupied >= 0.0 && p_occupied <= 1.0)) {
    throw ParameterError("drift probability must lie in [0, 1]");
  }
  return JumpRule(
      0,
      [space, p_occupied](std::span<const int> w) {
        const double p = occupation(space, w[0]) ? p_occupied : 1.0 - p_occupied;
        return JumpProbabilities{p, 0.0, 1.0 - p};
      },
      "occupation_drift");
}

JumpRule rule_color_drift() {
  return JumpRule(
      0,
      [](std::span<const int> w) {
        switch (w[0]) {
          case 1: return JumpProbabilities{0.9, 0.0, 0.1};  // black
          case 2: return JumpProbabilities{0.1, 0.0, 0.9};  // white
          default: return JumpProbabilities{0.5, 0.0, 0.5};
        }
      },
      "color_drift");
}

//---------------------------------------------------------------------------//
namespace {

class Stepper {
 public:
  Stepper(EnvironmentView& env, ClockSource& clocks, const JumpRule& rule)
      : env_(env), clocks_(clocks), rule_(rule),
        word_(static_cast<std::size_t>(2 * rule.radius() + 1)) {}

  // Next ring at x after t and before `end`, with the resulting step.
  std::optional<std::pair<double, int>> next(Site x, double t, double end) {
    const auto a = clocks_.next_after(x, t);
    if (!a || a->time > end) return std::nullopt;
    if (rule_.blind()) {
      return std::pair{a->time, rule_.step(word_, a->uniform)};
    }
    const int ell = rule_.radius();
    for (int k = -ell; k <= ell; ++k) {
      word_[static_cast<std::size_t>(k + ell)] = env_.state_before(x + k, a->time);
    }
    return std::pair{a->time, rule_.step(word_, a->uniform)};
  }

 private:
  EnvironmentView& env_;
  ClockSource& clocks_;
  const JumpRule& rule_;
  std::vector<int> word_;
};

void check_horizons(EnvironmentView& env, ClockSource& clocks, const JumpRule& rule,
                    double end) {
  if (end > clocks.horizon() || (!rule.blind() && end > env.horizon())) {
    throw ParameterError("walker duration exceeds the clock or environment horizon");
  }
}

// Runs `path` from its last position up to its end time.
void advance(Stepper& stepper, WalkerPath& path, double from, OnTruncation mode) {
  Site x = path.final_site();
  double t = from;
  try {
    while (auto ev = stepper.next(x, t, path.end_time)) {
      t = ev->first;
      if (ev->second != 0) {
        x += ev->second;
        path.jumps.push_back({t, x});
      }
    }
  } catch (const TruncationError& e) {
    if (mode == OnTruncation::Throw) throw;
    path.truncated_at = e.time();
  }
}

}  // namespace

WalkerPath run_walker(EnvironmentView& env, ClockSource& clocks, const JumpRule& rule,
                      SpaceTimePoint start, double duration,
                      OnTruncation on_truncation) {
  if (!(duration >= 0.0)) {
    throw ParameterError("walker duration must be >= 0");
  }
  const double end = start.t + duration;
  check_horizons(env, clocks, rule, end);
  WalkerPath path{start, {}, end, std::nullopt};
  Stepper stepper(env, clocks, rule);
  advance(stepper, path, start.t, on_truncation);
  return path;
}

std::optional<double> first_order_violation(const WalkerPath& a, const WalkerPath& b) {
  Site xa = a.start.x;
  Site xb = b.start.x;
  if (xa > xb) return a.start.t;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.jumps.size() || j < b.jumps.size()) {
    const double ta = i < a.jumps.size() ? a.jumps[i].time
                                         : std::numeric_limits<double>::infinity();
    const double tb = j < b.jumps.size() ? b.jumps[j].time
                                         : std::numeric_limits<double>::infinity();
    const double t = std::min(ta, tb);
    if (ta == t) xa = a.jumps[i++].site;
    if (tb == t) xb = b.jumps[j++].site;
    if (xa > xb) return t;
  }
  return std::nullopt;
}

CoupledEnsemble run_coupled(EnvironmentView& env, ClockSource& clocks,
                            const JumpRule& rule, std::span<const Site> starts,
                            double start_time, double duration,
                            CoupledOptions options) {
  if (!std::is_sorted(starts.begin(), starts.end())) {
    throw ParameterError("coupled starts must be sorted ascending");
  }
  if (!(duration >= 0.0)) {
    throw ParameterError("walker duration must be >= 0");
  }
  const double end = start_time + duration;
  check_horizons(env, clocks, rule, end);
  CoupledEnsemble out;
  out.paths.reserve(starts.size());
  Stepper stepper(env, clocks, rule);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    WalkerPath path{{starts[i], start_time}, {}, end, std::nullopt};
    const WalkerPath* prev = i > 0 ? &out.paths[i - 1] : nullptr;
    if (!options.coalesce || prev == nullptr || prev->truncated()) {
      advance(stepper, path, start_time, options.on_truncation);
    } else {
      Site x = path.start.x;
      double t = start_time;
      try {
        for (;;) {
          const auto a = clocks.next_after(x, t);
          if (!a || a->time > end) break;
          if (prev->before(a->time) == x) {
            // Same site, same ring: the walkers agree from here on.
            auto it = std::lower_bound(
                prev->jumps.begin(), prev->jumps.end(), a->time,
                [](const Jump& j, double v) { return j.time < v; });
            path.jumps.insert(path.jumps.end(), it, prev->jumps.end());
            ++out.coalescences;
            break;
          }
          const auto ev = stepper.next(x, t, end);
          t = ev->first;
          if (ev->second != 0) {
            x += ev->second;
            path.jumps.push_back({t, x});
          }
        }
      } catch (const TruncationError& e) {
        if (options.on_truncation == OnTruncation::Throw) throw;
        path.truncated_at = e.time();
      }
    }
    if (prev != nullptr) {
      if (const auto v = first_order_violation(*prev, path)) {
        std::ostringstream msg;
        msg << "coupled walkers from " << prev->start.x << " and " << path.start.x
            << " cross at time " << *v;
        throw InvariantError(msg.str());
      }
    }
    out.paths.push_back(std::move(path));
  }
  return out;
}

//---------------------------------------------------------------------------//
bool check_allowed_path(const WalkerPath& path, ClockSource& clocks) {
  Site x = path.start.x;
  double t = path.start.t;
  try {
    for (const auto& j : path.jumps) {
      if (std::abs(j.site - x) != 1 || !(j.time > t) || j.time > path.end_time) {
        return false;
      }
      const auto a =
          clocks.next_after(x, std::nextafter(j.time, -std::numeric_limits<double>::infinity()));
      if (!a || a->time != j.time) return false;
      x = j.site;
      t = j.time;
    }
  } catch (const TruncationError&) {
    return false;
  }
  return true;
}

std::int64_t rings_encountered(const WalkerPath& path, ClockSource& clocks) {
  std::int64_t rings = 0;
  Site x = path.start.x;
  double t = path.start.t;
  std::size_t next_jump = 0;
  const double end = path.truncated_at.value_or(path.end_time);
  for (;;) {
    const double leave = next_jump < path.jumps.size() ? path.jumps[next_jump].time : end;
    for (auto a = clocks.next_after(x, t); a && a->time <= leave; a = clocks.next_after(x, a->time)) {
      ++rings;
      t = a->time;
    }
    if (next_jump >= path.jumps.size()) break;
    x = path.jumps[next_jump].site;
    t = path.jumps[next_jump].time;
    ++next_jump;
  }
  return rings;
}

Envelope reachability_envelope(ClockSource& clocks, double T, Site origin) {
  if (!(T >= 0.0) || T > clocks.horizon()) {
    throw ParameterError("envelope time must lie in [0, clock horizon]");
  }
  Envelope env{origin, origin};
  double t = 0.0;
  while (auto a = clocks.next_after(env.max_right, t)) {
    if (a->time > T) break;
    ++env.max_right;
    t = a->time;
  }
  t = 0.0;
  while (auto a = clocks.next_after(env.min_left, t)) {
    if (a->time > T) break;
    --env.min_left;
    t = a->time;
  }
  return env;
}

}  // namespace rwdre
