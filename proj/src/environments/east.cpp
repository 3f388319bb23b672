#include "rwdre/environments/east.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rwdre/core/errors.hpp"

namespace rwdre {

EastProcess::EastProcess(double rho, SiteRange window, double horizon,
                         std::uint64_t seed, EastInitial initial,
                         EastBoundary boundary)
    : rho_(rho),
      effective_rate_{rho, 1.0 - rho},
      candidate_rate_(std::max(rho, 1.0 - rho)),
      window_(window),
      horizon_(horizon),
      seed_(seed),
      initial_(std::move(initial)),
      boundary_(boundary) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw ParameterError("East density rho must lie in (0, 1)");
  }
  if (window.empty() || !(horizon > 0.0) || horizon > kMaxHorizon) {
    throw ParameterError("East process needs a nonempty window and horizon in (0, 2^53]");
  }
  if (initial_.kind == EastInitial::Kind::Fixed &&
      static_cast<std::int64_t>(initial_.fixed.size()) != window.size()) {
    throw ParameterError("fixed East configuration does not cover the window");
  }
  sites_.resize(static_cast<std::size_t>(window.size()));
}

int EastProcess::initial_state(Site x) {
  if (!window_.contains(x)) {
    throw TruncationError("East query outside window at site " + std::to_string(x), 0.0);
  }
  return site(x).initial;
}

EastProcess::SiteState& EastProcess::site(Site x) {
  auto& s = sites_[static_cast<std::size_t>(x - window_.lo)];
  if (!s.started) {
    s.started = true;
    const bool bernoulli = SplitMix64(seed_, Stream::EastInit, x).uniform() < rho_;
    switch (initial_.kind) {
      case EastInitial::Kind::Product:
        s.initial = bernoulli;
        break;
      case EastInitial::Kind::ZeroAt:
        s.initial = x == initial_.marked ? 0 : bernoulli;
        break;
      case EastInitial::Kind::Front:
        s.initial = x < initial_.marked ? 1 : (x == initial_.marked ? 0 : bernoulli);
        break;
      case EastInitial::Kind::Fixed:
        s.initial = initial_.fixed[static_cast<std::size_t>(x - window_.lo)] != 0;
        break;
    }
    s.current = s.initial;
    s.rng = SplitMix64(seed_, Stream::EastRing, x);
    s.pending = s.rng.unit_exponential() / candidate_rate_;
  }
  return s;
}

bool EastProcess::keeps(Site x, double time, int state) const noexcept {
  const double rate = effective_rate_[state];
  if (rate >= candidate_rate_) return true;
  const double u = SplitMix64(stream_key(seed_, Stream::EastThin, x) ^
                              std::bit_cast<std::uint64_t>(time))
                       .uniform();
  return u * candidate_rate_ < rate;
}

// Cone evaluation in two passes. The first walks right listing each site's
// candidates up to its target; the next site's target is the last listed
// candidate. The second evaluates the chain from the right, where every
// neighbour is already complete.
void EastProcess::extend(Site x, double t) {
  const int frozen = boundary_ == EastBoundary::Frozen1 ? 1 : 0;
  const auto last = static_cast<std::size_t>(window_.hi - window_.lo);
  // Rings exist strictly before the horizon.
  const double ring_limit = horizon_ > t ? t : std::nextafter(horizon_, 0.0);
  chain_.clear();
  auto i = static_cast<std::size_t>(x - window_.lo);
  double target = std::min(t, ring_limit);
  for (;;) {
    SiteState& st = sites_[i];
    if (!st.started) site(window_.lo + static_cast<Site>(i));
    if (st.done_until >= target) break;
    chain_.emplace_back(i, target);
    while (st.pending <= target) {
      st.queue.push_back(st.pending);
      st.pending += st.rng.unit_exponential() / candidate_rate_;
    }
    if (st.queue.empty() || i == last) break;
    target = st.queue.back();
    ++i;
  }
  std::uint64_t rings = 0;
  for (auto k = chain_.size(); k-- > 0;) {
    const auto [j, tgt] = chain_[k];
    SiteState& st = sites_[j];
    const SiteState* nb = j < last ? &sites_[j + 1] : nullptr;
    int current = st.current;
    std::size_t idx = 0;  // neighbour changes before the current candidate
    if (nb != nullptr && !st.queue.empty()) {
      const auto& ch = nb->changes;
      idx = static_cast<std::size_t>(
          std::lower_bound(ch.begin(), ch.end(), st.queue.front(),
                           [](const StateChange& c, double v) { return c.time < v; }) -
          ch.begin());
    }
    for (const double a : st.queue) {
      int right = frozen;
      if (nb != nullptr) {
        const auto& ch = nb->changes;
        while (idx < ch.size() && ch[idx].time < a) ++idx;
        right = idx == 0 ? nb->initial : ch[idx - 1].state;
      }
      if (right == 0 && keeps(window_.lo + static_cast<Site>(j), a, current)) {
        current = 1 - current;
        st.changes.push_back({a, current});
      }
    }
    rings += st.queue.size();
    st.queue.clear();
    st.current = current;
    st.done_until = tgt;
  }
  rings_ += rings;
}

int EastProcess::state_at(Site x, double t) {
  check_query(x, t);
  extend(x, t);
  const auto& s = site(x);
  return SiteHistory{s.initial, s.changes}.at(t);
}

int EastProcess::state_before(Site x, double t) {
  check_query(x, t);
  extend(x, t);
  const auto& s = site(x);
  return SiteHistory{s.initial, s.changes}.before(t);
}

SiteHistory EastProcess::history(Site x, double until) {
  check_query(x, until);
  extend(x, until);
  const auto& s = site(x);
  return {s.initial, s.changes};
}

bool EastProcess::legal_at(Site x, double time) {
  check_query(x, time);
  if (x == window_.hi) return boundary_ == EastBoundary::Frozen0;
  return state_before(x + 1, time) == 0;
}

//---------------------------------------------------------------------------//
EastClocks::EastClocks(EastProcess& east)
    : east_(east), sites_(static_cast<std::size_t>(east.window().size())) {}

EastClocks::SiteClock& EastClocks::site(Site x) {
  if (!east_.window().contains(x)) {
    throw TruncationError("East clock query outside window at site " + std::to_string(x),
                          0.0);
  }
  auto& c = sites_[static_cast<std::size_t>(x - east_.window().lo)];
  if (!c.started) start(x, c);
  return c;
}

void EastClocks::start(Site x, SiteClock& c) {
  c.started = true;
  c.rng = SplitMix64(east_.seed(), Stream::EastRing, x);
  c.idle_stream.emplace(east_.seed(), Stream::EastIdle, x, 1.0);
}

double EastClocks::coded_uniform(Site x, double time, int refresh) const noexcept {
  const double v =
      SplitMix64(stream_key(east_.seed(), Stream::EastRefresh, x) ^
                 std::bit_cast<std::uint64_t>(time))
          .uniform();
  const double rho = east_.rho();
  return refresh ? rho * v : rho + (1.0 - rho) * v;
}

// Replays the process's candidate stream at x; the change log gives the
// state before each candidate and tells which effective rings were legal.
void EastClocks::grow_effective(Site x, SiteClock& c, double after) {
  if (c.effective_done || (!c.effective.empty() && c.effective.back().time > after)) return;
  const double m = east_.candidate_rate();
  const double horizon = east_.horizon();
  SiteHistory h = east_.history(x, std::min(after, horizon));
  for (;;) {
    const double a = c.time + c.rng.unit_exponential() / m;
    c.time = a;
    if (a >= horizon) {
      c.effective_done = true;
      return;
    }
    const bool beyond = a > after;
    if (!beyond && !c.full) {
      // Nothing to emit; the state is read from the log when needed.
      c.skipped_until = a;
      continue;
    }
    if (beyond) h = east_.history(x, a);
    while (c.change_idx < h.changes.size() && h.changes[c.change_idx].time < a) ++c.change_idx;
    const int state = c.change_idx == 0 ? h.initial : h.changes[c.change_idx - 1].state;
    if (!east_.keeps(x, a, state)) continue;
    c.effective.push_back({a, coded_uniform(x, a, 1 - state)});
    if (beyond) return;
  }
}

// Idle rings: a rate-1 candidate stream thinned by the probability that a
// ring at the current state is idle.
void EastClocks::grow_idle(Site x, SiteClock& c, double after) {
  if (c.idle_done || (!c.idle.empty() && c.idle.back().time > after)) return;
  const double rho = east_.rho();
  const double horizon = east_.horizon();
  SiteHistory h = east_.history(x, std::min(after, horizon));
  for (;;) {
    const Arrival cand = c.idle_stream->next();
    if (cand.time >= horizon) {
      c.idle_done = true;
      return;
    }
    const bool beyond = cand.time > after;
    if (!beyond && !c.full) {
      c.skipped_until = std::max(c.skipped_until, cand.time);
      continue;
    }
    if (beyond) h = east_.history(x, cand.time);
    while (c.idle_idx < h.changes.size() && h.changes[c.idle_idx].time < cand.time) ++c.idle_idx;
    const int state = c.idle_idx == 0 ? h.initial : h.changes[c.idle_idx - 1].state;
    const double p_idle = state == 0 ? 1.0 - rho : rho;
    if (cand.uniform < p_idle) {
      c.idle.push_back({cand.time, coded_uniform(x, cand.time, state)});
      if (beyond) return;
    }
  }
}

std::optional<Arrival> EastClocks::next_after(Site x, double after) {
  auto* c = &site(x);
  if (after < c->skipped_until) {
    // A query behind skipped arrivals: rebuild this site without skipping.
    *c = SiteClock{};
    start(x, *c);
    c->full = true;
  }
  grow_effective(x, *c, after);
  grow_idle(x, *c, after);
  const auto by_time = [](double v, const Arrival& a) { return v < a.time; };
  const auto e = std::upper_bound(c->effective.begin(), c->effective.end(), after, by_time);
  const auto i = std::upper_bound(c->idle.begin(), c->idle.end(), after, by_time);
  const bool has_e = e != c->effective.end();
  const bool has_i = i != c->idle.end();
  if (!has_e && !has_i) return std::nullopt;
  if (has_e && (!has_i || e->time < i->time)) return *e;
  return *i;
}

//---------------------------------------------------------------------------//
std::vector<double> east_legal_rings(EastProcess& east, EastClocks& clocks, Site x,
                                     double until) {
  std::vector<double> out;
  for (auto a = clocks.next_after(x, 0.0); a && a->time <= until;
       a = clocks.next_after(x, a->time)) {
    if (east.legal_at(x, a->time)) out.push_back(a->time);
  }
  return out;
}

EastSimulation east_simulate(double rho, EastInitial initial, SiteRange window,
                             double horizon, std::uint64_t seed,
                             EastBoundary boundary) {
  EastProcess east(rho, window, horizon, seed, std::move(initial), boundary);
  EastSimulation out{rho, seed, materialize(east, window, horizon), {}};
  EastClocks clocks(east);
  out.legal_rings.reserve(static_cast<std::size_t>(window.size()));
  for (Site x = window.lo; x <= window.hi; ++x) {
    out.legal_rings.push_back(east_legal_rings(east, clocks, x, horizon));
  }
  return out;
}

WalkerPath east_distinguished_zero(EastProcess& east, EastClocks& clocks, Site start,
                                   double duration) {
  if (!(duration >= 0.0) || duration > east.horizon()) {
    throw ParameterError("distinguished zero duration must lie in [0, horizon]");
  }
  WalkerPath path{{start, 0.0}, {}, duration, std::nullopt};
  Site x = start;
  double t = 0.0;
  try {
    while (auto a = clocks.next_after(x, t)) {
      if (a->time > duration) break;
      t = a->time;
      if (east.legal_at(x, t)) {
        ++x;
        path.jumps.push_back({t, x});
      }
    }
  } catch (const TruncationError& e) {
    path.truncated_at = e.time();
  }
  return path;
}

WalkerPath east_distinguished_zero(EastProcess& east, Site start, double duration) {
  EastClocks clocks(east);
  return east_distinguished_zero(east, clocks, start, duration);
}

WalkerPath east_front(EastProcess& east, EastClocks& clocks, Site start,
                      double duration) {
  if (!(duration >= 0.0) || duration > east.horizon()) {
    throw ParameterError("front duration must lie in [0, horizon]");
  }
  WalkerPath path{{start, 0.0}, {}, duration, std::nullopt};
  Site x = start;
  double t = 0.0;
  try {
    for (;;) {
      const auto own = clocks.next_after(x, t);
      const auto left = clocks.next_after(x - 1, t);
      const bool use_own = own && (!left || own->time < left->time);
      const auto& a = use_own ? own : left;
      if (!a || a->time > duration) break;
      t = a->time;
      const bool refresh = a->uniform < east.rho();
      if (use_own) {
        // Legal ring at the front refreshing to 1: the next zero is x + 1.
        if (refresh && east.legal_at(x, t)) {
          ++x;
          path.jumps.push_back({t, x});
        }
      } else if (!refresh) {
        // A ring at x - 1 is always legal since eta(x) = 0.
        --x;
        path.jumps.push_back({t, x});
      }
    }
  } catch (const TruncationError& e) {
    path.truncated_at = e.time();
  }
  return path;
}

WalkerPath east_front(EastProcess& east, Site start, double duration) {
  EastClocks clocks(east);
  return east_front(east, clocks, start, duration);
}

std::optional<Site> east_leftmost_zero(EastProcess& east, Site from, double t) {
  for (Site x = from; x <= east.window().hi; ++x) {
    if (east.state_at(x, t) == 0) return x;
  }
  return std::nullopt;
}

}  // namespace rwdre
