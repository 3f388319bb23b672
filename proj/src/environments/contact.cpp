#include "rwdre/environments/contact.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <string>

#include "rwdre/core/errors.hpp"

namespace rwdre {

namespace {

void validate(const ContactParams& p, SiteRange window, double horizon) {
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) {
    throw ParameterError("contact infection rate must be finite and >= 0");
  }
  if (p.lambda_max > 0.0 && p.lambda_max < p.lambda) {
    throw ParameterError("contact lambda_max must be >= lambda");
  }
  if (window.empty() || !(horizon > 0.0) || horizon > kMaxHorizon) {
    throw ParameterError("contact process needs a nonempty window and horizon in (0, 2^53]");
  }
  if (p.boundary == ContactBoundary::Periodic && window.size() < 3) {
    throw ParameterError("periodic contact window needs at least 3 sites");
  }
}

// Decodes a raw arrival of the per-site stream; nullopt for a rejected arrow
// candidate.
std::optional<ContactEventKind> decode(double u, double lambda, double m) {
  const double r = u * (1.0 + 2.0 * m);
  if (r < 1.0) return ContactEventKind::Mark;
  if (r < 1.0 + m) {
    if (r - 1.0 < lambda) return ContactEventKind::ArrowRight;
    return std::nullopt;
  }
  if (r - 1.0 - m < lambda) return ContactEventKind::ArrowLeft;
  return std::nullopt;
}

double stream_rate(const ContactParams& p) { return 1.0 + 2.0 * p.arrow_rate(); }

// Target of an arrow from x, or nullopt when it leaves the window (it then
// only matters for ghosts, which are handled by the caller).
std::optional<Site> arrow_target(Site x, ContactEventKind kind, SiteRange w,
                                 ContactBoundary b) {
  Site y = kind == ContactEventKind::ArrowRight ? x + 1 : x - 1;
  if (w.contains(y)) return y;
  if (b == ContactBoundary::Periodic && w.contains(x)) {
    return y > w.hi ? w.lo : w.hi;
  }
  return std::nullopt;
}

std::vector<int> initial_config(const ContactInitial& init, SiteRange window) {
  const auto n = static_cast<std::size_t>(window.size());
  switch (init.kind) {
    case ContactInitial::Kind::AllOnes:
    case ContactInitial::Kind::UpperInvariant:
      return std::vector<int>(n, 1);
    case ContactInitial::Kind::AllZeros:
      return std::vector<int>(n, 0);
    case ContactInitial::Kind::SingleOne: {
      if (!window.contains(init.site)) {
        throw ParameterError("initially infected site lies outside the window");
      }
      std::vector<int> c(n, 0);
      c[static_cast<std::size_t>(init.site - window.lo)] = 1;
      return c;
    }
    case ContactInitial::Kind::Fixed:
      if (static_cast<std::int64_t>(init.fixed.size()) != window.size()) {
        throw ParameterError("fixed contact configuration does not cover the window");
      }
      return init.fixed;
  }
  return {};
}

// Event-driven forward evolution over [0, horizon) merging the per-site
// streams in (time, site) order. Changes before `shift` only update the
// state; later ones are logged at time - shift.
EnvTrajectory forward(const ContactParams& p, std::vector<int> state, SiteRange window,
                      double horizon, std::uint64_t seed, double shift,
                      double out_horizon) {
  const bool ghosts = p.boundary == ContactBoundary::Frozen1;
  const Site first = ghosts ? window.lo - 1 : window.lo;
  const Site last = ghosts ? window.hi + 1 : window.hi;
  const auto count = static_cast<std::size_t>(last - first + 1);
  const double m = p.arrow_rate();
  const double rate = stream_rate(p);

  std::vector<ArrivalStream> streams;
  streams.reserve(count);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (std::size_t i = 0; i < count; ++i) {
    streams.emplace_back(seed, Stream::ContactMark, first + static_cast<Site>(i), rate);
  }
  std::vector<double> pending_u(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Arrival a = streams[i].next();
    pending_u[i] = a.uniform;
    if (a.time < horizon) queue.emplace(a.time, i);
  }

  std::vector<EnvTrajectory::SiteLog> logs(state.size());
  auto set = [&](Site y, int v, double t) {
    const auto k = static_cast<std::size_t>(y - window.lo);
    state[k] = v;
    if (t >= shift) logs[k].changes.push_back({t - shift, v});
  };
  bool initial_done = false;
  auto freeze_initial = [&] {
    for (std::size_t k = 0; k < state.size(); ++k) logs[k].initial = state[k];
    initial_done = true;
  };

  while (!queue.empty()) {
    const auto [t, i] = queue.top();
    queue.pop();
    if (!initial_done && t >= shift) freeze_initial();
    const Site x = first + static_cast<Site>(i);
    if (const auto kind = decode(pending_u[i], p.lambda, m)) {
      if (*kind == ContactEventKind::Mark) {
        if (window.contains(x) && state[static_cast<std::size_t>(x - window.lo)] == 1) {
          set(x, 0, t);
        }
      } else {
        const int source = window.contains(x) ? state[static_cast<std::size_t>(x - window.lo)]
                                              : 1;  // frozen-1 ghost
        const Site y = x + (*kind == ContactEventKind::ArrowRight ? 1 : -1);
        std::optional<Site> target;
        if (window.contains(y)) {
          target = y;
        } else if (window.contains(x)) {
          target = arrow_target(x, *kind, window, p.boundary);
        }
        if (source == 1 && target && state[static_cast<std::size_t>(*target - window.lo)] == 0) {
          set(*target, 1, t);
        }
      }
    }
    const Arrival a = streams[i].next();
    pending_u[i] = a.uniform;
    if (a.time < horizon) queue.emplace(a.time, i);
  }
  if (!initial_done) freeze_initial();
  return EnvTrajectory(StateSpace::Binary, window, out_horizon, std::move(logs));
}

}  // namespace

double contact_default_depth(double lambda) {
  return lambda > 0.0 ? std::max(10.0, 50.0 / lambda) : 10.0;
}

//---------------------------------------------------------------------------//
ContactGraph::ContactGraph(ContactParams p, SiteRange window, double horizon,
                           std::uint64_t seed)
    : p_(p), window_(window), horizon_(horizon) {
  validate(p, window, horizon);
  const double m = p.arrow_rate();
  events_.resize(static_cast<std::size_t>(window.size() + 2));
  for (Site x = window.lo - 1; x <= window.hi + 1; ++x) {
    ArrivalStream s(seed, Stream::ContactMark, x, stream_rate(p));
    auto& out = events_[static_cast<std::size_t>(x - window.lo + 1)];
    for (Arrival a = s.next(); a.time < horizon; a = s.next()) {
      if (const auto kind = decode(a.uniform, p.lambda, m)) out.push_back({a.time, *kind});
    }
  }
}

const std::vector<ContactEvent>& ContactGraph::events(Site x) const {
  if (x < window_.lo - 1 || x > window_.hi + 1) {
    throw TruncationError("contact graph query outside window at site " + std::to_string(x),
                          0.0);
  }
  return events_[static_cast<std::size_t>(x - window_.lo + 1)];
}

std::size_t ContactGraph::total_events() const noexcept {
  std::size_t n = 0;
  for (const auto& e : events_) n += e.size();
  return n;
}

//---------------------------------------------------------------------------//
EnvTrajectory contact_simulate(const ContactParams& p, const ContactInitial& init,
                               SiteRange window, double horizon, std::uint64_t seed) {
  validate(p, window, horizon);
  std::vector<int> state = initial_config(init, window);
  double shift = 0.0;
  if (init.kind == ContactInitial::Kind::UpperInvariant) {
    if (!(init.depth >= 0.0)) throw ParameterError("burn-in depth must be >= 0");
    shift = init.depth;
  }
  return forward(p, std::move(state), window, horizon + shift, seed, shift, horizon);
}

EnvTrajectory contact_run(const ContactGraph& g, std::vector<int> init) {
  const SiteRange window = g.window();
  if (static_cast<std::int64_t>(init.size()) != window.size()) {
    throw ParameterError("contact configuration does not cover the window");
  }
  struct Item {
    double time;
    Site x;
    ContactEventKind kind;
  };
  std::vector<Item> all;
  for (Site x = window.lo - 1; x <= window.hi + 1; ++x) {
    for (const auto& e : g.events(x)) all.push_back({e.time, x, e.kind});
  }
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) {
    return a.time != b.time ? a.time < b.time : a.x < b.x;
  });
  const ContactBoundary b = g.params().boundary;
  std::vector<EnvTrajectory::SiteLog> logs(init.size());
  for (std::size_t k = 0; k < init.size(); ++k) logs[k].initial = init[k];
  auto at = [&](Site y) -> int& { return init[static_cast<std::size_t>(y - window.lo)]; };
  for (const auto& e : all) {
    const bool inside = window.contains(e.x);
    if (e.kind == ContactEventKind::Mark) {
      if (inside && at(e.x) == 1) {
        at(e.x) = 0;
        logs[static_cast<std::size_t>(e.x - window.lo)].changes.push_back({e.time, 0});
      }
      continue;
    }
    int source;
    if (inside) {
      source = at(e.x);
    } else {
      source = b == ContactBoundary::Frozen1 ? 1 : 0;
    }
    const Site y = e.x + (e.kind == ContactEventKind::ArrowRight ? 1 : -1);
    std::optional<Site> target;
    if (window.contains(y)) {
      target = y;
    } else if (inside) {
      target = arrow_target(e.x, e.kind, window, b);
    }
    if (source == 1 && target && at(*target) == 0) {
      at(*target) = 1;
      logs[static_cast<std::size_t>(*target - window.lo)].changes.push_back({e.time, 1});
    }
  }
  return EnvTrajectory(StateSpace::Binary, window, g.horizon(), std::move(logs));
}

//---------------------------------------------------------------------------//
bool contact_dual_survival(const ContactGraph& g, Site x, double t, double depth,
                           DualOptions options) {
  const SiteRange window = g.window();
  if (!(depth >= 0.0) || !(t >= depth)) {
    throw ParameterError("dual survival needs t >= depth >= 0");
  }
  if (!window.contains(x)) {
    throw TruncationError("dual start outside window", t);
  }
  if (t > g.horizon()) {
    throw ParameterError("dual start time exceeds the graph horizon");
  }
  if (depth == 0.0) return true;
  const double bottom = t - depth;
  struct Item {
    double time;
    Site x;
    ContactEventKind kind;
  };
  std::vector<Item> all;
  for (Site s = window.lo - 1; s <= window.hi + 1; ++s) {
    const auto& ev = g.events(s);
    auto it = std::lower_bound(ev.begin(), ev.end(), bottom,
                               [](const ContactEvent& e, double v) { return e.time < v; });
    for (; it != ev.end() && it->time < t; ++it) all.push_back({it->time, s, it->kind});
  }
  // Backward in time; ties in reverse of the forward (time, site) order.
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) {
    return a.time != b.time ? a.time > b.time : a.x > b.x;
  });
  const ContactBoundary b = g.params().boundary;
  std::vector<char> in(static_cast<std::size_t>(window.size()), 0);
  auto member = [&](Site y) -> char& { return in[static_cast<std::size_t>(y - window.lo)]; };
  member(x) = 1;
  std::int64_t size = 1;
  auto edge_check = [&](Site y, double time) {
    if (options.edge_is_truncation && (y == window.lo || y == window.hi)) {
      throw TruncationError("dual set reached the window edge", t - time);
    }
  };
  edge_check(x, t);
  for (const auto& e : all) {
    const bool inside = window.contains(e.x);
    if (e.kind == ContactEventKind::Mark) {
      if (inside && member(e.x)) {
        member(e.x) = 0;
        if (--size == 0) return false;
      }
      continue;
    }
    const Site y = e.x + (e.kind == ContactEventKind::ArrowRight ? 1 : -1);
    std::optional<Site> target;
    if (window.contains(y)) {
      target = y;
    } else if (inside) {
      target = arrow_target(e.x, e.kind, window, b);
    }
    if (!target || !member(*target)) continue;
    if (!inside) {
      // Arrow from a ghost: a frozen-1 ghost is an infinite source.
      if (b == ContactBoundary::Frozen1) return true;
      continue;
    }
    if (!member(e.x)) {
      member(e.x) = 1;
      ++size;
      edge_check(e.x, e.time);
    }
  }
  return size > 0;
}

bool contact_dual_survival(Site x, double t, double depth, const ContactParams& p,
                           SiteRange window, std::uint64_t seed, DualOptions options) {
  const ContactGraph g(p, window, t > 0.0 ? t : 1.0, seed);
  return contact_dual_survival(g, x, t, depth, options);
}

}  // namespace rwdre
