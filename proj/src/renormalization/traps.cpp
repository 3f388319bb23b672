#include "rwdre/renormalization/traps.hpp"

#include <cmath>

#include "rwdre/core/errors.hpp"
#include "rwdre/renormalization/speeds.hpp"

namespace rwdre {

std::int64_t rounding_step(double H, double delta) {
  if (!(delta > 0.0) || !(delta * H / 4.0 >= 1.0)) {
    throw ParameterError("rounding needs delta H / 4 >= 1");
  }
  return static_cast<std::int64_t>(std::floor(delta * H / 4.0));
}

SpaceTimePoint round_point(SpaceTimePoint y, double H, double delta) {
  const std::int64_t step = rounding_step(H, delta);
  std::int64_t q = y.x / step;
  if (y.x % step != 0 && y.x < 0) --q;
  return {q * step, y.t};
}

std::vector<Site> trap_window_starts(PlanePoint w, double H, double delta) {
  std::vector<Site> out;
  const double lo = w.x + delta * H;
  const double hi = w.x + 2.0 * delta * H;
  for (auto x = static_cast<Site>(std::ceil(lo)); static_cast<double>(x) <= hi; ++x) {
    out.push_back(x);
  }
  return out;
}

bool is_trapped(PlanePoint w, double H, double delta, double v_minus,
                std::span<const WalkerPath> window_paths) {
  const auto starts = trap_window_starts(w, H, delta);
  if (starts.size() != window_paths.size()) {
    throw ParameterError("trap ensemble does not match the trap window");
  }
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (window_paths[i].start.x != starts[i] || window_paths[i].start.t != w.t) {
      throw ParameterError("trap ensemble does not match the trap window");
    }
  }
  bool trapped = false;
  for (const auto& p : window_paths) {
    trapped = trapped || static_cast<double>(displacement_at(p, H)) <= (v_minus + delta) * H;
  }
  return trapped;
}

bool is_threatened(PlanePoint w, double H, int r, double v_plus, const TrapOracle& trapped) {
  if (r < 1) throw ParameterError("threatened points need r >= 1");
  for (int j = 0; j < r; ++j) {
    if (trapped({w.x + j * H * v_plus, w.t + j * H})) return true;
  }
  return false;
}

TrapOracle make_trap_oracle(EnvironmentView& env, ClockSource& clocks, const JumpRule& rule,
                            double H, double delta, double v_minus) {
  return [&env, &clocks, &rule, H, delta, v_minus](PlanePoint w) {
    const auto starts = trap_window_starts(w, H, delta);
    const auto ens = run_coupled(env, clocks, rule, starts, w.t, H);
    return is_trapped(w, H, delta, v_minus, ens.paths);
  };
}

double threatened_density(const WalkerPath& path, double h, const ScaleLadder& ladder,
                          std::size_t kbar, const TrapOracle& trapped, double delta,
                          double v_plus) {
  if (kbar + 1 >= ladder.entries.size()) {
    throw ParameterError("threatened density needs a ladder index above kbar");
  }
  const double length = path.end_time - path.start.t;
  std::size_t k = kbar + 1;
  while (k < ladder.entries.size() && h * static_cast<double>(ladder.L(k)) != length) ++k;
  if (k == ladder.entries.size()) {
    throw ParameterError("path length is not h L_k for a ladder index k > kbar");
  }
  const std::int64_t J = ladder.L(k) / ladder.L(kbar + 1);
  const double spacing = h * static_cast<double>(ladder.L(kbar + 1));
  const double H = h * static_cast<double>(ladder.L(kbar));
  const int r = static_cast<int>(ladder.l(kbar));
  std::int64_t threatened = 0;
  for (std::int64_t j = 0; j < J; ++j) {
    const double t = path.start.t + static_cast<double>(j) * spacing;
    const SpaceTimePoint y = round_point({path.at(t), t}, H, delta);
    threatened += is_threatened({static_cast<double>(y.x), y.t}, H, r, v_plus, trapped);
  }
  return static_cast<double>(threatened) / static_cast<double>(J);
}

}  // namespace rwdre
