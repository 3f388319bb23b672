#include "rwdre/renormalization/ladder.hpp"

#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "rwdre/core/errors.hpp"

namespace rwdre {

namespace {

using i128 = __int128;

i128 power(i128 base, int degree) {
  i128 r = 1;
  for (int i = 0; i < degree; ++i) r *= base;
  return r;
}

}  // namespace

bool ScaleLadder::densities_at_least_half() const noexcept {
  for (double r : densities) {
    if (r < 0.5) return false;
  }
  return true;
}

std::int64_t integer_root(std::int64_t n, int degree) {
  if (n < 0 || degree < 1) throw ParameterError("integer_root needs n >= 0 and degree >= 1");
  auto r = static_cast<std::int64_t>(std::pow(static_cast<double>(n), 1.0 / degree));
  // Correct the floating-point guess in both directions.
  while (r > 0 && power(r, degree) > n) --r;
  while (power(r + 1, degree) <= n) ++r;
  return r;
}

ScaleLadder build_ladder(LadderVariant variant, std::int64_t L0, int k_max,
                         std::optional<double> base_speed) {
  if (L0 < 2) throw ParameterError("ladder needs L0 >= 2");
  if (k_max < 0) throw ParameterError("ladder needs k_max >= 0");
  ScaleLadder out;
  out.variant = variant;
  out.L0 = L0;
  const int d = out.root_degree();
  std::int64_t L = L0;
  for (int k = 0; k <= k_max; ++k) {
    const std::int64_t l = integer_root(L, d);
    out.entries.push_back({L, l});
    if (k == k_max) break;
    std::int64_t next = 0;
    if (__builtin_mul_overflow(l, L, &next)) {
      throw ParameterError("ladder scale L_" + std::to_string(k + 1) + " overflows 64 bits");
    }
    L = next;
  }
  double rho = 1.0;
  std::optional<double> v = base_speed;
  for (const auto& e : out.entries) {
    out.densities.push_back(rho);
    rho -= 2.0 / static_cast<double>(e.l);
    if (v) {
      out.speeds.push_back(*v);
      *v += 8.0 / static_cast<double>(e.l);
    }
  }
  if (const auto k = first_ladder_violation(out)) {
    throw InvariantError("ladder invariant fails at k = " + std::to_string(*k));
  }
  return out;
}

std::optional<std::size_t> first_ladder_violation(const ScaleLadder& ladder) {
  const int d = ladder.root_degree();
  for (std::size_t k = 0; k < ladder.entries.size(); ++k) {
    const i128 L = ladder.entries[k].L;
    const i128 l = ladder.entries[k].l;
    if (k == 0 && ladder.entries[k].L != ladder.L0) return k;
    // l_k is the exact integer root.
    if (!(power(l, d) <= L && power(l + 1, d) > L)) return k;
    if (k + 1 < ladder.entries.size()) {
      const i128 next = ladder.entries[k + 1].L;
      if (next != l * L) return k;
      // L_k^{1+1/d} / 2 <= L_{k+1} <= L_k^{1+1/d}, raised to the power d.
      using boost::multiprecision::cpp_int;
      using boost::multiprecision::pow;
      const cpp_int a = ladder.entries[k + 1].L;
      const cpp_int b = ladder.entries[k].L;
      const cpp_int upper = pow(b, static_cast<unsigned>(d + 1));
      if (pow(a, static_cast<unsigned>(d)) > upper) return k;
      if (pow(cpp_int(2) * a, static_cast<unsigned>(d)) < upper) return k;
    }
  }
  return std::nullopt;
}

}  // namespace rwdre
