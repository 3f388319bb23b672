#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace rwdre {

enum class LadderVariant {
  Main,            // l_k = floor(L_k^{1/4})
  Counterexample,  // l_k = floor(L_k^{1/5})
};

struct LadderEntry {
  std::int64_t L = 0;
  std::int64_t l = 0;

  friend bool operator==(const LadderEntry&, const LadderEntry&) = default;
};

// Scales L_k, l_k with L_{k+1} = l_k L_k, plus the speed sequence v_{k+1} =
// v_k + 8 / l_k and the density sequence rho_0 = 1, rho_{k+1} = rho_k - 2 / l_k.
struct ScaleLadder {
  LadderVariant variant = LadderVariant::Main;
  std::int64_t L0 = 0;
  std::vector<LadderEntry> entries;  // k = 0..k_max
  std::vector<double> speeds;        // empty unless a base speed was given
  std::vector<double> densities;

  int root_degree() const noexcept { return variant == LadderVariant::Main ? 4 : 5; }
  std::int64_t L(std::size_t k) const { return entries.at(k).L; }
  std::int64_t l(std::size_t k) const { return entries.at(k).l; }
  // rho_k >= 1/2 for every generated k.
  bool densities_at_least_half() const noexcept;
};

// Largest r >= 0 with r^degree <= n, exact.
std::int64_t integer_root(std::int64_t n, int degree);

// Builds k = 0..k_max. Throws ParameterError for L0 < 2 or when L_{k+1}
// would overflow 64 bits; throws InvariantError if the recursion or the
// sandwich check fails.
ScaleLadder build_ladder(LadderVariant variant, std::int64_t L0, int k_max,
                         std::optional<double> base_speed = std::nullopt);

// Exact checks, in integer arithmetic:
//  - l_k = floor(L_k^{1/d}) and L_{k+1} = l_k L_k,
//  - L_k^{1+1/d} / 2 <= L_{k+1} <= L_k^{1+1/d}.
// Returns the first failing k, if any.
std::optional<std::size_t> first_ladder_violation(const ScaleLadder& ladder);

}  // namespace rwdre
