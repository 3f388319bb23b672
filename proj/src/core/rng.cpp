#include "rwdre/core/rng.hpp"

namespace rwdre::detail {

ExpZiggurat build_exp_ziggurat() noexcept {
  constexpr double v = 3.9496598225815571993e-3;  // common layer area
  ExpZiggurat z{};
  z.x[0] = v * std::exp(ExpZiggurat::kR);
  z.x[1] = ExpZiggurat::kR;
  for (int i = 2; i < 256; ++i) {
    z.x[i] = -std::log(v / z.x[i - 1] + std::exp(-z.x[i - 1]));
  }
  z.x[256] = 0.0;
  for (int i = 0; i <= 256; ++i) z.f[i] = std::exp(-z.x[i]);
  return z;
}

}  // namespace rwdre::detail
