#pragma once

#include <cmath>
#include <cstdint>

namespace rwdre {

//---------------------------------------------------------------------------//
// Counter-based randomness.
//
// Every random quantity in the toolkit is drawn from a SplitMix64 sequence
// whose starting state is a hash of (seed, stream, site). Any single site can
// therefore be regenerated without touching its neighbours, and replicas can
// run in any order on any number of threads.
//---------------------------------------------------------------------------//

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream identifiers. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
  WalkerClock = 1,
  SpinFlip = 2,
  Renewal = 3,
  EastRing = 4,
  EastInit = 5,
  ContactMark = 6,
  ContactArrowRight = 7,
  ContactArrowLeft = 8,
  ContactInit = 9,
  Soup = 10,
  Replica = 11,
  EastIdle = 12,
  EastRefresh = 13,
  EastThin = 14,
  Test = 99,
};

constexpr std::uint64_t stream_key(std::uint64_t seed, Stream stream,
                                   std::int64_t site) noexcept {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull);
  h = mix64(h ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ull));
  h = mix64(h ^ (static_cast<std::uint64_t>(site) + 0x632be59bd9b4e019ull));
  return h;
}

// Seed of replica `index` under a master seed.
constexpr std::uint64_t replica_seed(std::uint64_t master,
                                     std::uint64_t index) noexcept {
  return stream_key(master, Stream::Replica, static_cast<std::int64_t>(index));
}

namespace detail {

// 256-layer ziggurat for the unit exponential (Marsaglia and Tsang).
struct ExpZiggurat {
  static constexpr double kR = 7.69711747013104972;
  double x[257];
  double f[257];
};

ExpZiggurat build_exp_ziggurat() noexcept;
inline const ExpZiggurat kExpZiggurat = build_exp_ziggurat();

}  // namespace detail

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}
  SplitMix64(std::uint64_t seed, Stream stream, std::int64_t site) noexcept
      : state_(stream_key(seed, stream, site)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    return mix64(state_ += 0x9e3779b97f4a7c15ull);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  constexpr double uniform_open_zero() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  // Exponential with the given rate (> 0), by the ziggurat method.
  double exponential(double rate) noexcept { return unit_exponential() / rate; }

  double unit_exponential() noexcept {
    const auto& z = detail::kExpZiggurat;
    for (;;) {
      const std::uint64_t bits = (*this)();
      const auto i = static_cast<std::size_t>(bits & 0xff);
      const double x = static_cast<double>(bits >> 11) * 0x1.0p-53 * z.x[i];
      if (x < z.x[i + 1]) return x;
      if (i == 0) return detail::ExpZiggurat::kR - std::log(uniform_open_zero());
      if (z.f[i + 1] + (z.f[i] - z.f[i + 1]) * uniform() < std::exp(-x)) return x;
    }
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace rwdre
