#pragma once

#include <cstdint>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rwdre/core/geometry.hpp"
#include "rwdre/core/rng.hpp"

namespace rwdre {

// One arrival T_i^x of a site clock together with its paired uniform U_i^x.
struct Arrival {
  double time = 0.0;
  double uniform = 0.0;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

// Sequential generator of a single site's Poisson arrivals. A pure function
// of (seed, stream, site, rate).
class ArrivalStream {
 public:
  ArrivalStream(std::uint64_t seed, Stream stream, Site site, double rate);

  // Next arrival; time is +inf for a zero-rate stream.
  Arrival next() noexcept {
    if (rate_ <= 0.0) {
      return {std::numeric_limits<double>::infinity(), 0.0};
    }
    const double t = time_ + rng_.exponential(rate_);
    // Keep per-site times strictly increasing even when the gap underflows.
    time_ = t > time_ ? t : std::nextafter(time_, std::numeric_limits<double>::infinity());
    return {time_, rng_.uniform()};
  }

 private:
  SplitMix64 rng_;
  double rate_;
  double time_ = 0.0;
};

// Read access to per-site arrivals, shared by materialized and lazily
// generated clocks.
class ClockSource {
 public:
  virtual ~ClockSource() = default;

  virtual SiteRange window() const = 0;
  virtual double horizon() const = 0;

  // First arrival at x with time strictly greater than `after` and strictly
  // less than the horizon. Throws TruncationError if x is outside the window.
  virtual std::optional<Arrival> next_after(Site x, double after) = 0;
};

// Per-site Poisson clocks, fully materialized on a window and horizon.
// Immutable after construction.
class ClockField : public ClockSource {
 public:
  ClockField(SiteRange window, double horizon, double rate, std::uint64_t seed,
             Stream stream, std::vector<std::vector<Arrival>> arrivals,
             std::int64_t tie_breaks = 0);

  SiteRange window() const override { return window_; }
  double horizon() const override { return horizon_; }
  double rate() const noexcept { return rate_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Stream stream() const noexcept { return stream_; }
  // Number of cross-site time ties resolved during construction.
  std::int64_t tie_breaks() const noexcept { return tie_breaks_; }

  std::span<const Arrival> arrivals(Site x) const;
  std::size_t total_arrivals() const noexcept;

  std::optional<Arrival> next_after(Site x, double after) override;
  std::optional<Arrival> find_next(Site x, double after) const;

  // Binary cache: header, site count, then per-site length-prefixed arrays
  // of (f64 time, f64 uniform), little-endian.
  void write_binary(std::ostream& os) const;
  static ClockField read_binary(std::istream& is);

  friend bool operator==(const ClockField& a, const ClockField& b);

 private:
  SiteRange window_;
  double horizon_;
  double rate_;
  std::uint64_t seed_;
  Stream stream_;
  std::vector<std::vector<Arrival>> arrivals_;
  std::int64_t tie_breaks_;
};

// Independent rate-`rate` Poisson processes on [0, horizon) for every site of
// `window`, each arrival paired with an independent uniform. Equal times at
// distinct sites are resolved lexicographically (time, then site): the later
// site's arrival is moved to the next representable double.
ClockField sample_clock_field(double rate, SiteRange window, double horizon,
                              std::uint64_t seed,
                              Stream stream = Stream::WalkerClock);

// Walker clocks are cut into blocks [b len, (b + 1) len) of mean mass
// kClockBlockMass, each drawn from its own key (seed, stream, site, b), so a
// block can be generated without the ones before it.
inline constexpr double kClockBlockMass = 16.0;
double clock_block_length(double rate) noexcept;
// Appends the arrivals of block `block` of site x.
void sample_clock_block(double rate, Site x, std::int64_t block, std::uint64_t seed,
                        Stream stream, std::vector<Arrival>& out);

// Arrivals of one site, identical to what sample_clock_field produces for
// that site when no tie-break touched it.
std::vector<Arrival> sample_site_arrivals(double rate, Site x, double horizon,
                                          std::uint64_t seed,
                                          Stream stream = Stream::WalkerClock);

// Clocks generated on demand per site and memoized. Same values as
// sample_clock_field with the same key, without materializing the window.
// Not thread-safe; one instance per replica.
class LazyClocks : public ClockSource {
 public:
  LazyClocks(SiteRange window, double horizon, double rate, std::uint64_t seed,
             Stream stream = Stream::WalkerClock);

  SiteRange window() const override { return window_; }
  double horizon() const override { return horizon_; }

  std::optional<Arrival> next_after(Site x, double after) override;

  // Number of arrivals generated so far over all sites.
  std::size_t generated() const noexcept { return generated_; }

 private:
  // Blocks are generated on first use, so a query far in the future does
  // not replay the past.
  struct SiteClock {
    std::vector<std::vector<Arrival>> blocks;
    std::vector<bool> ready;
  };

  SiteRange window_;
  double horizon_;
  double rate_;
  std::uint64_t seed_;
  Stream stream_;
  std::vector<SiteClock> sites_;
  std::size_t generated_ = 0;
};

// Arrivals at x are the union of the base arrivals at x and at x - 1. Used
// by the East front, which listens to both clocks.
class SuperposedClocks : public ClockSource {
 public:
  explicit SuperposedClocks(ClockSource& base) : base_(base) {}

  SiteRange window() const override {
    const SiteRange w = base_.window();
    return {w.lo + 1, w.hi};
  }
  double horizon() const override { return base_.horizon(); }
  std::optional<Arrival> next_after(Site x, double after) override;

 private:
  ClockSource& base_;
};

}  // namespace rwdre
