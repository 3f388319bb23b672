#include "rwdre/core/clock_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "rwdre/core/binary_io.hpp"
#include "rwdre/core/errors.hpp"

namespace rwdre {

namespace {

constexpr std::uint32_t kClockMagic = 0x46435752;  // "RWCF"
constexpr std::uint32_t kClockVersion = 1;

void validate(double rate, SiteRange window, double horizon) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw ParameterError("clock rate must be finite and >= 0");
  }
  if (window.empty()) {
    throw ParameterError("clock window is empty");
  }
  if (!(horizon > 0.0) || horizon > kMaxHorizon) {
    throw ParameterError("clock horizon must lie in (0, 2^53]");
  }
}

// Moves cross-site ties forward one ulp until every time is distinct.
std::int64_t break_ties(SiteRange window,
                        std::vector<std::vector<Arrival>>& arrivals) {
  std::int64_t fixes = 0;
  for (;;) {
    std::vector<std::tuple<double, Site, std::size_t>> all;
    for (std::size_t s = 0; s < arrivals.size(); ++s) {
      for (std::size_t i = 0; i < arrivals[s].size(); ++i) {
        all.emplace_back(arrivals[s][i].time, window.lo + static_cast<Site>(s), i);
      }
    }
    std::sort(all.begin(), all.end());
    bool changed = false;
    for (std::size_t k = 1; k < all.size(); ++k) {
      if (std::get<0>(all[k]) == std::get<0>(all[k - 1])) {
        const auto s = static_cast<std::size_t>(std::get<1>(all[k]) - window.lo);
        auto& a = arrivals[s][std::get<2>(all[k])];
        a.time = std::nextafter(a.time, std::numeric_limits<double>::infinity());
        ++fixes;
        changed = true;
      }
    }
    if (!changed) {
      return fixes;
    }
    // A bumped time may now equal its successor on the same site.
    for (auto& list : arrivals) {
      for (std::size_t i = 1; i < list.size(); ++i) {
        if (list[i].time <= list[i - 1].time) {
          list[i].time = std::nextafter(list[i - 1].time,
                                        std::numeric_limits<double>::infinity());
        }
      }
    }
  }
}

}  // namespace

//---------------------------------------------------------------------------//
double clock_block_length(double rate) noexcept { return kClockBlockMass / rate; }

void sample_clock_block(double rate, Site x, std::int64_t block, std::uint64_t seed,
                        Stream stream, std::vector<Arrival>& out) {
  const double len = clock_block_length(rate);
  const double start = static_cast<double>(block) * len;
  const double end = static_cast<double>(block + 1) * len;
  SplitMix64 rng(mix64(stream_key(seed, stream, x) ^
                       mix64(static_cast<std::uint64_t>(block) + 0x2545f4914f6cdd1dull)));
  double t = start;
  for (;;) {
    const double next = t + rng.exponential(rate);
    t = next > t ? next : std::nextafter(t, std::numeric_limits<double>::infinity());
    if (t >= end) return;
    out.push_back({t, rng.uniform()});
  }
}

//---------------------------------------------------------------------------//
ArrivalStream::ArrivalStream(std::uint64_t seed, Stream stream, Site site,
                             double rate)
    : rng_(seed, stream, site), rate_(rate) {}

//---------------------------------------------------------------------------//
ClockField::ClockField(SiteRange window, double horizon, double rate,
                       std::uint64_t seed, Stream stream,
                       std::vector<std::vector<Arrival>> arrivals,
                       std::int64_t tie_breaks)
    : window_(window),
      horizon_(horizon),
      rate_(rate),
      seed_(seed),
      stream_(stream),
      arrivals_(std::move(arrivals)),
      tie_breaks_(tie_breaks) {
  validate(rate, window, horizon);
  if (static_cast<std::int64_t>(arrivals_.size()) != window.size()) {
    throw ParameterError("clock field site count does not match its window");
  }
}

std::span<const Arrival> ClockField::arrivals(Site x) const {
  if (!window_.contains(x)) {
    throw TruncationError("clock query outside window", 0.0);
  }
  return arrivals_[static_cast<std::size_t>(x - window_.lo)];
}

std::size_t ClockField::total_arrivals() const noexcept {
  std::size_t n = 0;
  for (const auto& a : arrivals_) n += a.size();
  return n;
}

std::optional<Arrival> ClockField::find_next(Site x, double after) const {
  if (!window_.contains(x)) {
    throw TruncationError("clock query outside window at site " + std::to_string(x),
                          after);
  }
  const auto& list = arrivals_[static_cast<std::size_t>(x - window_.lo)];
  auto it = std::upper_bound(list.begin(), list.end(), after,
                             [](double t, const Arrival& a) { return t < a.time; });
  if (it == list.end()) {
    return std::nullopt;
  }
  return *it;
}

std::optional<Arrival> ClockField::next_after(Site x, double after) {
  return find_next(x, after);
}

void ClockField::write_binary(std::ostream& os) const {
  binary::write(os, kClockMagic);
  binary::write(os, kClockVersion);
  binary::write(os, window_.lo);
  binary::write(os, horizon_);
  binary::write(os, rate_);
  binary::write(os, seed_);
  binary::write(os, static_cast<std::uint64_t>(stream_));
  binary::write(os, tie_breaks_);
  binary::write(os, static_cast<std::uint64_t>(arrivals_.size()));
  for (const auto& list : arrivals_) {
    binary::write(os, static_cast<std::uint64_t>(list.size()));
    for (const auto& a : list) {
      binary::write(os, a.time);
      binary::write(os, a.uniform);
    }
  }
}

ClockField ClockField::read_binary(std::istream& is) {
  if (binary::read<std::uint32_t>(is) != kClockMagic ||
      binary::read<std::uint32_t>(is) != kClockVersion) {
    throw ParameterError("not a clock field cache");
  }
  const auto lo = binary::read<Site>(is);
  const auto horizon = binary::read<double>(is);
  const auto rate = binary::read<double>(is);
  const auto seed = binary::read<std::uint64_t>(is);
  const auto stream = static_cast<Stream>(binary::read<std::uint64_t>(is));
  const auto ties = binary::read<std::int64_t>(is);
  const auto n_sites = binary::read<std::uint64_t>(is);
  std::vector<std::vector<Arrival>> arrivals(n_sites);
  for (auto& list : arrivals) {
    list.resize(binary::read<std::uint64_t>(is));
    for (auto& a : list) {
      a.time = binary::read<double>(is);
      a.uniform = binary::read<double>(is);
    }
  }
  return ClockField({lo, lo + static_cast<Site>(n_sites) - 1}, horizon, rate, seed,
                    stream, std::move(arrivals), ties);
}

bool operator==(const ClockField& a, const ClockField& b) {
  return a.window_ == b.window_ && a.horizon_ == b.horizon_ && a.rate_ == b.rate_ &&
         a.seed_ == b.seed_ && a.stream_ == b.stream_ && a.arrivals_ == b.arrivals_;
}

//---------------------------------------------------------------------------//
std::vector<Arrival> sample_site_arrivals(double rate, Site x, double horizon,
                                          std::uint64_t seed, Stream stream) {
  std::vector<Arrival> out;
  if (rate <= 0.0) {
    return out;
  }
  out.reserve(static_cast<std::size_t>(rate * horizon * 1.1) + 8);
  const double len = clock_block_length(rate);
  for (std::int64_t b = 0; static_cast<double>(b) * len < horizon; ++b) {
    sample_clock_block(rate, x, b, seed, stream, out);
  }
  while (!out.empty() && out.back().time >= horizon) out.pop_back();
  return out;
}

ClockField sample_clock_field(double rate, SiteRange window, double horizon,
                              std::uint64_t seed, Stream stream) {
  validate(rate, window, horizon);
  std::vector<std::vector<Arrival>> arrivals;
  arrivals.reserve(static_cast<std::size_t>(window.size()));
  for (Site x = window.lo; x <= window.hi; ++x) {
    arrivals.push_back(sample_site_arrivals(rate, x, horizon, seed, stream));
  }
  const auto ties = break_ties(window, arrivals);
  // A bump can push the last arrival of a site past the horizon.
  for (auto& list : arrivals) {
    while (!list.empty() && list.back().time >= horizon) list.pop_back();
  }
  return ClockField(window, horizon, rate, seed, stream, std::move(arrivals), ties);
}

//---------------------------------------------------------------------------//
LazyClocks::LazyClocks(SiteRange window, double horizon, double rate,
                       std::uint64_t seed, Stream stream)
    : window_(window), horizon_(horizon), rate_(rate), seed_(seed), stream_(stream) {
  validate(rate, window, horizon);
  sites_.resize(static_cast<std::size_t>(window.size()));
}

std::optional<Arrival> LazyClocks::next_after(Site x, double after) {
  if (!window_.contains(x)) {
    throw TruncationError("clock query outside window at site " + std::to_string(x),
                          after);
  }
  if (rate_ <= 0.0) return std::nullopt;
  auto& s = sites_[static_cast<std::size_t>(x - window_.lo)];
  const double len = clock_block_length(rate_);
  auto b = static_cast<std::int64_t>(std::floor(std::max(after, 0.0) / len));
  for (; static_cast<double>(b) * len < horizon_; ++b) {
    const auto i = static_cast<std::size_t>(b);
    if (i >= s.blocks.size()) {
      s.blocks.resize(i + 1);
      s.ready.resize(i + 1, false);
    }
    if (!s.ready[i]) {
      sample_clock_block(rate_, x, b, seed_, stream_, s.blocks[i]);
      s.ready[i] = true;
      generated_ += s.blocks[i].size();
    }
    const auto& list = s.blocks[i];
    auto it = std::upper_bound(list.begin(), list.end(), after,
                               [](double t, const Arrival& a) { return t < a.time; });
    if (it != list.end()) {
      if (it->time >= horizon_) return std::nullopt;
      return *it;
    }
  }
  return std::nullopt;
}

//---------------------------------------------------------------------------//
std::optional<Arrival> SuperposedClocks::next_after(Site x, double after) {
  if (!window().contains(x)) {
    throw TruncationError("clock query outside window at site " + std::to_string(x),
                          after);
  }
  const auto own = base_.next_after(x, after);
  const auto left = base_.next_after(x - 1, after);
  if (!own) return left;
  if (!left) return own;
  return own->time < left->time ? own : left;
}

}  // namespace rwdre
