// Counter-based random streams and multinomial table sampling.
//
// A stream is identified by a 64-bit key derived from (seed, ids...), and
// its n-th output is a pure function of (key, n). Replicates therefore draw
// the same numbers whatever order or thread they run on.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include <boost/random/binomial_distribution.hpp>

#include "drs/core.hpp"

namespace drs {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a substream key from a seed and a path of integer ids.
constexpr std::uint64_t stream_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t id : ids) key = mix64(key ^ mix64(id + 0x9e3779b97f4a7c15ULL));
    return key;
}

/// SplitMix64 output function applied to (key + counter * golden gamma).
/// Satisfies UniformRandomBitGenerator.
class CounterEngine {
  public:
    using result_type = std::uint64_t;

    explicit CounterEngine(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline count_t draw_binomial(CounterEngine& engine, count_t trials, double prob) {
    if (trials <= 0 || prob <= 0.0) return 0;
    if (prob >= 1.0) return trials;
    boost::random::binomial_distribution<count_t, double> dist(trials, prob);
    return dist(engine);
}

/// Multinomial(N; p11, p10, p01, p00) by sequential conditional binomials.
/// Returns {x11, x10, x01, x00}.
inline std::array<count_t, 4> draw_cells(CounterEngine& engine, count_t n,
                                         const CellProbabilities& cells) {
    std::array<count_t, 4> out{};
    const std::array<double, 4> p{cells.p11, cells.p10, cells.p01, cells.p00};
    count_t remaining = n;
    double mass = 1.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double cond = mass > 0.0 ? std::min(1.0, p[i] / mass) : 0.0;
        out[i] = draw_binomial(engine, remaining, cond);
        remaining -= out[i];
        mass -= p[i];
    }
    out[3] = remaining;
    return out;
}

}  // namespace drs
