#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace qdiag {

namespace detail {

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer. Bijective on 64-bit words; applied to an
/// arithmetic counter sequence it forms the SplitMix generator.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// The `counter`-th raw word of the keyed stream. Stateless: safe to
/// evaluate from any thread in any order.
inline constexpr std::uint64_t counter_word(std::uint64_t key, std::uint64_t counter) noexcept {
    return mix64(key + (counter + 1) * kSplitMixGamma);
}

/// Map a word to (0, 1]; strictly positive so log() below is always finite.
inline double to_unit_open(std::uint64_t w) noexcept {
    return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

/// Map a word to [0, 1).
inline double to_unit_half_open(std::uint64_t w) noexcept {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

} // namespace detail

/// Disjoint key namespaces. Consumers that must not share randomness
/// (estimator streams, Monte Carlo validators, matrix generators) derive
/// their keys from the same user seed through different domains.
enum class SeedDomain : std::uint64_t {
    Estimator = 0x657374696d617465ull,
    McOracle = 0x6d636f7261636c65ull,
    MatrixGen = 0x6d6174727867656eull,
};

/// Counter-based source of i.i.d. standard-normal vectors.
///
/// The j-th d-vector is a pure function of (seed, domain, j, d): component c
/// of sample j consumes the Box-Muller pair at counter j*d + c. No state is
/// mutated on draw, so any number of threads may sample disjoint indices
/// concurrently and the result never depends on scheduling.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed, SeedDomain domain = SeedDomain::Estimator)
        : seed_(seed),
          key_(detail::mix64(seed ^ static_cast<std::uint64_t>(domain))) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Standard-normal value at an absolute component counter.
    double normal_at(std::uint64_t counter) const noexcept {
        const std::uint64_t pair = counter >> 1;
        double r, theta;
        box_muller(pair, r, theta);
        return (counter & 1) ? r * std::sin(theta) : r * std::cos(theta);
    }

    /// Fill `out` with the sample_index-th d-vector, d = out.size().
    void fill(std::uint64_t sample_index, std::span<double> out) const noexcept {
        const std::uint64_t d = out.size();
        const std::uint64_t base = sample_index * d;
        std::uint64_t c = 0;
        if (base & 1) { // leading half-pair
            out[0] = normal_at(base);
            c = 1;
        }
        for (; c + 1 < d; c += 2) { // aligned pairs share one hash/log/sincos
            double r, theta;
            box_muller((base + c) >> 1, r, theta);
            out[c] = r * std::cos(theta);
            out[c + 1] = r * std::sin(theta);
        }
        if (c < d) out[c] = normal_at(base + c);
    }

    std::vector<double> sample(std::uint64_t sample_index, std::int64_t dim) const {
        std::vector<double> u(static_cast<std::size_t>(dim));
        fill(sample_index, u);
        return u;
    }

    /// Stateful convenience: draw the next vector and advance the counter.
    std::vector<double> next(std::int64_t dim) { return sample(cursor_++, dim); }

    std::uint64_t cursor() const noexcept { return cursor_; }

private:
    void box_muller(std::uint64_t pair, double& r, double& theta) const noexcept {
        const double u1 = detail::to_unit_open(detail::counter_word(key_, 2 * pair));
        const double u2 = detail::to_unit_half_open(detail::counter_word(key_, 2 * pair + 1));
        r = std::sqrt(-2.0 * std::log(u1));
        theta = 2.0 * std::numbers::pi * u2;
    }

    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t cursor_ = 0;
};

/// Free-function form: the j-th standard-normal d-vector of the stream.
inline std::vector<double> sample_gaussian(const GaussianStream& stream, std::uint64_t sample_index,
                                           std::int64_t dim) {
    return stream.sample(sample_index, dim);
}

} // namespace qdiag
