#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdiag/gaussian.hpp"
#include "qdiag/oracle.hpp"
#include "qdiag/parallel.hpp"

namespace qdiag {

/// Output of one estimator run: the estimate plus its sampling metadata.
/// Rerunning with identical (seed, N, T, oracle) reproduces `values` bitwise.
struct DiagonalEstimate {
    std::vector<double> values;
    std::uint64_t sample_size = 0; // N (per repeat for the median variant)
    std::uint64_t repeats = 1;     // T; 1 for the plain estimator
    std::uint64_t query_count = 0; // oracle evaluations consumed
    std::uint64_t seed = 0;
};

namespace detail {

inline constexpr std::uint64_t kEstimatorBlock = 1024;

/// Accumulate sum over samples [begin, end) of q(u_j) * (u_j^2 - 1) into a
/// fresh vector. Sequential within the range; the blocked caller fixes the
/// combination order so results never depend on thread count.
inline std::vector<double> quad_range_sum(const QuadraticFormOracle& oracle,
                                          const GaussianStream& stream, std::uint64_t begin,
                                          std::uint64_t end) {
    const index_t d = oracle.dim();
    std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
    std::vector<double> u(static_cast<std::size_t>(d));
    for (std::uint64_t j = begin; j < end; ++j) {
        stream.fill(j, u);
        const double q = oracle(u);
        for (index_t i = 0; i < d; ++i) acc[i] += q * (u[i] * u[i] - 1.0);
    }
    return acc;
}

/// One quadratic-form pass over sample indices [begin, end), averaged with
/// the 1/(2 n) prefactor. Parallel over fixed blocks, reduced in block order.
inline std::vector<double> quad_pass(const QuadraticFormOracle& oracle,
                                     const GaussianStream& stream, std::uint64_t begin,
                                     std::uint64_t end, int threads) {
    const index_t d = oracle.dim();
    const std::uint64_t n = end - begin;
    const std::uint64_t nblocks = (n + kEstimatorBlock - 1) / kEstimatorBlock;
    std::vector<std::vector<double>> partial(nblocks);
    if (!oracle.concurrent_safe()) threads = 1;
    for_each_block(n, kEstimatorBlock, threads, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
        partial[b] = quad_range_sum(oracle, stream, begin + lo, begin + hi);
    });
    std::vector<double> g(static_cast<std::size_t>(d), 0.0);
    for (const std::vector<double>& part : partial)
        for (index_t i = 0; i < d; ++i) g[i] += part[i];
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (double& v : g) v *= scale;
    return g;
}

} // namespace detail

/// Quadratic-form diagonal estimator:
///
///   g = (1/2N) sum_j  Q(u_j) * (u_j^2 - 1),   u_j ~ N(0, I_d),
///
/// an unbiased estimate of diag(A) using one oracle query per sample. The
/// u_j come from GaussianStream(seed); no d x d intermediate is ever formed.
inline DiagonalEstimate estimate_diagonal(const QuadraticFormOracle& oracle, std::uint64_t n,
                                          std::uint64_t seed, int threads = 0) {
    if (n == 0) throw std::invalid_argument("sample size must be >= 1");
    const GaussianStream stream(seed);
    DiagonalEstimate est;
    est.values = detail::quad_pass(oracle, stream, 0, n, threads);
    est.sample_size = n;
    est.repeats = 1;
    est.query_count = n;
    est.seed = seed;
    return est;
}

/// Median-of-repeats variant: T independent runs of the plain estimator on
/// disjoint sample-index ranges of one stream, combined by coordinate-wise
/// median (even T averages the two central order statistics). Taking
/// T = ceil(8 ln(1/delta)) boosts a constant-probability guarantee to 1-delta.
inline DiagonalEstimate estimate_diagonal_median(const QuadraticFormOracle& oracle,
                                                 std::uint64_t n_prime, std::uint64_t t,
                                                 std::uint64_t seed, int threads = 0) {
    if (n_prime == 0) throw std::invalid_argument("sample size must be >= 1");
    if (t == 0) throw std::invalid_argument("repeat count must be >= 1");
    const index_t d = oracle.dim();
    const GaussianStream stream(seed);
    std::vector<std::vector<double>> runs(t);
    for (std::uint64_t r = 0; r < t; ++r)
        runs[r] = detail::quad_pass(oracle, stream, r * n_prime, (r + 1) * n_prime, threads);

    DiagonalEstimate est;
    est.values.resize(static_cast<std::size_t>(d));
    std::vector<double> slice(t);
    for (index_t i = 0; i < d; ++i) {
        for (std::uint64_t r = 0; r < t; ++r) slice[r] = runs[r][i];
        std::sort(slice.begin(), slice.end());
        est.values[i] = (t % 2 == 1) ? slice[t / 2] : 0.5 * (slice[t / 2 - 1] + slice[t / 2]);
    }
    est.sample_size = n_prime;
    est.repeats = t;
    est.query_count = n_prime * t;
    est.seed = seed;
    return est;
}

/// Matrix-vector baseline: g = (1/N) sum_i (A w_i) o w_i with Gaussian w_i,
/// where o is the element-wise product. One matrix-vector query per sample.
inline DiagonalEstimate estimate_diagonal_matvec(const MatVecOracle& oracle, std::uint64_t n,
                                                 std::uint64_t seed, int threads = 0) {
    if (n == 0) throw std::invalid_argument("sample size must be >= 1");
    const index_t d = oracle.dim();
    const GaussianStream stream(seed);
    const std::uint64_t nblocks = (n + detail::kEstimatorBlock - 1) / detail::kEstimatorBlock;
    std::vector<std::vector<double>> partial(nblocks);
    detail::for_each_block(
        n, detail::kEstimatorBlock, oracle.concurrent_safe() ? threads : 1,
        [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
            std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
            std::vector<double> w(static_cast<std::size_t>(d));
            for (std::uint64_t j = lo; j < hi; ++j) {
                stream.fill(j, w);
                const std::vector<double> aw = oracle(w);
                for (index_t i = 0; i < d; ++i) acc[i] += aw[i] * w[i];
            }
            partial[b] = std::move(acc);
        });
    DiagonalEstimate est;
    est.values.assign(static_cast<std::size_t>(d), 0.0);
    for (const std::vector<double>& part : partial)
        for (index_t i = 0; i < d; ++i) est.values[i] += part[i];
    for (double& v : est.values) v /= static_cast<double>(n);
    est.sample_size = n;
    est.repeats = 1;
    est.query_count = n;
    est.seed = seed;
    return est;
}

} // namespace qdiag
