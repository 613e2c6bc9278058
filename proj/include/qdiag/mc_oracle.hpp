#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qdiag/gaussian.hpp"
#include "qdiag/matrix.hpp"
#include "qdiag/parallel.hpp"

namespace qdiag {

// Brute-force Monte Carlo validators for the closed-form second-moment and
// variance formulas. They share the counter-based Gaussian machinery with
// the estimator but draw from the McOracle seed domain, so a validator never
// consumes the randomness of the run it is checking. All reductions are
// blocked with a fixed layout: results are bit-identical for any thread
// count, and the single-index functions match the profile functions exactly.

namespace detail {

inline constexpr std::uint64_t kMcBlock = 1 << 16;

template <typename PerSample>
std::vector<double> mc_mean_profile(const MatrixHandle& m, std::uint64_t samples,
                                    std::uint64_t seed, int threads, PerSample&& per_sample) {
    if (samples == 0) throw std::invalid_argument("sample count must be >= 1");
    const index_t d = m.dim();
    const GaussianStream stream(seed, SeedDomain::McOracle);
    const std::uint64_t nblocks = (samples + kMcBlock - 1) / kMcBlock;
    std::vector<std::vector<double>> partial(nblocks);
    for_each_block(samples, kMcBlock, threads,
                   [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
                       std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
                       std::vector<double> u(static_cast<std::size_t>(d));
                       for (std::uint64_t j = lo; j < hi; ++j) {
                           stream.fill(j, u);
                           const double q = quad_form(m, u);
                           per_sample(q, u, acc);
                       }
                       partial[b] = std::move(acc);
                   });
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    for (const std::vector<double>& part : partial)
        for (index_t i = 0; i < d; ++i) mean[i] += part[i];
    for (double& v : mean) v /= static_cast<double>(samples);
    return mean;
}

} // namespace detail

/// Empirical mean of (u^T A u * u_p^2 - u^T A u - 2 A_pp)^2 for every p,
/// element k of the result holding p = k+1.
inline std::vector<double> mc_variance_profile(const MatrixHandle& m, std::uint64_t samples,
                                               std::uint64_t seed, int threads = 0) {
    const std::vector<double> a_diag = diag(m);
    return detail::mc_mean_profile(
        m, samples, seed, threads,
        [&](double q, const std::vector<double>& u, std::vector<double>& acc) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double r = q * u[i] * u[i] - q - 2.0 * a_diag[i];
                acc[i] += r * r;
            }
        });
}

/// Empirical mean of (u^T A u * u_p^2 - u^T A u - 2 A_pp)^2 at one p
/// (1-based). Identical draws and accumulation order as the profile.
inline double mc_variance_oracle(const MatrixHandle& m, index_t p, std::uint64_t samples,
                                 std::uint64_t seed, int threads = 0) {
    detail::to_internal_index(m, p);
    return mc_variance_profile(m, samples, seed, threads)[p - 1];
}

/// Empirical mean of the summed squared residual over all coordinates --
/// the Monte Carlo side of the aggregate-variance identity.
inline double mc_total_variance(const MatrixHandle& m, std::uint64_t samples, std::uint64_t seed,
                                int threads = 0) {
    const std::vector<double> per_index = mc_variance_profile(m, samples, seed, threads);
    double total = 0.0;
    for (double v : per_index) total += v;
    return total;
}

/// Empirical mean of (u^T A u * u_p^n)^2 for every p, n in {0, 1, 2}.
inline std::vector<double> mc_moment_profile(const MatrixHandle& m, int n, std::uint64_t samples,
                                             std::uint64_t seed, int threads = 0) {
    if (n < 0 || n > 2) throw std::invalid_argument("moment order n must be 0, 1, or 2");
    return detail::mc_mean_profile(
        m, samples, seed, threads,
        [n](double q, const std::vector<double>& u, std::vector<double>& acc) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                double w = q;
                if (n >= 1) w *= u[i];
                if (n == 2) w *= u[i];
                acc[i] += w * w;
            }
        });
}

/// Empirical mean of (u^T A u * u_p^n)^2 at one p (1-based).
inline double mc_moment_sq(const MatrixHandle& m, index_t p, int n, std::uint64_t samples,
                           std::uint64_t seed, int threads = 0) {
    detail::to_internal_index(m, p);
    return mc_moment_profile(m, n, samples, seed, threads)[p - 1];
}

} // namespace qdiag
