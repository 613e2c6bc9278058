#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qdiag/errors.hpp"
#include "qdiag/matrix.hpp"

namespace qdiag {

/// Exact per-sample variance profile of the quadratic-form estimator, with
/// the aggregate reported three ways:
///   - direct_sum:           sum over p of the per-index formula,
///   - published_closed_form:    (4d+16) tr^2 + (d+8) |A+A^T|^2 + 20 sum A_ii^2,
///   - corrected_closed_form:(2d+16) tr^2 + (d+8) |A+A^T|^2 + 20 sum A_ii^2.
///
/// Expanding the per-index formula yields the (2d+16) coefficient; the two
/// aggregates differ by exactly 2d (tr A)^2. Both are exposed so the
/// discrepancy stays visible; planning always uses the direct sum.
struct VarianceReport {
    std::vector<double> per_index; // element k is V_p for p = k+1
    double direct_sum = 0.0;
    double published_closed_form = 0.0;
    double corrected_closed_form = 0.0;
};

enum class PlanMode { Elementwise, Normwise, Median, MatvecElementwise };

/// A sample-size requirement for a target (eps, delta) accuracy.
struct SamplePlan {
    double eps = 0.0;
    double delta = 0.0;
    std::uint64_t n = 0;       // required sample size (queries for one run)
    PlanMode mode = PlanMode::Elementwise;
    index_t p = 0;             // 1-based target index; 0 when norm-wise
    std::uint64_t n_prime = 0; // median mode: per-repeat sample size
    std::uint64_t t = 0;       // median mode: repeat count
};

namespace detail {

/// Ceiling floored at 1, with a 1e-12 relative nudge so a requirement that
/// is an integer up to roundoff does not get bumped to the next count.
inline std::uint64_t ceil_count(double x) {
    if (!(x > 1.0)) return 1;
    const double nudged = x - std::abs(x) * 1e-12;
    return static_cast<std::uint64_t>(std::ceil(nudged));
}

inline void check_eps_delta(double eps, double delta) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

inline double elementwise_variance_terms(double tr, double a_pp, double sym_sq, double cross_sq) {
    const double s = tr + 4.0 * a_pp;
    return 2.0 * s * s + sym_sq + 8.0 * cross_sq - 12.0 * a_pp * a_pp;
}

} // namespace detail

/// Per-sample variance of the quadratic-form estimate of A_pp (p 1-based):
///
///   V_p = 2 (tr A + 4 A_pp)^2 + |A + A^T|^2 + 8 |A_{p,:} + A_{:,p}|^2
///         - 12 A_pp^2.
///
/// A single run of size N estimates A_pp with variance V_p / (4N).
inline double elementwise_variance(const MatrixHandle& m, index_t p) {
    const double cross_sq = cross_norm_sq(m, p); // validates p
    const double a_pp = m.entry(p - 1, p - 1);
    return detail::elementwise_variance_terms(trace(m), a_pp, sym_frobenius_sq(m), cross_sq);
}

inline VarianceReport total_variance(const MatrixHandle& m) {
    const index_t d = m.dim();
    const double tr = trace(m);
    const double sym_sq = sym_frobenius_sq(m);
    const double dsq = diag_norm_sq(m);
    const std::vector<double> diagonal = diag(m);
    const std::vector<double> cross = cross_norm_sq_profile(m);

    VarianceReport report;
    report.per_index.resize(static_cast<std::size_t>(d));
    for (index_t i = 0; i < d; ++i) {
        report.per_index[i] = detail::elementwise_variance_terms(tr, diagonal[i], sym_sq, cross[i]);
        report.direct_sum += report.per_index[i];
    }
    const double dd = static_cast<double>(d);
    report.published_closed_form = (4.0 * dd + 16.0) * tr * tr + (dd + 8.0) * sym_sq + 20.0 * dsq;
    report.corrected_closed_form = (2.0 * dd + 16.0) * tr * tr + (dd + 8.0) * sym_sq + 20.0 * dsq;
    return report;
}

/// Closed form of E[(u^T A u * u_p^n)^2] for n in {0, 1, 2} (p 1-based;
/// ignored by the formula when n = 0 but still range-checked). Off-diagonal
/// sums are folded through |A + A^T|^2 and the cross norm:
///   sum_{i>j} (A_ij + A_ji)^2            = (|A+A^T|^2 - 4 sum A_ii^2) / 2
///   (both p-restricted pair sums)        =  |A_{p,:} + A_{:,p}|^2 - 4 A_pp^2.
inline double moment_sq(const MatrixHandle& m, index_t p, int n) {
    const double cross_sq = cross_norm_sq(m, p); // validates p
    if (n < 0 || n > 2) throw std::invalid_argument("moment order n must be 0, 1, or 2");
    const double tr = trace(m);
    const double dsq = diag_norm_sq(m);
    const double a_pp = m.entry(p - 1, p - 1);
    const double offdiag_pairs = 0.5 * (sym_frobenius_sq(m) - 4.0 * dsq);
    const double p_pairs = cross_sq - 4.0 * a_pp * a_pp;
    switch (n) {
    case 0:
        return tr * tr + 2.0 * dsq + offdiag_pairs;
    case 1:
        return tr * tr + 4.0 * a_pp * tr + 2.0 * dsq + 8.0 * a_pp * a_pp + offdiag_pairs +
               2.0 * p_pairs;
    default:
        return 3.0 * tr * tr + 6.0 * dsq + 24.0 * a_pp * tr + 72.0 * a_pp * a_pp +
               3.0 * offdiag_pairs + 12.0 * p_pairs;
    }
}

/// Sample size for |g_p - A_pp| <= eps with probability >= 1 - delta
/// (Chebyshev route): N = ceil(V_p / (4 delta eps^2)), floored at 1.
inline SamplePlan sample_size_elementwise(const MatrixHandle& m, index_t p, double eps,
                                          double delta) {
    detail::check_eps_delta(eps, delta);
    const double v = elementwise_variance(m, p);
    SamplePlan plan;
    plan.eps = eps;
    plan.delta = delta;
    plan.mode = PlanMode::Elementwise;
    plan.p = p;
    plan.n = detail::ceil_count(v / (4.0 * delta * eps * eps));
    return plan;
}

/// Sample size for |g - diag(A)|^2 <= eps * sum A_ii^2 with probability
/// >= 1 - delta, using the direct-sum aggregate variance.
inline SamplePlan sample_size_normwise(const MatrixHandle& m, double eps, double delta) {
    detail::check_eps_delta(eps, delta);
    const double dsq = diag_norm_sq(m);
    if (dsq == 0.0)
        throw DegenerateTargetError("norm-wise target undefined: diagonal is identically zero");
    const VarianceReport report = total_variance(m);
    SamplePlan plan;
    plan.eps = eps;
    plan.delta = delta;
    plan.mode = PlanMode::Normwise;
    plan.n = detail::ceil_count(report.direct_sum / (4.0 * eps * delta * dsq));
    return plan;
}

/// Median-of-repeats plan: per-repeat size N' = ceil(V_p / eps^2) and
/// T = max(1, ceil(8 ln(1/delta))) repeats; total queries N' * T.
inline SamplePlan sample_plan_median(const MatrixHandle& m, index_t p, double eps, double delta) {
    detail::check_eps_delta(eps, delta);
    const double v = elementwise_variance(m, p);
    SamplePlan plan;
    plan.eps = eps;
    plan.delta = delta;
    plan.mode = PlanMode::Median;
    plan.p = p;
    plan.n_prime = detail::ceil_count(v / (eps * eps));
    plan.t = detail::ceil_count(8.0 * std::log(1.0 / delta));
    plan.n = plan.n_prime * plan.t;
    return plan;
}

/// Matrix-vector baseline sample size for the same element-wise target:
/// N' = ceil(2 (|A_{p,:}|^2 - A_pp^2) ln(2/delta) / eps^2), floored at 1.
inline SamplePlan sample_size_matvec_elementwise(const MatrixHandle& m, index_t p, double eps,
                                                 double delta) {
    detail::check_eps_delta(eps, delta);
    const double row_sq = row_norm_sq(m, p); // validates p
    const double a_pp = m.entry(p - 1, p - 1);
    SamplePlan plan;
    plan.eps = eps;
    plan.delta = delta;
    plan.mode = PlanMode::MatvecElementwise;
    plan.p = p;
    plan.n =
        detail::ceil_count(2.0 * (row_sq - a_pp * a_pp) * std::log(2.0 / delta) / (eps * eps));
    return plan;
}

/// Predicted element-wise relative error (A_pp - g_p)^2 / A_pp^2 after N
/// samples: V_p / (4 delta N A_pp^2). With delta = 1 this is the exact
/// expectation of the relative error.
inline double predicted_rel_err_elementwise(const MatrixHandle& m, index_t p, std::uint64_t n,
                                            double delta) {
    if (n == 0) throw std::invalid_argument("sample size must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const double v = elementwise_variance(m, p);
    const double a_pp = m.entry(p - 1, p - 1);
    if (a_pp == 0.0)
        throw DegenerateTargetError("element-wise relative error undefined: A_pp is zero");
    return v / (4.0 * delta * static_cast<double>(n) * a_pp * a_pp);
}

/// Predicted norm-wise relative error |g - diag(A)|^2 / sum A_ii^2 after N
/// samples, direct-sum aggregate: V / (4 N delta sum A_ii^2).
inline double predicted_rel_err_normwise(const MatrixHandle& m, std::uint64_t n, double delta) {
    if (n == 0) throw std::invalid_argument("sample size must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const double dsq = diag_norm_sq(m);
    if (dsq == 0.0)
        throw DegenerateTargetError("norm-wise relative error undefined: diagonal is identically zero");
    return total_variance(m).direct_sum / (4.0 * static_cast<double>(n) * delta * dsq);
}

} // namespace qdiag
