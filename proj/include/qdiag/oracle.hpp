#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdiag/matrix.hpp"

namespace qdiag {

/// Black box answering quadratic-form queries u |-> u^T A u.
///
/// Evaluation must be deterministic in u (no internal randomness).
/// concurrent_safe() tells callers whether operator() may be invoked from
/// several threads at once.
class QuadraticFormOracle {
public:
    virtual ~QuadraticFormOracle() = default;
    virtual index_t dim() const = 0;
    virtual bool concurrent_safe() const { return true; }
    virtual double operator()(std::span<const double> u) const = 0;
};

/// Oracle backed by an explicit matrix: answers quad_form(M, u) exactly.
class ExplicitQuadFormOracle final : public QuadraticFormOracle {
public:
    explicit ExplicitQuadFormOracle(const MatrixHandle& m) : m_(m) {}
    explicit ExplicitQuadFormOracle(MatrixHandle&&) = delete; // would dangle

    index_t dim() const override { return m_.dim(); }
    double operator()(std::span<const double> u) const override { return quad_form(m_, u); }

private:
    const MatrixHandle& m_;
};

inline ExplicitQuadFormOracle explicit_oracle(const MatrixHandle& m) {
    return ExplicitQuadFormOracle(m);
}
inline ExplicitQuadFormOracle explicit_oracle(MatrixHandle&&) = delete;

/// A scalar objective probed around a base point with step `alpha`.
/// alpha <= 0 selects the default 1e-4 * max(1, |x|), balancing the O(alpha)
/// truncation error of the three-point stencil against 1/alpha^2
/// cancellation in 64-bit arithmetic.
struct ScalarFieldProbe {
    std::function<double(std::span<const double>)> objective;
    std::vector<double> base_point;
    double alpha = 0.0;
    bool concurrent_safe = true;

    double resolved_alpha() const {
        if (alpha > 0.0) return alpha;
        double norm_sq = 0.0;
        for (double v : base_point) norm_sq += v * v;
        return 1e-4 * std::max(1.0, std::sqrt(norm_sq));
    }
};

/// Zeroth-order quadratic-form oracle:
///
///   u |-> (f(x + a u) + f(x - a u) - 2 f(x)) / a^2,
///
/// which approximates u^T H u for the Hessian H of f at x. f(x) is evaluated
/// once, on the first query, and reused for every u; function_evals() counts
/// 3 for the first query and 2 per query after that.
class ZerothOrderOracle final : public QuadraticFormOracle {
public:
    explicit ZerothOrderOracle(ScalarFieldProbe probe)
        : probe_(std::move(probe)), alpha_(probe_.resolved_alpha()) {
        if (!(alpha_ > 0.0)) throw std::invalid_argument("probe step must be positive");
        if (probe_.base_point.empty()) throw std::invalid_argument("probe base point is empty");
    }

    index_t dim() const override { return static_cast<index_t>(probe_.base_point.size()); }
    bool concurrent_safe() const override { return probe_.concurrent_safe; }

    double operator()(std::span<const double> u) const override {
        if (u.size() != probe_.base_point.size())
            throw std::invalid_argument("probe vector length does not match base point");
        std::call_once(base_once_, [this] {
            f_base_ = probe_.objective(probe_.base_point);
            evals_.fetch_add(1, std::memory_order_relaxed);
        });
        std::vector<double> y(probe_.base_point.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = probe_.base_point[i] + alpha_ * u[i];
        const double f_plus = probe_.objective(y);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = probe_.base_point[i] - alpha_ * u[i];
        const double f_minus = probe_.objective(y);
        evals_.fetch_add(2, std::memory_order_relaxed);
        const double value = (f_plus + f_minus - 2.0 * f_base_) / (alpha_ * alpha_);
        if (!std::isfinite(value)) throw std::domain_error("objective returned a non-finite value");
        return value;
    }

    double alpha() const noexcept { return alpha_; }
    std::uint64_t function_evals() const noexcept { return evals_.load(std::memory_order_relaxed); }

private:
    ScalarFieldProbe probe_;
    double alpha_;
    mutable std::once_flag base_once_;
    mutable double f_base_ = 0.0;
    mutable std::atomic<std::uint64_t> evals_{0};
};

inline ZerothOrderOracle zeroth_order_oracle(ScalarFieldProbe probe) {
    return ZerothOrderOracle(std::move(probe));
}

/// Forwarding wrapper that counts quadratic-form evaluations. The counter is
/// atomic; totals are exact under concurrent evaluation.
class CountingQuadFormOracle final : public QuadraticFormOracle {
public:
    explicit CountingQuadFormOracle(const QuadraticFormOracle& inner) : inner_(inner) {}

    index_t dim() const override { return inner_.dim(); }
    bool concurrent_safe() const override { return inner_.concurrent_safe(); }

    double operator()(std::span<const double> u) const override {
        count_.fetch_add(1, std::memory_order_relaxed);
        return inner_(u);
    }

    std::uint64_t count() const noexcept { return count_.load(std::memory_order_relaxed); }

private:
    const QuadraticFormOracle& inner_;
    mutable std::atomic<std::uint64_t> count_{0};
};

inline CountingQuadFormOracle with_counter(const QuadraticFormOracle& oracle) {
    return CountingQuadFormOracle(oracle);
}

/// Black box answering matrix-vector queries u |-> A u (the baseline's
/// strictly more informative oracle).
class MatVecOracle {
public:
    virtual ~MatVecOracle() = default;
    virtual index_t dim() const = 0;
    virtual bool concurrent_safe() const { return true; }
    virtual std::vector<double> operator()(std::span<const double> u) const = 0;
};

class ExplicitMatVecOracle final : public MatVecOracle {
public:
    explicit ExplicitMatVecOracle(const MatrixHandle& m) : m_(m) {}
    explicit ExplicitMatVecOracle(MatrixHandle&&) = delete; // would dangle

    index_t dim() const override { return m_.dim(); }
    std::vector<double> operator()(std::span<const double> u) const override {
        return mat_vec(m_, u);
    }

private:
    const MatrixHandle& m_;
};

inline ExplicitMatVecOracle matvec_oracle(const MatrixHandle& m) {
    return ExplicitMatVecOracle(m);
}
inline ExplicitMatVecOracle matvec_oracle(MatrixHandle&&) = delete;

} // namespace qdiag
