#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qdiag/mc_oracle.hpp"
#include "qdiag/theory.hpp"
#include "test_support.hpp"

using namespace qdiag;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const MatrixHandle kExample = MatrixHandle::dense(2, {2, 1, 0, 3});
const MatrixHandle kScalarOne = MatrixHandle::dense(1, {1.0});
} // namespace

TEST_CASE("element-wise variance anchors") {
    // d = 1, A = [1]: E[(u^4 - u^2 - 2)^2] from the raw Gaussian moments
    // 105 - 30 - 9 + 4 + 4 = 74.
    CHECK(elementwise_variance(kScalarOne, 1) == 74.0);
    CHECK(elementwise_variance(kExample, 1) == 480.0);
    CHECK(elementwise_variance(kExample, 2) == 820.0);
    CHECK_THROWS_AS(elementwise_variance(kExample, 3), std::invalid_argument);

    for (index_t d : {1, 4, 9}) {
        std::vector<double> e(static_cast<std::size_t>(d) * d, 0.0);
        for (index_t i = 0; i < d; ++i) e[static_cast<std::size_t>(i) * d + i] = 1.0;
        const MatrixHandle id = MatrixHandle::dense(d, std::move(e));
        const double expected = 2.0 * (d + 4.0) * (d + 4.0) + 4.0 * d + 20.0;
        for (index_t p = 1; p <= d; ++p) CHECK(elementwise_variance(id, p) == expected);
    }
}

TEST_CASE("aggregate variance: direct sum, published form, corrected form") {
    const VarianceReport r2 = total_variance(kExample);
    CHECK(r2.direct_sum == 1300.0);
    CHECK(r2.published_closed_form == 1400.0);
    CHECK(r2.corrected_closed_form == 1300.0);

    const VarianceReport r1 = total_variance(kScalarOne);
    CHECK(r1.direct_sum == 74.0);
    CHECK(r1.published_closed_form == 76.0);
    CHECK(r1.corrected_closed_form == 74.0);

    const VarianceReport rz = total_variance(MatrixHandle::dense_zero(3));
    CHECK(rz.direct_sum == 0.0);
    CHECK(rz.published_closed_form == 0.0);
    CHECK(rz.corrected_closed_form == 0.0);
}

TEST_CASE("aggregate identities hold on the whole battery") {
    for (const support::BatteryMatrix& b : support::full_battery()) {
        INFO(b.name);
        const VarianceReport r = total_variance(b.matrix);
        const double tr = trace(b.matrix);
        const double d = static_cast<double>(b.matrix.dim());
        for (double v : r.per_index) CHECK(v >= 0.0);
        CHECK_THAT(r.direct_sum, WithinRel(r.corrected_closed_form, 1e-10));
        // direct sum - published form = -2d (tr A)^2
        const double scale = std::max({1.0, std::abs(r.direct_sum), std::abs(r.published_closed_form)});
        CHECK(std::abs((r.direct_sum - r.published_closed_form) + 2.0 * d * tr * tr) <=
              1e-10 * scale);
        double sum = 0.0;
        for (index_t p = 1; p <= b.matrix.dim(); ++p) sum += elementwise_variance(b.matrix, p);
        CHECK_THAT(sum, WithinRel(r.direct_sum, 1e-12) || WithinAbs(r.direct_sum, 1e-12));
    }
}

TEST_CASE("second-moment closed forms") {
    // d = 1, A = [1]: the three moments collapse to E[u^4], E[u^6], E[u^8].
    CHECK(moment_sq(kScalarOne, 1, 0) == 3.0);
    CHECK(moment_sq(kScalarOne, 1, 1) == 15.0);
    CHECK(moment_sq(kScalarOne, 1, 2) == 105.0);

    const MatrixHandle zero = MatrixHandle::dense_zero(4);
    for (int n : {0, 1, 2}) CHECK(moment_sq(zero, 2, n) == 0.0);

    CHECK(moment_sq(kExample, 1, 0) == 52.0); // 25 + 26 + 1

    CHECK_THROWS_AS(moment_sq(kExample, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(moment_sq(kExample, 1, -1), std::invalid_argument);
    CHECK_THROWS_AS(moment_sq(kExample, 0, 0), std::invalid_argument);
}

TEST_CASE("variance decomposition identity across the battery") {
    for (const support::BatteryMatrix& b : support::full_battery()) {
        INFO(b.name);
        for (index_t p = 1; p <= b.matrix.dim(); ++p) {
            const double a_pp = b.matrix.entry(p - 1, p - 1);
            const double lhs = moment_sq(b.matrix, p, 2) + moment_sq(b.matrix, p, 0) -
                               2.0 * moment_sq(b.matrix, p, 1) - 4.0 * a_pp * a_pp;
            const double rhs = elementwise_variance(b.matrix, p);
            CHECK_THAT(lhs, WithinRel(rhs, 1e-10) || WithinAbs(rhs, 1e-10));
        }
    }
}

TEST_CASE("element-wise sample size") {
    CHECK(sample_size_elementwise(kScalarOne, 1, 1.0, 0.25).n == 74);
    CHECK(sample_size_elementwise(kExample, 2, 1.0, 0.25).n == 820);
    CHECK(sample_size_elementwise(kExample, 1, 1e6, 0.5).n == 1); // floored at 1
    CHECK_THROWS_AS(sample_size_elementwise(kExample, 1, 0.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(sample_size_elementwise(kExample, 1, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_size_elementwise(kExample, 1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("norm-wise sample size") {
    CHECK(sample_size_normwise(kScalarOne, 1.0, 0.25).n == 74);
    CHECK(sample_size_normwise(kExample, 0.1, 0.5).n == 500);
    // zero diagonal with nonzero off-diagonal: the relative target is undefined
    const MatrixHandle hollow = MatrixHandle::dense(2, {0, 1, 2, 0});
    CHECK_THROWS_AS(sample_size_normwise(hollow, 0.1, 0.5), DegenerateTargetError);
}

TEST_CASE("median plan uses natural log and ceiling") {
    const SamplePlan plan = sample_plan_median(kExample, 1, 0.5, 0.05);
    CHECK(plan.n_prime == 1920); // ceil(480 / 0.25)
    CHECK(plan.t == 24);         // ceil(8 ln 20)
    CHECK(plan.n == 1920 * 24);
    CHECK(sample_plan_median(kExample, 2, 0.5, 0.05).n_prime == 3280);
}

TEST_CASE("matrix-vector baseline sample size") {
    const MatrixHandle diag3 = MatrixHandle::dense(3, {5, 0, 0, 0, 6, 0, 0, 0, 7});
    for (index_t p = 1; p <= 3; ++p)
        CHECK(sample_size_matvec_elementwise(diag3, p, 0.5, 0.1).n == 1);

    const double delta1 = 2.0 / std::exp(2.0); // ln(2/delta) = 2
    CHECK(sample_size_matvec_elementwise(kExample, 1, 1.0, delta1).n == 4);
    const double delta2 = 2.0 / std::exp(1.0); // ln(2/delta) = 1
    CHECK(sample_size_matvec_elementwise(kExample, 2, 0.5, delta2).n == 1);
}

TEST_CASE("predicted element-wise relative error") {
    CHECK(predicted_rel_err_elementwise(kScalarOne, 1, 74, 1.0) == 0.25);
    CHECK(predicted_rel_err_elementwise(kExample, 1, 1000, 1.0) == 0.03);
    const MatrixHandle hollow = MatrixHandle::dense(2, {0, 1, 2, 0});
    CHECK_THROWS_AS(predicted_rel_err_elementwise(hollow, 1, 10, 1.0), DegenerateTargetError);
    CHECK_THROWS_AS(predicted_rel_err_elementwise(kExample, 1, 0, 1.0), std::invalid_argument);

    // inverse of the sample-size rule: plugging the planned N back in gives
    // a squared error target of at most eps^2 (up to ceiling rounding)
    const double eps = 0.37, delta = 0.2;
    const SamplePlan plan = sample_size_elementwise(kExample, 1, eps, delta);
    const double err = predicted_rel_err_elementwise(kExample, 1, plan.n, delta);
    CHECK(err * 4.0 /* A_pp^2 */ <= eps * eps * (1.0 + 1e-9));
}

TEST_CASE("predicted norm-wise relative error") {
    CHECK(predicted_rel_err_normwise(kExample, 1000, 1.0) == 0.025);
    CHECK(predicted_rel_err_normwise(kScalarOne, 74, 1.0) == 0.25);
    CHECK(predicted_rel_err_normwise(kExample, 500, 1.0) ==
          2.0 * predicted_rel_err_normwise(kExample, 1000, 1.0));
    const MatrixHandle hollow = MatrixHandle::dense(2, {0, 1, 2, 0});
    CHECK_THROWS_AS(predicted_rel_err_normwise(hollow, 10, 1.0), DegenerateTargetError);
}

TEST_CASE("monte carlo validator basics") {
    CHECK(mc_variance_oracle(MatrixHandle::dense_zero(2), 1, 1000, 5) == 0.0);
    CHECK_THROWS_AS(mc_variance_oracle(kExample, 1, 0, 5), std::invalid_argument);

    // single-index call is bitwise the profile entry, for any thread count
    const std::vector<double> profile = mc_variance_profile(kExample, 40000, 5);
    CHECK(mc_variance_oracle(kExample, 1, 40000, 5) == profile[0]);
    CHECK(mc_variance_oracle(kExample, 2, 40000, 5) == profile[1]);
    CHECK(mc_variance_profile(kExample, 40000, 5, 1) == mc_variance_profile(kExample, 40000, 5, 4));
    CHECK(mc_moment_profile(kExample, 2, 40000, 5, 1) == mc_moment_profile(kExample, 2, 40000, 5, 4));
}

TEST_CASE("monte carlo smoke agreement with the closed forms") {
    // loose-tolerance smoke runs; the acceptance suite runs the full 1e7
    // battery at the spec tolerances
    const std::uint64_t samples = 400000;
    CHECK(support::rel_gap(mc_variance_oracle(kScalarOne, 1, samples, 91), 74.0) < 0.10);
    CHECK(support::rel_gap(mc_variance_oracle(kExample, 1, samples, 92), 480.0) < 0.10);
    CHECK(support::rel_gap(mc_moment_sq(kExample, 1, 0, samples, 93), 52.0) < 0.10);

    const MatrixHandle m = support::random_dense(5, 777);
    for (index_t p = 1; p <= 5; ++p) {
        CHECK(support::rel_gap(mc_variance_oracle(m, p, samples, 94), elementwise_variance(m, p)) <
              0.15);
    }
    CHECK(support::rel_gap(mc_total_variance(m, samples, 95), total_variance(m).direct_sum) < 0.15);
}
