// qdiag command-line front end: estimate diagonals through quadratic-form
// oracles, print sample-size plans, and run relative-error sweeps.
//
// Exit codes: 0 success (or documented skip), 1 usage error, 2 I/O error,
// 3 degenerate relative-error target.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qdiag/qdiag.hpp"

namespace {

struct CommonArgs {
    std::string matrix_source;
    std::uint64_t seed = 0;
    int threads = 0;
};

void print_value_line(double v) {
    std::printf("%.17g\n", v);
}

qdiag::Selector parse_selector(const std::string& p) {
    if (p == "first") return qdiag::Selector::First;
    if (p == "argmax") return qdiag::Selector::ArgmaxDiag;
    if (p == "argmin") return qdiag::Selector::ArgminDiag;
    return qdiag::Selector::First; // numeric handled by caller
}

qdiag::index_t resolve_p(const qdiag::MatrixHandle& m, const std::string& p) {
    if (p == "first" || p == "argmax" || p == "argmin")
        return qdiag::select_index(m, parse_selector(p));
    try {
        return static_cast<qdiag::index_t>(std::stoll(p));
    } catch (const std::exception&) {
        throw std::invalid_argument("--p expects an index or first|argmax|argmin, got: " + p);
    }
}

int run_estimate(const CommonArgs& common, std::uint64_t n, std::uint64_t median_t) {
    const qdiag::MatrixHandle m = qdiag::make_matrix(common.matrix_source, common.seed);
    const qdiag::ExplicitQuadFormOracle oracle(m);
    const auto counted = qdiag::with_counter(oracle);

    const auto start = std::chrono::steady_clock::now();
    const qdiag::DiagonalEstimate est =
        median_t > 0
            ? qdiag::estimate_diagonal_median(counted, n, median_t, common.seed, common.threads)
            : qdiag::estimate_diagonal(counted, n, common.seed, common.threads);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    std::printf("# matrix %s\n", common.matrix_source.c_str());
    std::printf("# dim %lld\n", static_cast<long long>(m.dim()));
    std::printf("# n %llu\n", static_cast<unsigned long long>(est.sample_size));
    std::printf("# t %llu\n", static_cast<unsigned long long>(est.repeats));
    std::printf("# seed %llu\n", static_cast<unsigned long long>(est.seed));
    std::printf("# queries %llu\n", static_cast<unsigned long long>(counted.count()));
    for (double v : est.values) print_value_line(v);
    std::fprintf(stderr, "elapsed_seconds %.3f\n", elapsed.count());
    return 0;
}

int run_predict(const CommonArgs& common, double eps, double delta, const std::string& p_arg,
                bool normwise) {
    const qdiag::MatrixHandle m = qdiag::make_matrix(common.matrix_source, common.seed);
    if (normwise) {
        const qdiag::SamplePlan plan = qdiag::sample_size_normwise(m, eps, delta);
        const qdiag::VarianceReport report = qdiag::total_variance(m);
        std::printf("mode normwise\n");
        std::printf("diag_norm_sq %.17g\n", qdiag::diag_norm_sq(m));
        std::printf("total_variance_direct %.17g\n", report.direct_sum);
        std::printf("total_variance_published %.17g\n", report.published_closed_form);
        std::printf("N %llu\n", static_cast<unsigned long long>(plan.n));
        return 0;
    }
    const qdiag::index_t p = resolve_p(m, p_arg);
    const qdiag::SamplePlan plan = qdiag::sample_size_elementwise(m, p, eps, delta);
    const qdiag::SamplePlan median = qdiag::sample_plan_median(m, p, eps, delta);
    std::printf("mode elementwise\n");
    std::printf("p %lld\n", static_cast<long long>(p));
    std::printf("diag_value %.17g\n", m.entry(p - 1, p - 1));
    std::printf("trace %.17g\n", qdiag::trace(m));
    std::printf("sym_frobenius_sq %.17g\n", qdiag::sym_frobenius_sq(m));
    std::printf("cross_norm_sq %.17g\n", qdiag::cross_norm_sq(m, p));
    std::printf("variance %.17g\n", qdiag::elementwise_variance(m, p));
    std::printf("N %llu\n", static_cast<unsigned long long>(plan.n));
    std::printf("median_N_prime %llu\n", static_cast<unsigned long long>(median.n_prime));
    std::printf("median_T %llu\n", static_cast<unsigned long long>(median.t));
    return 0;
}

int run_experiment_cmd(const CommonArgs& common, const std::string& grid_arg, int repeats,
                       double delta, const std::string& out_dir) {
    if (common.matrix_source.rfind("mm:", 0) == 0) {
        const std::string path = common.matrix_source.substr(3);
        if (!std::filesystem::exists(path)) {
            std::fprintf(stderr, "warning: matrix file %s not found, skipping experiment\n",
                         path.c_str());
            return 0;
        }
    }
    qdiag::ExperimentSpec spec;
    spec.matrix_source = common.matrix_source;
    if (!grid_arg.empty()) spec.grid = qdiag::parse_grid(grid_arg);
    spec.repeats = repeats;
    spec.seed = common.seed;
    spec.delta = delta;
    spec.threads = common.threads;

    const qdiag::MatrixHandle m = qdiag::make_matrix(common.matrix_source, common.seed);
    const auto start = std::chrono::steady_clock::now();
    const qdiag::ExperimentResult result = qdiag::run_experiment(m, spec);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    qdiag::write_outputs(result, spec, out_dir);
    std::printf("wrote %s\n", (std::filesystem::path(out_dir) / "results.csv").string().c_str());
    for (qdiag::Selector s : spec.selectors)
        std::printf("wrote %s\n",
                    (std::filesystem::path(out_dir) / (std::string(qdiag::selector_name(s)) + ".svg"))
                        .string()
                        .c_str());
    std::fprintf(stderr, "elapsed_seconds %.3f\n", elapsed.count());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic diagonal estimation from quadratic-form oracles"};
    app.require_subcommand(1);

    CommonArgs common;
    std::uint64_t n = 1000, median_t = 0;
    double eps = 1.0, delta = 0.25, exp_delta = 1.0;
    std::string p_arg = "first", grid_arg, out_dir;
    bool normwise = false;
    int repeats = 10;

    CLI::App* estimate = app.add_subcommand("estimate", "estimate diag(A) from oracle queries");
    estimate->add_option("--matrix", common.matrix_source, "gauss:D | uniform:D | mm:PATH")
        ->required();
    estimate->add_option("--n", n, "sample size (per repeat when --median-T is set)");
    estimate->add_option("--median-T", median_t, "repeats for the median-of-repeats variant");
    estimate->add_option("--seed", common.seed, "stream seed");
    estimate->add_option("--threads", common.threads, "worker threads (0 = hardware)");

    CLI::App* predict = app.add_subcommand("predict", "print sample-size plans for (eps, delta)");
    predict->add_option("--matrix", common.matrix_source, "gauss:D | uniform:D | mm:PATH")
        ->required();
    predict->add_option("--eps", eps, "target accuracy");
    predict->add_option("--delta", delta, "failure probability in (0,1)");
    predict->add_option("--p", p_arg, "target index or first|argmax|argmin");
    predict->add_flag("--normwise", normwise, "norm-wise target instead of element-wise");
    predict->add_option("--seed", common.seed, "seed for generated matrix sources");

    CLI::App* experiment = app.add_subcommand("experiment", "relative-error sweep over N grid");
    experiment->add_option("--matrix", common.matrix_source, "gauss:D | uniform:D | mm:PATH")
        ->required();
    experiment->add_option("--grid", grid_arg, "comma-separated sample sizes (default 10,50,100,250,500,750,1000)");
    experiment->add_option("--repeats", repeats, "estimator runs per grid point");
    experiment->add_option("--seed", common.seed, "base seed; run r uses seed+r");
    experiment->add_option("--delta", exp_delta, "delta for the theory curves (default 1)");
    experiment->add_option("--out", out_dir, "output directory")->required();
    experiment->add_option("--threads", common.threads, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
        if (estimate->parsed()) return run_estimate(common, n, median_t);
        if (predict->parsed()) return run_predict(common, eps, delta, p_arg, normwise);
        return run_experiment_cmd(common, grid_arg, repeats, exp_delta, out_dir);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const qdiag::DegenerateTargetError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
