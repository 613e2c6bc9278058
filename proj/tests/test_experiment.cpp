#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "qdiag/experiment.hpp"
#include "qdiag/theory.hpp"
#include "test_support.hpp"

using namespace qdiag;

TEST_CASE("selector indices with smallest-index tie-breaking") {
    const MatrixHandle m = MatrixHandle::dense(3, {2, 0, 0, 0, -2, 0, 0, 0, 1});
    CHECK(select_index(m, Selector::First) == 1);
    CHECK(select_index(m, Selector::ArgmaxDiag) == 1); // |2| == |-2|, first wins
    CHECK(select_index(m, Selector::ArgminDiag) == 3);
    CHECK(select_index(m, Selector::Normwise) == 0);
}

TEST_CASE("spec validation") {
    ExperimentSpec spec;
    spec.grid = {};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.grid = {10, 10};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.grid = {50, 10};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.grid = {10, 50};
    spec.repeats = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.repeats = 1;
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("matrix source parsing") {
    CHECK(make_matrix("gauss:17", 3).dim() == 17);
    CHECK(make_matrix("uniform:5", 3).dim() == 5);
    CHECK_THROWS_AS(make_matrix("gauss", 3), std::invalid_argument);
    CHECK_THROWS_AS(make_matrix("gauss:abc", 3), std::invalid_argument);
    CHECK_THROWS_AS(make_matrix("nope:4", 3), std::invalid_argument);
    CHECK_THROWS_AS(make_matrix("mm:/no/such/file.mtx", 3), std::runtime_error);
    CHECK_THROWS_AS(parse_grid("10,x,30"), std::invalid_argument);
    CHECK(parse_grid("10,50,100") == std::vector<std::uint64_t>{10, 50, 100});
}

TEST_CASE("the default grid on gauss:100 yields 4 selectors x 7 sizes") {
    ExperimentSpec spec;
    spec.matrix_source = "gauss:100";
    spec.seed = 1;
    const MatrixHandle m = make_matrix(spec.matrix_source, spec.seed);
    const ExperimentResult result = run_experiment(m, spec);
    REQUIRE(result.rows.size() == 28);

    const std::string csv = to_csv(result);
    CHECK(csv.rfind("matrix,selector,N,emp_rel_err_mean,theo_rel_err,repeats,seed\n", 0) == 0);

    // selector-major, N-minor ordering
    CHECK(result.rows[0].selector == "first");
    CHECK(result.rows[0].n == 10);
    CHECK(result.rows[6].selector == "first");
    CHECK(result.rows[6].n == 1000);
    CHECK(result.rows[7].selector == "argmax");
    CHECK(result.rows[27].selector == "normwise");

    // the theoretical column is exactly the theory module's output
    const index_t argmax_p = select_index(m, Selector::ArgmaxDiag);
    for (const ExperimentRow& row : result.rows) {
        if (row.selector == "argmax")
            CHECK(row.theo_rel_err == predicted_rel_err_elementwise(m, argmax_p, row.n, 1.0));
        if (row.selector == "normwise")
            CHECK(row.theo_rel_err == predicted_rel_err_normwise(m, row.n, 1.0));
    }
}

TEST_CASE("zero matrix marks degenerate targets as nan, not errors") {
    ExperimentSpec spec;
    spec.matrix_source = "zero:3";
    spec.grid = {10, 20};
    spec.repeats = 2;
    const MatrixHandle zero = MatrixHandle::dense_zero(3);
    const ExperimentResult result = run_experiment(zero, spec);
    REQUIRE(result.rows.size() == 8);
    for (const ExperimentRow& row : result.rows) {
        CHECK(std::isnan(row.emp_rel_err_mean));
        CHECK(std::isnan(row.theo_rel_err));
    }
    const std::string csv = to_csv(result);
    CHECK(csv.find("zero:3,first,10,nan,nan,2,0\n") != std::string::npos);
}

TEST_CASE("csv bytes are identical across reruns and thread counts") {
    ExperimentSpec spec;
    spec.matrix_source = "uniform:30";
    spec.grid = {10, 40, 160};
    spec.repeats = 3;
    spec.seed = 5;
    const MatrixHandle m = make_matrix(spec.matrix_source, spec.seed);

    spec.threads = 1;
    const std::string csv1 = to_csv(run_experiment(m, spec));
    const std::string csv1b = to_csv(run_experiment(m, spec));
    spec.threads = 8;
    const std::string csv8 = to_csv(run_experiment(m, spec));
    CHECK(csv1 == csv1b);
    CHECK(csv1 == csv8);
}

TEST_CASE("error decreases with N up to the loose monotonicity guard") {
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ExperimentSpec spec;
        spec.matrix_source = "gauss:50";
        spec.grid = {200, 800};
        spec.seed = seed * 1000;
        spec.selectors = {Selector::Normwise};
        const MatrixHandle m = make_matrix(spec.matrix_source, spec.seed);
        const ExperimentResult result = run_experiment(m, spec);
        const double lo = result.rows[0].emp_rel_err_mean;
        const double hi = result.rows[1].emp_rel_err_mean;
        if (!(hi <= 3.0 * lo * (200.0 / 800.0))) ++failures;
    }
    CHECK(failures < 1);
}

TEST_CASE("svg emission") {
    ExperimentSpec spec;
    spec.matrix_source = "gauss:20";
    spec.grid = {10, 100};
    spec.repeats = 2;
    spec.seed = 2;
    const MatrixHandle m = make_matrix(spec.matrix_source, spec.seed);
    const ExperimentResult result = run_experiment(m, spec);
    const std::string svg = selector_svg(result, "normwise");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("empirical mean") != std::string::npos);

    const std::string empty_svg =
        selector_svg(run_experiment(MatrixHandle::dense_zero(2), spec), "first");
    CHECK(empty_svg.find("no finite data") != std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "qdiag_test_out";
    std::filesystem::remove_all(dir);
    write_outputs(result, spec, dir);
    CHECK(std::filesystem::exists(dir / "results.csv"));
    for (const char* name : {"first", "argmax", "argmin", "normwise"})
        CHECK(std::filesystem::exists(dir / (std::string(name) + ".svg")));
    std::filesystem::remove_all(dir);
}
