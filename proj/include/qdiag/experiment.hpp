#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdiag/errors.hpp"
#include "qdiag/estimator.hpp"
#include "qdiag/matrix.hpp"
#include "qdiag/matrix_market.hpp"
#include "qdiag/oracle.hpp"
#include "qdiag/theory.hpp"

namespace qdiag {

/// Which scalar error a results row tracks.
enum class Selector { First, ArgmaxDiag, ArgminDiag, Normwise };

inline const char* selector_name(Selector s) {
    switch (s) {
    case Selector::First: return "first";
    case Selector::ArgmaxDiag: return "argmax";
    case Selector::ArgminDiag: return "argmin";
    default: return "normwise";
    }
}

/// 1-based target index for an element-wise selector; ties broken toward
/// the smallest index. Normwise has no index and returns 0.
inline index_t select_index(const MatrixHandle& m, Selector s) {
    if (s == Selector::Normwise) return 0;
    if (s == Selector::First) return 1;
    const std::vector<double> d = diag(m);
    index_t best = 0;
    for (index_t i = 1; i < m.dim(); ++i) {
        const bool better = s == Selector::ArgmaxDiag ? std::abs(d[i]) > std::abs(d[best])
                                                      : std::abs(d[i]) < std::abs(d[best]);
        if (better) best = i;
    }
    return best + 1;
}

struct ExperimentSpec {
    std::string matrix_source;                                    // gauss:D | uniform:D | mm:PATH
    std::vector<std::uint64_t> grid{10, 50, 100, 250, 500, 750, 1000};
    int repeats = 10;
    std::uint64_t seed = 0;
    double delta = 1.0; // theory curves, expectation level at 1
    std::vector<Selector> selectors{Selector::First, Selector::ArgmaxDiag, Selector::ArgminDiag,
                                    Selector::Normwise};
    int threads = 0;

    void validate() const {
        if (grid.empty()) throw std::invalid_argument("sample-size grid must be nonempty");
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (grid[i] >= grid[i + 1])
                throw std::invalid_argument("sample-size grid must be strictly increasing");
        if (grid.front() == 0) throw std::invalid_argument("sample sizes must be >= 1");
        if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
        if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
        if (selectors.empty()) throw std::invalid_argument("selector list must be nonempty");
    }
};

struct ExperimentRow {
    std::string matrix_id;
    std::string selector;
    std::uint64_t n = 0;
    double emp_rel_err_mean = 0.0;
    double theo_rel_err = 0.0;
    int repeats = 0;
    std::uint64_t seed = 0;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
};

/// Build the matrix named by a source string. gauss:D and uniform:D are
/// seeded generators; mm:PATH reads a Matrix Market file.
inline MatrixHandle make_matrix(const std::string& source, std::uint64_t seed) {
    const auto colon = source.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("matrix source must look like gauss:D, uniform:D or mm:PATH");
    const std::string kind = source.substr(0, colon);
    const std::string arg = source.substr(colon + 1);
    if (kind == "gauss" || kind == "uniform") {
        index_t d = 0;
        try {
            d = static_cast<index_t>(std::stoll(arg));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad dimension in matrix source: " + source);
        }
        return kind == "gauss" ? gen_gaussian(d, seed) : gen_uniform01(d, seed);
    }
    if (kind == "mm") {
        std::ifstream in(arg);
        if (!in) throw std::runtime_error("cannot open matrix file: " + arg);
        return read_matrix_market(in);
    }
    throw std::invalid_argument("unknown matrix source kind: " + kind);
}

inline std::vector<std::uint64_t> parse_grid(const std::string& csv) {
    std::vector<std::uint64_t> grid;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            grid.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad grid entry: " + item);
        }
    }
    return grid;
}

namespace detail {

inline double elementwise_rel_err(double a_pp, double g_p) {
    if (a_pp == 0.0) return std::nan("");
    const double diff = a_pp - g_p;
    return diff * diff / (a_pp * a_pp);
}

inline double theoretical_rel_err(const MatrixHandle& m, Selector s, index_t p, std::uint64_t n,
                                  double delta) {
    try {
        return s == Selector::Normwise ? predicted_rel_err_normwise(m, n, delta)
                                       : predicted_rel_err_elementwise(m, p, n, delta);
    } catch (const DegenerateTargetError&) {
        return std::nan("");
    }
}

inline std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Run the error sweep: for every grid size N, R estimator runs with seeds
/// seed+1..seed+R; each selector reports the mean of its R relative errors
/// next to the theory-module prediction at the requested delta. Rows come out
/// selector-major, N-minor, independent of execution order.
inline ExperimentResult run_experiment(const MatrixHandle& m, const ExperimentSpec& spec) {
    spec.validate();
    const ExplicitQuadFormOracle oracle(m);
    const std::vector<double> a_diag = diag(m);
    const double dsq = diag_norm_sq(m);

    std::vector<index_t> sel_index(spec.selectors.size());
    for (std::size_t s = 0; s < spec.selectors.size(); ++s)
        sel_index[s] = select_index(m, spec.selectors[s]);

    // err_mean[s][gi]
    std::vector<std::vector<double>> err_mean(spec.selectors.size(),
                                              std::vector<double>(spec.grid.size(), 0.0));
    for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
        for (int r = 1; r <= spec.repeats; ++r) {
            const DiagonalEstimate est =
                estimate_diagonal(oracle, spec.grid[gi], spec.seed + r, spec.threads);
            for (std::size_t s = 0; s < spec.selectors.size(); ++s) {
                double err;
                if (spec.selectors[s] == Selector::Normwise) {
                    double num = 0.0;
                    for (index_t i = 0; i < m.dim(); ++i) {
                        const double diff = est.values[i] - a_diag[i];
                        num += diff * diff;
                    }
                    err = dsq == 0.0 ? std::nan("") : num / dsq;
                } else {
                    const index_t p = sel_index[s];
                    err = detail::elementwise_rel_err(a_diag[p - 1], est.values[p - 1]);
                }
                err_mean[s][gi] += err / spec.repeats;
            }
        }
    }

    ExperimentResult result;
    for (std::size_t s = 0; s < spec.selectors.size(); ++s)
        for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
            ExperimentRow row;
            row.matrix_id = spec.matrix_source;
            row.selector = selector_name(spec.selectors[s]);
            row.n = spec.grid[gi];
            row.emp_rel_err_mean = err_mean[s][gi];
            row.theo_rel_err = detail::theoretical_rel_err(m, spec.selectors[s], sel_index[s],
                                                           spec.grid[gi], spec.delta);
            row.repeats = spec.repeats;
            row.seed = spec.seed;
            result.rows.push_back(std::move(row));
        }
    return result;
}

inline std::string to_csv(const ExperimentResult& result) {
    std::string out = "matrix,selector,N,emp_rel_err_mean,theo_rel_err,repeats,seed\n";
    for (const ExperimentRow& row : result.rows) {
        out += row.matrix_id;
        out += ',';
        out += row.selector;
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += detail::format_value(row.emp_rel_err_mean);
        out += ',';
        out += detail::format_value(row.theo_rel_err);
        out += ',';
        out += std::to_string(row.repeats);
        out += ',';
        out += std::to_string(row.seed);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_polyline(const std::vector<std::pair<double, double>>& pts,
                                const std::string& style) {
    if (pts.empty()) return "";
    std::string s = "  <polyline fill=\"none\" " + style + " points=\"";
    for (const auto& [x, y] : pts) s += svg_num(x) + "," + svg_num(y) + " ";
    s += "\"/>\n";
    return s;
}

} // namespace detail

/// Minimal log-log line chart for one selector: empirical and theoretical
/// relative error against N. Nonpositive or NaN values are skipped.
inline std::string selector_svg(const ExperimentResult& result, const std::string& selector) {
    constexpr double width = 640, height = 480;
    constexpr double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    std::vector<std::pair<double, double>> emp, theo; // (log10 N, log10 err)
    std::string matrix_id;
    for (const ExperimentRow& row : result.rows) {
        if (row.selector != selector) continue;
        matrix_id = row.matrix_id;
        const double lx = std::log10(static_cast<double>(row.n));
        if (std::isfinite(row.emp_rel_err_mean) && row.emp_rel_err_mean > 0.0)
            emp.emplace_back(lx, std::log10(row.emp_rel_err_mean));
        if (std::isfinite(row.theo_rel_err) && row.theo_rel_err > 0.0)
            theo.emplace_back(lx, std::log10(row.theo_rel_err));
    }

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
                      "viewBox=\"0 0 640 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "  <rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    svg += "  <text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + matrix_id +
           " - " + selector + " relative error</text>\n";
    if (emp.empty() && theo.empty()) {
        svg += "  <text x=\"320\" y=\"240\" text-anchor=\"middle\">no finite data</text>\n";
        svg += "</svg>\n";
        return svg;
    }

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& series : {emp, theo})
        for (const auto& [x, y] : series) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
    const auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * pw; };
    const auto py = [&](double ly) { return mt + (y1 - ly) / (y1 - y0) * ph; };

    // decade gridlines
    for (int k = static_cast<int>(std::ceil(x0)); k <= static_cast<int>(std::floor(x1)); ++k) {
        const double x = px(k);
        svg += "  <line x1=\"" + detail::svg_num(x) + "\" y1=\"" + detail::svg_num(mt) +
               "\" x2=\"" + detail::svg_num(x) + "\" y2=\"" + detail::svg_num(mt + ph) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "  <text x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(mt + ph + 18) +
               "\" text-anchor=\"middle\">1e" + std::to_string(k) + "</text>\n";
    }
    for (int k = static_cast<int>(std::ceil(y0)); k <= static_cast<int>(std::floor(y1)); ++k) {
        const double y = py(k);
        svg += "  <line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(y) +
               "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(y) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "  <text x=\"" + detail::svg_num(ml - 6) + "\" y=\"" + detail::svg_num(y + 4) +
               "\" text-anchor=\"end\">1e" + std::to_string(k) + "</text>\n";
    }
    svg += "  <rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) + "\" width=\"" +
           detail::svg_num(pw) + "\" height=\"" + detail::svg_num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "  <text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" +
           detail::svg_num(height - 10) + "\" text-anchor=\"middle\">sample size N</text>\n";

    std::vector<std::pair<double, double>> emp_px, theo_px;
    for (const auto& [x, y] : emp) emp_px.emplace_back(px(x), py(y));
    for (const auto& [x, y] : theo) theo_px.emplace_back(px(x), py(y));
    svg += detail::svg_polyline(emp_px, "stroke=\"#1f77b4\" stroke-width=\"2\"");
    svg += detail::svg_polyline(theo_px,
                                "stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6,4\"");

    svg += "  <line x1=\"" + detail::svg_num(ml + 10) + "\" y1=\"" + detail::svg_num(mt + 14) +
           "\" x2=\"" + detail::svg_num(ml + 40) + "\" y2=\"" + detail::svg_num(mt + 14) +
           "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
    svg += "  <text x=\"" + detail::svg_num(ml + 46) + "\" y=\"" + detail::svg_num(mt + 18) +
           "\">empirical mean</text>\n";
    svg += "  <line x1=\"" + detail::svg_num(ml + 10) + "\" y1=\"" + detail::svg_num(mt + 32) +
           "\" x2=\"" + detail::svg_num(ml + 40) + "\" y2=\"" + detail::svg_num(mt + 32) +
           "\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
    svg += "  <text x=\"" + detail::svg_num(ml + 46) + "\" y=\"" + detail::svg_num(mt + 36) +
           "\">theory</text>\n";
    svg += "</svg>\n";
    return svg;
}

/// Write results.csv plus one SVG per selector into out_dir.
inline void write_outputs(const ExperimentResult& result, const ExperimentSpec& spec,
                          const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir / "results.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + (out_dir / "results.csv").string());
        csv << to_csv(result);
    }
    for (Selector s : spec.selectors) {
        const std::string name = selector_name(s);
        std::ofstream svg(out_dir / (name + ".svg"), std::ios::binary);
        if (!svg) throw std::runtime_error("cannot write SVG for selector " + name);
        svg << selector_svg(result, name);
    }
}

} // namespace qdiag
