#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qdiag/errors.hpp"
#include "qdiag/gaussian.hpp"
#include "qdiag/matrix.hpp"

namespace qdiag {

/// Parsed "%%MatrixMarket" banner. Supported combinations cover the
/// SuiteSparse real collection: coordinate bodies with real/integer/pattern
/// fields and general/symmetric/skew-symmetric symmetry.
struct MatrixMarketHeader {
    std::string object;
    std::string format;
    std::string field;
    std::string symmetry;
};

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

} // namespace detail

inline MatrixMarketHeader parse_matrix_market_banner(const std::string& line) {
    std::istringstream ss(line);
    std::string banner;
    MatrixMarketHeader h;
    ss >> banner >> h.object >> h.format >> h.field >> h.symmetry;
    if (banner != "%%MatrixMarket")
        throw ParseError(1, "missing %%MatrixMarket banner");
    if (!ss)
        throw ParseError(1, "banner needs four tokens: object format field symmetry");
    h.object = detail::lower(h.object);
    h.format = detail::lower(h.format);
    h.field = detail::lower(h.field);
    h.symmetry = detail::lower(h.symmetry);
    if (h.object != "matrix") throw UnsupportedMatrixError("unsupported object: " + h.object);
    if (h.format != "coordinate" && h.format != "array")
        throw ParseError(1, "unknown format: " + h.format);
    if (h.field == "complex") throw UnsupportedMatrixError("complex field is not supported");
    if (h.field != "real" && h.field != "integer" && h.field != "pattern")
        throw ParseError(1, "unknown field: " + h.field);
    if (h.symmetry != "general" && h.symmetry != "symmetric" && h.symmetry != "skew-symmetric" &&
        h.symmetry != "hermitian")
        throw ParseError(1, "unknown symmetry: " + h.symmetry);
    if (h.symmetry == "hermitian")
        throw UnsupportedMatrixError("hermitian symmetry is not supported");
    return h;
}

/// Read a square matrix in Matrix Market coordinate form into a sparse
/// MatrixHandle. Symmetric storage is expanded (off-diagonal (i,j,v) also
/// contributes (j,i,v); skew-symmetric contributes (j,i,-v)), file indices
/// are 1-based, '%' comment lines are skipped, duplicates are summed.
inline MatrixHandle read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(1, "empty stream");
    ++line_no;
    const MatrixMarketHeader header = parse_matrix_market_banner(line);
    if (header.format == "array")
        throw UnsupportedMatrixError("array bodies are not supported; use coordinate");

    // size line: first non-comment, non-blank line
    index_t rows = 0, cols = 0;
    std::int64_t nnz = -1;
    for (;;) {
        if (!std::getline(in, line)) throw ParseError(line_no, "missing size line");
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (detail::is_blank(line)) continue;
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz)) throw ParseError(line_no, "malformed size line");
        break;
    }
    if (rows < 1 || cols < 1) throw ParseError(line_no, "dimensions must be positive");
    if (rows != cols)
        throw UnsupportedMatrixError("matrix must be square, got " + std::to_string(rows) + "x" +
                                     std::to_string(cols));
    if (nnz < 0) throw ParseError(line_no, "entry count must be nonnegative");

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(nnz) * (header.symmetry == "general" ? 1 : 2));
    std::int64_t seen = 0;
    while (seen < nnz) {
        if (!std::getline(in, line))
            throw ParseError(line_no, "expected " + std::to_string(nnz) + " entries, got " +
                                          std::to_string(seen));
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (detail::is_blank(line)) continue;
        std::istringstream ss(line);
        index_t i = 0, j = 0;
        double v = 1.0;
        if (!(ss >> i >> j)) throw ParseError(line_no, "malformed entry");
        if (header.field != "pattern" && !(ss >> v))
            throw ParseError(line_no, "entry is missing its value");
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError(line_no, "entry index out of range");
        entries.push_back({i - 1, j - 1, v});
        if (i != j) {
            if (header.symmetry == "symmetric") entries.push_back({j - 1, i - 1, v});
            if (header.symmetry == "skew-symmetric") entries.push_back({j - 1, i - 1, -v});
        }
        ++seen;
    }
    return MatrixHandle::sparse_from_triplets(rows, std::move(entries));
}

/// Write in coordinate/general form with 17 significant digits, enough for
/// an exact double round-trip.
inline void write_matrix_market(const MatrixHandle& m, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    const MatrixHandle sparse = m.storage() == Storage::Sparse ? m : m.to_sparse();
    out << sparse.dim() << " " << sparse.dim() << " " << sparse.nnz() << "\n";
    char buf[64];
    for (index_t i = 0; i < sparse.dim(); ++i)
        for (index_t k = sparse.row_ptr()[i]; k < sparse.row_ptr()[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", sparse.vals()[k]);
            out << (i + 1) << " " << (sparse.cols()[k] + 1) << " " << buf << "\n";
        }
}

/// Dense d x d matrix with i.i.d. standard-normal entries, deterministic in
/// (d, seed). Entry (i, j) is component i*d + j of a MatrixGen-domain stream.
inline MatrixHandle gen_gaussian(index_t d, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("matrix dimension must be >= 1");
    const GaussianStream stream(seed, SeedDomain::MatrixGen);
    std::vector<double> entries(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    stream.fill(0, entries);
    return MatrixHandle::dense(d, std::move(entries));
}

/// Dense d x d matrix with i.i.d. Uniform[0,1) entries, deterministic in
/// (d, seed).
inline MatrixHandle gen_uniform01(index_t d, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("matrix dimension must be >= 1");
    const std::uint64_t key = detail::mix64(seed ^ static_cast<std::uint64_t>(SeedDomain::MatrixGen) ^
                                            0x756e69666f726d31ull);
    std::vector<double> entries(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < entries.size(); ++k)
        entries[k] = detail::to_unit_half_open(detail::counter_word(key, k));
    return MatrixHandle::dense(d, std::move(entries));
}

} // namespace qdiag
