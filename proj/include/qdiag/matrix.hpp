#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qdiag {

using index_t = std::int64_t;

enum class Storage { Dense, Sparse };

/// One explicit entry of a sparse matrix, 0-based indices.
struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Immutable square real matrix, dense row-major or sparse CSR.
///
/// Both storages expose the same value semantics: entry() answers any (i,j),
/// and every operation below produces the same result (up to roundoff) on
/// either representation. Duplicate triplets are summed at construction, so
/// sparse storage never holds two entries for one position.
class MatrixHandle {
public:
    static MatrixHandle dense(index_t dim, std::vector<double> row_major) {
        check_dim(dim);
        if (row_major.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
            throw std::invalid_argument("dense storage needs dim*dim entries");
        MatrixHandle m(dim, Storage::Dense);
        m.dense_ = std::move(row_major);
        return m;
    }

    static MatrixHandle dense_zero(index_t dim) {
        check_dim(dim);
        MatrixHandle m(dim, Storage::Dense);
        m.dense_.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0);
        return m;
    }

    static MatrixHandle sparse_from_triplets(index_t dim, std::vector<Triplet> entries) {
        check_dim(dim);
        for (const Triplet& t : entries) {
            if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim)
                throw std::invalid_argument("triplet index out of range");
        }
        MatrixHandle m(dim, Storage::Sparse);
        m.build_csr(std::move(entries));
        return m;
    }

    index_t dim() const noexcept { return dim_; }
    Storage storage() const noexcept { return storage_; }

    index_t nnz() const noexcept {
        return storage_ == Storage::Sparse ? static_cast<index_t>(vals_.size()) : dim_ * dim_;
    }

    /// Value at (i, j), 0-based. Sparse lookup is a binary search in row i.
    double entry(index_t i, index_t j) const {
        if (i < 0 || i >= dim_ || j < 0 || j >= dim_)
            throw std::invalid_argument("entry index out of range");
        if (storage_ == Storage::Dense) return dense_[static_cast<std::size_t>(i) * dim_ + j];
        const auto first = cols_.begin() + row_ptr_[i];
        const auto last = cols_.begin() + row_ptr_[i + 1];
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return vals_[static_cast<std::size_t>(it - cols_.begin())];
    }

    MatrixHandle to_dense() const {
        if (storage_ == Storage::Dense) return *this;
        MatrixHandle m = dense_zero(dim_);
        for (index_t i = 0; i < dim_; ++i)
            for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                m.dense_[static_cast<std::size_t>(i) * dim_ + cols_[k]] = vals_[k];
        return m;
    }

    MatrixHandle to_sparse() const {
        if (storage_ == Storage::Sparse) return *this;
        std::vector<Triplet> ts;
        for (index_t i = 0; i < dim_; ++i)
            for (index_t j = 0; j < dim_; ++j) {
                const double v = dense_[static_cast<std::size_t>(i) * dim_ + j];
                if (v != 0.0) ts.push_back({i, j, v});
            }
        return sparse_from_triplets(dim_, std::move(ts));
    }

    // Raw CSR views (sparse storage only); used by the operation kernels.
    std::span<const index_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const index_t> cols() const noexcept { return cols_; }
    std::span<const double> vals() const noexcept { return vals_; }
    std::span<const double> dense_data() const noexcept { return dense_; }

private:
    MatrixHandle(index_t dim, Storage storage) : dim_(dim), storage_(storage) {}

    static void check_dim(index_t dim) {
        if (dim < 1) throw std::invalid_argument("matrix dimension must be >= 1");
    }

    void build_csr(std::vector<Triplet> entries) {
        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        row_ptr_.assign(static_cast<std::size_t>(dim_) + 1, 0);
        cols_.clear();
        vals_.clear();
        cols_.reserve(entries.size());
        vals_.reserve(entries.size());
        for (std::size_t k = 0; k < entries.size();) {
            const index_t i = entries[k].row, j = entries[k].col;
            double v = 0.0;
            for (; k < entries.size() && entries[k].row == i && entries[k].col == j; ++k)
                v += entries[k].value; // duplicates summed
            cols_.push_back(j);
            vals_.push_back(v);
            ++row_ptr_[i + 1];
        }
        for (index_t i = 0; i < dim_; ++i) row_ptr_[i + 1] += row_ptr_[i];
    }

    index_t dim_;
    Storage storage_;
    std::vector<double> dense_;
    std::vector<index_t> row_ptr_;
    std::vector<index_t> cols_;
    std::vector<double> vals_;
};

namespace detail {

inline void check_vector_dim(const MatrixHandle& m, std::span<const double> u) {
    if (static_cast<index_t>(u.size()) != m.dim())
        throw std::invalid_argument("vector length " + std::to_string(u.size()) +
                                    " does not match matrix dimension " + std::to_string(m.dim()));
}

inline index_t to_internal_index(const MatrixHandle& m, index_t p_one_based) {
    if (p_one_based < 1 || p_one_based > m.dim())
        throw std::invalid_argument("index p must lie in 1.." + std::to_string(m.dim()));
    return p_one_based - 1;
}

/// CSR of the transpose; counting sort, O(nnz).
struct TransposeCsr {
    std::vector<index_t> row_ptr, cols;
    std::vector<double> vals;

    explicit TransposeCsr(const MatrixHandle& m) {
        const index_t d = m.dim();
        row_ptr.assign(static_cast<std::size_t>(d) + 1, 0);
        cols.resize(m.vals().size());
        vals.resize(m.vals().size());
        for (index_t c : m.cols()) ++row_ptr[c + 1];
        for (index_t i = 0; i < d; ++i) row_ptr[i + 1] += row_ptr[i];
        std::vector<index_t> cursor(row_ptr.begin(), row_ptr.end() - 1);
        for (index_t i = 0; i < d; ++i)
            for (index_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
                const index_t pos = cursor[m.cols()[k]]++;
                cols[pos] = i;
                vals[pos] = m.vals()[k];
            }
    }
};

/// Merge row p of A with row p of A^T (= column p of A) and fold
/// f(col, a_pj + a_jp) over the union of their supports.
template <typename Fn>
void for_each_cross_entry(const MatrixHandle& m, const TransposeCsr& t, index_t p, Fn&& f) {
    index_t ka = m.row_ptr()[p], ea = m.row_ptr()[p + 1];
    index_t kt = t.row_ptr[p], et = t.row_ptr[p + 1];
    while (ka < ea || kt < et) {
        const index_t ca = ka < ea ? m.cols()[ka] : m.dim();
        const index_t ct = kt < et ? t.cols[kt] : m.dim();
        if (ca < ct) {
            f(ca, m.vals()[ka]);
            ++ka;
        } else if (ct < ca) {
            f(ct, t.vals[kt]);
            ++kt;
        } else {
            f(ca, m.vals()[ka] + t.vals[kt]);
            ++ka;
            ++kt;
        }
    }
}

} // namespace detail

/// u^T A u. O(d^2) dense, O(nnz) sparse.
inline double quad_form(const MatrixHandle& m, std::span<const double> u) {
    detail::check_vector_dim(m, u);
    const index_t d = m.dim();
    double acc = 0.0;
    if (m.storage() == Storage::Dense) {
        const double* a = m.dense_data().data();
        for (index_t i = 0; i < d; ++i) {
            double row = 0.0;
            const double* ai = a + static_cast<std::size_t>(i) * d;
            for (index_t j = 0; j < d; ++j) row += ai[j] * u[j];
            acc += u[i] * row;
        }
    } else {
        for (index_t i = 0; i < d; ++i) {
            double row = 0.0;
            for (index_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k)
                row += m.vals()[k] * u[m.cols()[k]];
            acc += u[i] * row;
        }
    }
    return acc;
}

/// A u.
inline std::vector<double> mat_vec(const MatrixHandle& m, std::span<const double> u) {
    detail::check_vector_dim(m, u);
    const index_t d = m.dim();
    std::vector<double> out(static_cast<std::size_t>(d), 0.0);
    if (m.storage() == Storage::Dense) {
        const double* a = m.dense_data().data();
        for (index_t i = 0; i < d; ++i) {
            double row = 0.0;
            const double* ai = a + static_cast<std::size_t>(i) * d;
            for (index_t j = 0; j < d; ++j) row += ai[j] * u[j];
            out[i] = row;
        }
    } else {
        for (index_t i = 0; i < d; ++i) {
            double row = 0.0;
            for (index_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k)
                row += m.vals()[k] * u[m.cols()[k]];
            out[i] = row;
        }
    }
    return out;
}

inline std::vector<double> diag(const MatrixHandle& m) {
    std::vector<double> out(static_cast<std::size_t>(m.dim()), 0.0);
    if (m.storage() == Storage::Dense) {
        for (index_t i = 0; i < m.dim(); ++i)
            out[i] = m.dense_data()[static_cast<std::size_t>(i) * m.dim() + i];
    } else {
        for (index_t i = 0; i < m.dim(); ++i)
            for (index_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k)
                if (m.cols()[k] == i) out[i] += m.vals()[k];
    }
    return out;
}

inline double trace(const MatrixHandle& m) {
    double acc = 0.0;
    for (double v : diag(m)) acc += v;
    return acc;
}

/// Sum of squared diagonal entries.
inline double diag_norm_sq(const MatrixHandle& m) {
    double acc = 0.0;
    for (double v : diag(m)) acc += v * v;
    return acc;
}

/// Squared Frobenius norm of A + A^T: sum over (i,j) of (A_ij + A_ji)^2.
inline double sym_frobenius_sq(const MatrixHandle& m) {
    const index_t d = m.dim();
    double acc = 0.0;
    if (m.storage() == Storage::Dense) {
        const double* a = m.dense_data().data();
        for (index_t i = 0; i < d; ++i)
            for (index_t j = 0; j < d; ++j) {
                const double s = a[static_cast<std::size_t>(i) * d + j] +
                                 a[static_cast<std::size_t>(j) * d + i];
                acc += s * s;
            }
    } else {
        const detail::TransposeCsr t(m);
        for (index_t p = 0; p < d; ++p)
            detail::for_each_cross_entry(m, t, p, [&](index_t, double s) { acc += s * s; });
    }
    return acc;
}

/// Squared norm of (row p of A) + (column p of A), p 1-based.
inline double cross_norm_sq(const MatrixHandle& m, index_t p) {
    const index_t pi = detail::to_internal_index(m, p);
    const index_t d = m.dim();
    double acc = 0.0;
    if (m.storage() == Storage::Dense) {
        const double* a = m.dense_data().data();
        for (index_t i = 0; i < d; ++i) {
            const double s = a[static_cast<std::size_t>(pi) * d + i] +
                             a[static_cast<std::size_t>(i) * d + pi];
            acc += s * s;
        }
    } else {
        const detail::TransposeCsr t(m);
        detail::for_each_cross_entry(m, t, pi, [&](index_t, double s) { acc += s * s; });
    }
    return acc;
}

/// cross_norm_sq for every p in one O(nnz) sweep (0-based vector output,
/// element k holds the value for p = k+1).
inline std::vector<double> cross_norm_sq_profile(const MatrixHandle& m) {
    const index_t d = m.dim();
    std::vector<double> out(static_cast<std::size_t>(d), 0.0);
    if (m.storage() == Storage::Dense) {
        for (index_t p = 1; p <= d; ++p) out[p - 1] = cross_norm_sq(m, p);
    } else {
        const detail::TransposeCsr t(m);
        for (index_t p = 0; p < d; ++p)
            detail::for_each_cross_entry(m, t, p, [&](index_t, double s) { out[p] += s * s; });
    }
    return out;
}

/// Squared norm of row p, p 1-based.
inline double row_norm_sq(const MatrixHandle& m, index_t p) {
    const index_t pi = detail::to_internal_index(m, p);
    double acc = 0.0;
    if (m.storage() == Storage::Dense) {
        const double* row = m.dense_data().data() + static_cast<std::size_t>(pi) * m.dim();
        for (index_t j = 0; j < m.dim(); ++j) acc += row[j] * row[j];
    } else {
        for (index_t k = m.row_ptr()[pi]; k < m.row_ptr()[pi + 1]; ++k)
            acc += m.vals()[k] * m.vals()[k];
    }
    return acc;
}

} // namespace qdiag
