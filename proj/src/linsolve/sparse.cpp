#include "crimesim/sparse.hpp"

#include "crimesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crimesim {

long SparsityPattern::find(int i, int j) const {
    const auto begin = col_idx.begin() + row_ptr[i];
    const auto end = col_idx.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return -1;
    return static_cast<long>(it - col_idx.begin());
}

std::vector<long> SparsityPattern::diagonal_positions() const {
    std::vector<long> diag(rows, -1);
    for (int i = 0; i < rows; ++i) diag[i] = find(i, i);
    return diag;
}

SparseMatrix::SparseMatrix(std::shared_ptr<const SparsityPattern> pattern, std::vector<double> values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
    if (!pattern_ || values_.size() != pattern_->nnz())
        throw ParameterError("sparse matrix values do not match pattern");
}

SparseMatrix::SparseMatrix(std::shared_ptr<const SparsityPattern> pattern)
    : pattern_(std::move(pattern)), values_(pattern_ ? pattern_->nnz() : 0, 0.0) {}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> triplets) {
    if (rows < 0 || cols < 0) throw ParameterError("negative matrix dimension");
    std::vector<Triplet> sorted(triplets.begin(), triplets.end());
    for (const Triplet& t : sorted)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw ParameterError("triplet index out of range");
    std::sort(sorted.begin(), sorted.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

    auto pattern = std::make_shared<SparsityPattern>();
    pattern->rows = rows;
    pattern->cols = cols;
    pattern->row_ptr.assign(rows + 1, 0);
    std::vector<double> values;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const Triplet& t = sorted[k];
        if (k > 0 && sorted[k - 1].row == t.row && sorted[k - 1].col == t.col) {
            values.back() += t.value;
            continue;
        }
        pattern->col_idx.push_back(t.col);
        values.push_back(t.value);
        ++pattern->row_ptr[t.row + 1];
    }
    std::partial_sum(pattern->row_ptr.begin(), pattern->row_ptr.end(), pattern->row_ptr.begin());
    return SparseMatrix(std::move(pattern), std::move(values));
}

SparseMatrix SparseMatrix::identity(int n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, t);
}

SparseMatrix SparseMatrix::from_dense(int rows, int cols, std::span<const double> row_major) {
    if (row_major.size() != static_cast<std::size_t>(rows) * cols) throw ParameterError("dense size mismatch");
    std::vector<Triplet> t;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (row_major[static_cast<std::size_t>(i) * cols + j] != 0.0)
                t.push_back({i, j, row_major[static_cast<std::size_t>(i) * cols + j]});
    return from_triplets(rows, cols, t);
}

double SparseMatrix::at(int i, int j) const {
    if (i < 0 || i >= rows() || j < 0 || j >= cols()) throw ParameterError("matrix index out of range");
    const long pos = pattern_->find(i, j);
    return pos < 0 ? 0.0 : values_[pos];
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> dense(static_cast<std::size_t>(rows()) * cols(), 0.0);
    const auto& p = *pattern_;
    for (int i = 0; i < p.rows; ++i)
        for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
            dense[static_cast<std::size_t>(i) * cols() + p.col_idx[k]] = values_[k];
    return dense;
}

void SparseMatrix::add_in_place(double coef, const SparseMatrix& other) {
    if (!same_pattern(other)) throw ParameterError("add_in_place requires identical sparsity patterns");
    const double* src = other.values_.data();
    double* dst = values_.data();
    const std::size_t n = values_.size();
    for (std::size_t k = 0; k < n; ++k) dst[k] += coef * src[k];
}

void SparseMatrix::scale(double coef) {
    for (double& v : values_) v *= coef;
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != static_cast<std::size_t>(a.cols()) || y.size() != static_cast<std::size_t>(a.rows()))
        throw ParameterError("spmv dimension mismatch");
    const auto& p = a.pattern();
    const int* rp = p.row_ptr.data();
    const int* ci = p.col_idx.data();
    const double* v = a.values().data();
    const double* xp = x.data();
    for (int i = 0; i < p.rows; ++i) {
        double sum = 0.0;
        for (int k = rp[i]; k < rp[i + 1]; ++k) sum += v[k] * xp[ci[k]];
        y[i] = sum;
    }
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
    std::vector<double> y(a.rows(), 0.0);
    spmv(a, x, y);
    return y;
}

SparseMatrix add_scaled(std::span<const ScaledTerm> terms) {
    if (terms.empty()) throw ParameterError("add_scaled needs at least one term");
    const int rows = terms[0].matrix.rows();
    const int cols = terms[0].matrix.cols();
    bool shared = true;
    for (const ScaledTerm& t : terms) {
        if (t.matrix.rows() != rows || t.matrix.cols() != cols)
            throw ParameterError("add_scaled dimension mismatch");
        shared = shared && t.matrix.same_pattern(terms[0].matrix);
    }

    if (shared) {
        SparseMatrix out(terms[0].matrix.shared_pattern());
        for (const ScaledTerm& t : terms) out.add_in_place(t.coef, t.matrix);
        return out;
    }

    // Union pattern, merged row by row.
    auto pattern = std::make_shared<SparsityPattern>();
    pattern->rows = rows;
    pattern->cols = cols;
    pattern->row_ptr.assign(rows + 1, 0);
    std::vector<double> values;
    std::vector<int> cols_in_row;
    for (int i = 0; i < rows; ++i) {
        cols_in_row.clear();
        for (const ScaledTerm& t : terms) {
            const auto& p = t.matrix.pattern();
            cols_in_row.insert(cols_in_row.end(), p.col_idx.begin() + p.row_ptr[i], p.col_idx.begin() + p.row_ptr[i + 1]);
        }
        std::sort(cols_in_row.begin(), cols_in_row.end());
        cols_in_row.erase(std::unique(cols_in_row.begin(), cols_in_row.end()), cols_in_row.end());
        const std::size_t base = values.size();
        values.resize(base + cols_in_row.size(), 0.0);
        for (const ScaledTerm& t : terms) {
            const auto& p = t.matrix.pattern();
            auto vals = t.matrix.values();
            std::size_t cursor = 0;
            for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
                while (cols_in_row[cursor] != p.col_idx[k]) ++cursor;
                values[base + cursor] += t.coef * vals[k];
            }
        }
        pattern->col_idx.insert(pattern->col_idx.end(), cols_in_row.begin(), cols_in_row.end());
        pattern->row_ptr[i + 1] = static_cast<int>(pattern->col_idx.size());
    }
    return SparseMatrix(std::move(pattern), std::move(values));
}

SparseMatrix add_scaled(std::initializer_list<ScaledTerm> terms) {
    return add_scaled(std::span<const ScaledTerm>(terms.begin(), terms.size()));
}

}  // namespace crimesim
