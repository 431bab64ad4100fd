#pragma once

#include <memory>
#include <span>
#include <vector>

namespace crimesim {

/// Compressed-row sparsity structure; column indices ascending per row.
struct SparsityPattern {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;

    std::size_t nnz() const noexcept { return col_idx.size(); }
    /// Position of (i, j) in the value array, or -1 when not stored.
    long find(int i, int j) const;
    /// Position of the diagonal entry of each row (-1 when absent).
    std::vector<long> diagonal_positions() const;
};

struct Triplet {
    int row;
    int col;
    double value;
};

/// CSR matrix. The pattern is shared between matrices assembled on the same
/// mesh so that linear combinations reduce to value-array arithmetic.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::shared_ptr<const SparsityPattern> pattern, std::vector<double> values);
    /// All-zero matrix on the given pattern.
    explicit SparseMatrix(std::shared_ptr<const SparsityPattern> pattern);

    /// Duplicates are summed.
    static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);
    static SparseMatrix identity(int n);
    /// Keeps every entry whose magnitude is nonzero; used by tests.
    static SparseMatrix from_dense(int rows, int cols, std::span<const double> row_major);

    int rows() const noexcept { return pattern_ ? pattern_->rows : 0; }
    int cols() const noexcept { return pattern_ ? pattern_->cols : 0; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const SparsityPattern& pattern() const { return *pattern_; }
    const std::shared_ptr<const SparsityPattern>& shared_pattern() const noexcept { return pattern_; }
    bool same_pattern(const SparseMatrix& other) const noexcept { return pattern_ == other.pattern_; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Entry (i, j); zero when not stored.
    double at(int i, int j) const;
    std::vector<double> to_dense() const;

    /// this += coef * other; patterns must be identical.
    void add_in_place(double coef, const SparseMatrix& other);
    void scale(double coef);

private:
    std::shared_ptr<const SparsityPattern> pattern_;
    std::vector<double> values_;
};

/// y = A x.
std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

struct ScaledTerm {
    double coef;
    const SparseMatrix& matrix;
};

/// Sum of coef_k * M_k over the union sparsity pattern.
SparseMatrix add_scaled(std::span<const ScaledTerm> terms);
SparseMatrix add_scaled(std::initializer_list<ScaledTerm> terms);

}  // namespace crimesim
