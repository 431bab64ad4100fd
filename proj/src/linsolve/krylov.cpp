#include "crimesim/krylov.hpp"

#include <cmath>
#include <cstring>

namespace crimesim {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

class JacobiPreconditioner {
public:
    explicit JacobiPreconditioner(const SparseMatrix& a) : inv_diag_(a.rows(), 1.0) {
        const auto diag = a.pattern().diagonal_positions();
        auto vals = a.values();
        for (int i = 0; i < a.rows(); ++i) {
            const double d = diag[i] >= 0 ? vals[diag[i]] : 0.0;
            inv_diag_[i] = d != 0.0 ? 1.0 / d : 1.0;
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const {
        const std::size_t n = r.size();
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
    }

private:
    std::vector<double> inv_diag_;
};

/// Incomplete LU factorization with the sparsity of the matrix itself.
class Ilu0Preconditioner {
public:
    explicit Ilu0Preconditioner(const SparseMatrix& a)
        : p_(a.pattern()), lu_(a.values().begin(), a.values().end()), diag_(p_.diagonal_positions()) {
        const int n = p_.rows;
        std::vector<long> marker(n, -1);
        for (int i = 0; i < n; ++i) {
            if (diag_[i] < 0) throw ParameterError("ILU(0) requires a stored diagonal");
            for (int k = p_.row_ptr[i]; k < p_.row_ptr[i + 1]; ++k) marker[p_.col_idx[k]] = k;
            for (int k = p_.row_ptr[i]; k < diag_[i]; ++k) {
                const int col = p_.col_idx[k];
                const double pivot = lu_[diag_[col]];
                if (pivot == 0.0) throw ParameterError("zero pivot in ILU(0)");
                lu_[k] /= pivot;
                const double lik = lu_[k];
                for (long m = diag_[col] + 1; m < p_.row_ptr[col + 1]; ++m) {
                    const long pos = marker[p_.col_idx[m]];
                    if (pos >= 0) lu_[pos] -= lik * lu_[m];
                }
            }
            for (int k = p_.row_ptr[i]; k < p_.row_ptr[i + 1]; ++k) marker[p_.col_idx[k]] = -1;
            if (lu_[diag_[i]] == 0.0) throw ParameterError("zero pivot in ILU(0)");
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const {
        const int n = p_.rows;
        const int* rp = p_.row_ptr.data();
        const int* ci = p_.col_idx.data();
        const double* lu = lu_.data();
        for (int i = 0; i < n; ++i) {
            double sum = r[i];
            for (long k = rp[i]; k < diag_[i]; ++k) sum -= lu[k] * z[ci[k]];
            z[i] = sum;
        }
        for (int i = n - 1; i >= 0; --i) {
            double sum = z[i];
            for (long k = diag_[i] + 1; k < rp[i + 1]; ++k) sum -= lu[k] * z[ci[k]];
            z[i] = sum / lu[diag_[i]];
        }
    }

private:
    const SparsityPattern& p_;
    std::vector<double> lu_;
    std::vector<long> diag_;
};

template <typename Precond>
SolveReport bicgstab(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const Precond& precond, double tol, int max_iter) {
    const std::size_t n = b.size();
    SolveReport report;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        report.converged = true;
        return report;
    }
    const double target = tol * bnorm;

    std::vector<double> r(n), rhat(n), p(n), v(n), phat(n), s(n), shat(n), t(n);
    auto true_residual = [&]() {
        spmv(a, x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return norm2(r);
    };

    double rnorm = true_residual();
    report.final_residual = rnorm / bnorm;
    if (rnorm <= target) {
        report.converged = true;
        return report;
    }

    int it = 0;
    while (it < max_iter) {
        // (Re)start from the current true residual.
        std::memcpy(rhat.data(), r.data(), n * sizeof(double));
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        bool restart = false;

        while (it < max_iter && !restart) {
            ++it;
            const double rho_new = dot(rhat, r);
            if (rho_new == 0.0 || !std::isfinite(rho_new)) {
                restart = true;
                break;
            }
            const double beta = (rho_new / rho) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
            precond.apply(p, phat);
            spmv(a, phat, v);
            const double rv = dot(rhat, v);
            if (rv == 0.0 || !std::isfinite(rv)) {
                restart = true;
                break;
            }
            alpha = rho_new / rv;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            if (norm2(s) <= target) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
                rnorm = true_residual();
                if (rnorm <= target) {
                    report = {it, rnorm / bnorm, true};
                    return report;
                }
                restart = true;
                break;
            }
            precond.apply(s, shat);
            spmv(a, shat, t);
            const double tt = dot(t, t);
            omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t[i];
            }
            rho = rho_new;
            if (omega == 0.0 || !std::isfinite(omega)) {
                restart = true;
                break;
            }
            if (norm2(r) <= target) {
                rnorm = true_residual();
                if (rnorm <= target) {
                    report = {it, rnorm / bnorm, true};
                    return report;
                }
                restart = true;
            }
        }
        rnorm = true_residual();
        report.final_residual = rnorm / bnorm;
        if (!std::isfinite(rnorm)) break;
        if (rnorm <= target) {
            report = {it, rnorm / bnorm, true};
            return report;
        }
    }
    report.iterations = it;
    report.final_residual = true_residual() / bnorm;
    report.converged = false;
    return report;
}

}  // namespace

SolveReport solve(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                  const SolverOptions& options) {
    if (a.rows() != a.cols()) throw ParameterError("solve requires a square matrix");
    if (b.size() != static_cast<std::size_t>(a.rows())) throw ParameterError("solve dimension mismatch");
    for (double v : b)
        if (!std::isfinite(v)) throw ParameterError("right-hand side is not finite");
    if (x.size() != b.size()) x.assign(b.size(), 0.0);

    const int max_iter = options.max_iter > 0 ? options.max_iter : 10 * a.rows();
    SolveReport report;
    if (options.preconditioner == Preconditioner::Ilu0) {
        Ilu0Preconditioner pc(a);
        report = bicgstab(a, b, x, pc, options.tol, max_iter);
    } else {
        JacobiPreconditioner pc(a);
        report = bicgstab(a, b, x, pc, options.tol, max_iter);
    }
    if (!report.converged)
        throw SolverError("BiCGStab did not converge in " + std::to_string(report.iterations) +
                              " iterations (relative residual " + std::to_string(report.final_residual) + ")",
                          report);
    return report;
}

std::vector<double> solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& options,
                          SolveReport* report) {
    std::vector<double> x(b.size(), 0.0);
    const SolveReport r = solve(a, b, x, options);
    if (report) *report = r;
    return x;
}

}  // namespace crimesim
