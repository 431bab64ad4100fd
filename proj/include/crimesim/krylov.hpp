#pragma once

#include "crimesim/error.hpp"
#include "crimesim/sparse.hpp"

#include <span>
#include <string>
#include <vector>

namespace crimesim {

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;  ///< ||A x - b|| / ||b||, recomputed from x
    bool converged = false;
};

/// Raised when an iterative solve does not reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, SolveReport report) : Error(what), report_(report) {}
    const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

enum class Preconditioner { Jacobi, Ilu0 };

struct SolverOptions {
    double tol = 1e-12;  ///< relative residual target
    int max_iter = -1;   ///< <= 0 selects 10 * n
    Preconditioner preconditioner = Preconditioner::Jacobi;
};

/// Preconditioned BiCGStab. `x` holds the initial guess on entry and the
/// solution on return. Deterministic for given inputs. Throws SolverError
/// when the tolerance is not met within max_iter iterations.
SolveReport solve(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                  const SolverOptions& options = {});

/// Convenience overload starting from x = 0.
std::vector<double> solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& options,
                          SolveReport* report = nullptr);

/// Dense LU with partial pivoting, for oracle use on small systems.
/// `a` is row-major n x n and is overwritten. Throws ParameterError on a
/// numerically singular matrix.
std::vector<double> solve_dense(std::vector<double> a, std::span<const double> b);

}  // namespace crimesim
