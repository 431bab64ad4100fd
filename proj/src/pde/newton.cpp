#include "crimesim/pde.hpp"

#include <cmath>
#include <string>

namespace crimesim::pde {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Adds coef * block into the n x n sub-block at (r0, c0) of a row-major 2n x 2n matrix.
void add_block(std::vector<double>& dense, std::size_t n2, std::size_t r0, std::size_t c0, double coef,
               const SparseMatrix& block) {
    const auto& pat = block.pattern();
    const auto v = block.values();
    for (int i = 0; i < pat.rows; ++i)
        for (int p = pat.row_ptr[i]; p < pat.row_ptr[i + 1]; ++p)
            dense[(r0 + i) * n2 + c0 + pat.col_idx[p]] += coef * v[p];
}

}  // namespace

NewtonReport Stepper::step_newton(PdeState& state) const {
    check_state(state);
    const std::size_t n = mesh_.node_count();
    if (n > 2000) throw ParameterError("monolithic Newton is limited to meshes of at most 2000 nodes");
    constexpr int max_iters = 50;

    const auto b_attr = attractiveness_rhs(state.A.values());
    const auto b_density = density_rhs(state.rho.values());
    std::vector<double> b_all(b_attr);
    b_all.insert(b_all.end(), b_density.begin(), b_density.end());
    const double target = 1e-12 * std::max(1.0, norm2(b_all));

    std::vector<double> a(state.A.values().begin(), state.A.values().end());
    std::vector<double> rho(state.rho.values().begin(), state.rho.values().end());
    const fem::DivergenceOptions div{config_.a_floor, 2};
    NewtonReport report;

    for (int it = 0;; ++it) {
        const SparseMatrix s1 = attractiveness_matrix(rho);
        const SparseMatrix s2 = density_matrix(a);
        std::vector<double> r(2 * n);
        const auto r_a = spmv(s1, a);
        const auto r_rho = spmv(s2, rho);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = r_a[i] - b_attr[i];
            r[n + i] = r_rho[i] - b_density[i];
        }
        const double rn = norm2(r);
        report.residual_norms.push_back(rn);
        if (!std::isfinite(rn)) {
            StepStats st;
            st.fixed_point_iters = it;
            throw ConvergenceError("Newton residual became non-finite", st);
        }
        if (rn < target) break;
        if (it == max_iters) {
            StepStats st;
            st.fixed_point_iters = it;
            throw ConvergenceError("Newton iteration did not converge in " + std::to_string(max_iters) +
                                       " iterations (residual " + std::to_string(rn) + ")",
                                   st);
        }

        const std::size_t n2 = 2 * n;
        std::vector<double> jac(n2 * n2, 0.0);
        add_block(jac, n2, 0, 0, 1.0, s1);
        add_block(jac, n2, 0, n, -1.0, fem::assemble_weighted_mass(space_, a));
        add_block(jac, n2, n, n, 1.0, s2);
        add_block(jac, n2, n, 0, 1.0, fem::assemble_weighted_mass(space_, rho));
        add_block(jac, n2, n, 0, -1.0, fem::assemble_divergence_jacobian(space_, a, rho, div));

        const auto delta = solve_dense(std::move(jac), r);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] -= delta[i];
            rho[i] -= delta[n + i];
        }
        report.iterations = it + 1;
    }

    StepStats stats;
    stats.fixed_point_iters = report.iterations;
    finish_step(state, std::move(a), std::move(rho), stats);
    return report;
}

}  // namespace crimesim::pde
