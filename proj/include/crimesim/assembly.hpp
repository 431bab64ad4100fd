#pragma once

#include "crimesim/element.hpp"
#include "crimesim/mesh.hpp"
#include "crimesim/params.hpp"
#include "crimesim/sparse.hpp"

#include <memory>
#include <span>
#include <vector>

namespace crimesim::fem {

/// Q1 finite element space on a mesh, with the global sparsity pattern, the
/// element-to-CSR scatter map and cached 2x2 Gauss geometry. The mesh must
/// outlive the space.
class FeSpace {
public:
    explicit FeSpace(const Mesh& mesh);

    const Mesh& mesh() const noexcept { return mesh_; }
    std::size_t dofs() const noexcept { return mesh_.node_count(); }
    const std::shared_ptr<const SparsityPattern>& pattern() const noexcept { return pattern_; }

    /// CSR position of local pair (i, j) of element e is slots(e)[4 * i + j].
    std::span<const int> slots(std::size_t e) const { return {slots_.data() + 16 * e, 16}; }

    struct QpData {
        double jxw;             ///< det J times Gauss weight
        double grad[4][2];      ///< physical basis gradients
    };
    /// Cached data at the four points of the default 2x2 rule.
    std::span<const QpData> qp(std::size_t e) const { return {qp_.data() + 4 * e, 4}; }
    /// Basis values at the default rule's points, independent of the element.
    const std::array<std::array<double, 4>, 4>& qp_phi() const noexcept { return phi_; }
    const QuadratureRule& rule() const noexcept { return rule_; }

private:
    const Mesh& mesh_;
    std::shared_ptr<const SparsityPattern> pattern_;
    std::vector<int> slots_;
    std::vector<QpData> qp_;
    std::array<std::array<double, 4>, 4> phi_{};
    QuadratureRule rule_;
};

struct DivergenceOptions {
    double floor = 1e-10;  ///< smallest admissible weight at a quadrature point
    int points = 2;        ///< Gauss points per direction
};

SparseMatrix assemble_mass(const FeSpace& space);
/// Integral of eta grad(phi_j) . grad(phi_i); eta evaluated at quadrature points.
SparseMatrix assemble_stiffness(const FeSpace& space, const Coefficient& eta = 1.0);
/// N(w)_ij = integral of w phi_j phi_i.
SparseMatrix assemble_weighted_mass(const FeSpace& space, std::span<const double> w);
/// D(w)_ij = integral of (2 grad w / w) phi_j . grad phi_i. Throws
/// DegeneracyError when w <= floor at a quadrature point.
SparseMatrix assemble_weighted_divergence(const FeSpace& space, std::span<const double> w,
                                          const DivergenceOptions& options = {});

/// target += scale * N(w).
void add_weighted_mass(const FeSpace& space, std::span<const double> w, double scale, SparseMatrix& target);
/// target += mass_scale * N(w) + div_scale * D(w) in a single element pass.
void add_reaction_advection(const FeSpace& space, std::span<const double> w, double mass_scale, double div_scale,
                            SparseMatrix& target, const DivergenceOptions& options = {});

/// Derivative of D(A) rho with respect to the nodal values of A:
/// G_ij = integral of 2 rho (grad phi_j / A - phi_j grad A / A^2) . grad phi_i.
SparseMatrix assemble_divergence_jacobian(const FeSpace& space, std::span<const double> a,
                                          std::span<const double> rho, const DivergenceOptions& options = {});

/// Load vector: integral of f phi_i.
std::vector<double> load_vector(const FeSpace& space, const Coefficient& f);

/// Right-hand side of the attractiveness system,
///   b_i = int A_st phi_i + int eta grad A_st . grad phi_i + (1/dt) (M A_prev)_i.
/// The gradient term vanishes for constant A_st; nodal A_st uses the H1 form
/// with the boundary flux of A_st taken as zero.
std::vector<double> assemble_rhs_A(const FeSpace& space, const Coefficient& a_st, const Coefficient& eta,
                                   std::span<const double> a_prev, double dt, const SparseMatrix& mass);

/// Right-hand side of the density system: int source phi_i + (1/dt) (M rho_prev)_i.
std::vector<double> assemble_rhs_rho(const FeSpace& space, const Coefficient& source,
                                     std::span<const double> rho_prev, double dt, const SparseMatrix& mass);

/// Value of a coefficient at quadrature point q of element e (default rule).
double coefficient_at(const FeSpace& space, const Coefficient& c, std::size_t e, int q);

}  // namespace crimesim::fem
