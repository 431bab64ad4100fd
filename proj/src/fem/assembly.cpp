#include "crimesim/assembly.hpp"

#include "crimesim/error.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <string>

namespace crimesim::fem {

namespace {

void check_nodal(const FeSpace& space, std::span<const double> w, const char* name) {
    if (w.size() != space.dofs())
        throw ParameterError(std::string(name) + " has " + std::to_string(w.size()) + " values, mesh has " +
                             std::to_string(space.dofs()) + " nodes");
}

void check_coefficient(const FeSpace& space, const Coefficient& c, const char* name) {
    if (c.kind() == Coefficient::Kind::Nodal && c.values().size() != space.dofs())
        throw ParameterError(std::string(name) + ": nodal coefficient length does not match mesh");
    if (c.kind() == Coefficient::Kind::Cellwise && c.values().size() != space.mesh().quad_count())
        throw ParameterError(std::string(name) + ": cellwise coefficient length does not match mesh");
}

void scatter(const FeSpace& space, std::size_t e, const double (&local)[4][4], double scale, std::span<double> values) {
    const auto slots = space.slots(e);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) values[slots[4 * i + j]] += scale * local[i][j];
}

[[noreturn]] void degenerate(std::size_t e, double value, double floor) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "attractiveness %g at a quadrature point of element %zu is not above the floor %g",
                  value, e, floor);
    throw DegeneracyError(buf, e);
}

}  // namespace

FeSpace::FeSpace(const Mesh& mesh) : mesh_(mesh), rule_(QuadratureRule::gauss(2)) {
    const std::size_t n = mesh.node_count();
    auto pattern = std::make_shared<SparsityPattern>();
    pattern->rows = pattern->cols = static_cast<int>(n);
    pattern->row_ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
        pattern->row_ptr[i + 1] = pattern->row_ptr[i] + static_cast<int>(mesh.adjacency(i).size()) + 1;
    pattern->col_idx.resize(pattern->row_ptr.back());
    for (std::size_t i = 0; i < n; ++i) {
        auto adj = mesh.adjacency(i);
        int* out = pattern->col_idx.data() + pattern->row_ptr[i];
        // Adjacency is sorted; splice the diagonal in.
        auto split = std::lower_bound(adj.begin(), adj.end(), static_cast<int>(i));
        out = std::copy(adj.begin(), split, out);
        *out++ = static_cast<int>(i);
        std::copy(split, adj.end(), out);
    }

    slots_.resize(16 * mesh.quad_count());
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const Quad& q = mesh.quad(e);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) slots_[16 * e + 4 * i + j] = static_cast<int>(pattern->find(q[i], q[j]));
    }
    pattern_ = std::move(pattern);

    for (int qp = 0; qp < 4; ++qp) phi_[qp] = shape_values(rule_.points[qp][0], rule_.points[qp][1]);
    qp_.resize(4 * mesh.quad_count());
    for (std::size_t e = 0; e < mesh.quad_count(); ++e)
        for (int qp = 0; qp < 4; ++qp) {
            const auto geo = map_reference_point(mesh, e, rule_.points[qp][0], rule_.points[qp][1]);
            QpData& d = qp_[4 * e + qp];
            d.jxw = geo.det_j * rule_.weights[qp];
            for (int k = 0; k < 4; ++k) {
                d.grad[k][0] = geo.grad[k][0];
                d.grad[k][1] = geo.grad[k][1];
            }
        }
}

double coefficient_at(const FeSpace& space, const Coefficient& c, std::size_t e, int q) {
    switch (c.kind()) {
        case Coefficient::Kind::Constant: return c.value();
        case Coefficient::Kind::Cellwise: return c.values()[e];
        case Coefficient::Kind::Nodal: {
            const Quad& quad = space.mesh().quad(e);
            const auto& phi = space.qp_phi()[q];
            const auto v = c.values();
            return phi[0] * v[quad[0]] + phi[1] * v[quad[1]] + phi[2] * v[quad[2]] + phi[3] * v[quad[3]];
        }
    }
    return 0.0;
}

SparseMatrix assemble_mass(const FeSpace& space) {
    SparseMatrix m(space.pattern());
    auto values = m.values();
    for (std::size_t e = 0; e < space.mesh().quad_count(); ++e) {
        double local[4][4] = {};
        const auto qp = space.qp(e);
        for (int q = 0; q < 4; ++q) {
            const auto& phi = space.qp_phi()[q];
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) local[i][j] += qp[q].jxw * phi[i] * phi[j];
        }
        scatter(space, e, local, 1.0, values);
    }
    return m;
}

SparseMatrix assemble_stiffness(const FeSpace& space, const Coefficient& eta) {
    check_coefficient(space, eta, "eta");
    SparseMatrix k(space.pattern());
    auto values = k.values();
    for (std::size_t e = 0; e < space.mesh().quad_count(); ++e) {
        double local[4][4] = {};
        const auto qp = space.qp(e);
        for (int q = 0; q < 4; ++q) {
            const double c = coefficient_at(space, eta, e, q);
            if (c < 0.0) throw ParameterError("negative eta at a quadrature point of element " + std::to_string(e));
            const auto& g = qp[q].grad;
            const double f = c * qp[q].jxw;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) local[i][j] += f * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
        scatter(space, e, local, 1.0, values);
    }
    return k;
}

void add_weighted_mass(const FeSpace& space, std::span<const double> w, double scale, SparseMatrix& target) {
    check_nodal(space, w, "weight");
    if (target.shared_pattern() != space.pattern()) throw ParameterError("target matrix not on this space's pattern");
    auto values = target.values();
    const auto& mesh = space.mesh();
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const Quad& quad = mesh.quad(e);
        const double wn[4] = {w[quad[0]], w[quad[1]], w[quad[2]], w[quad[3]]};
        double local[4][4] = {};
        const auto qp = space.qp(e);
        for (int q = 0; q < 4; ++q) {
            const auto& phi = space.qp_phi()[q];
            const double wq = phi[0] * wn[0] + phi[1] * wn[1] + phi[2] * wn[2] + phi[3] * wn[3];
            const double f = wq * qp[q].jxw;
            for (int i = 0; i < 4; ++i) {
                const double fi = f * phi[i];
                for (int j = 0; j < 4; ++j) local[i][j] += fi * phi[j];
            }
        }
        scatter(space, e, local, scale, values);
    }
}

SparseMatrix assemble_weighted_mass(const FeSpace& space, std::span<const double> w) {
    SparseMatrix n(space.pattern());
    add_weighted_mass(space, w, 1.0, n);
    return n;
}

namespace {

// Weighted divergence with a rule other than the cached 2x2 one.
void add_divergence_general(const FeSpace& space, std::span<const double> w, double mass_scale, double div_scale,
                            SparseMatrix& target, const DivergenceOptions& options) {
    const auto rule = QuadratureRule::gauss(options.points);
    auto values = target.values();
    const auto& mesh = space.mesh();
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const Quad& quad = mesh.quad(e);
        double local[4][4] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto geo = map_reference_point(mesh, e, rule.points[q][0], rule.points[q][1]);
            const double jxw = geo.det_j * rule.weights[q];
            double wq = 0.0, gx = 0.0, gy = 0.0;
            for (int k = 0; k < 4; ++k) {
                wq += geo.phi[k] * w[quad[k]];
                gx += geo.grad[k][0] * w[quad[k]];
                gy += geo.grad[k][1] * w[quad[k]];
            }
            if (div_scale != 0.0 && !(wq > options.floor)) degenerate(e, wq, options.floor);
            const double ax = div_scale != 0.0 ? div_scale * 2.0 * gx / wq * jxw : 0.0;
            const double ay = div_scale != 0.0 ? div_scale * 2.0 * gy / wq * jxw : 0.0;
            const double m = mass_scale * wq * jxw;
            for (int i = 0; i < 4; ++i) {
                const double adv = ax * geo.grad[i][0] + ay * geo.grad[i][1];
                for (int j = 0; j < 4; ++j) local[i][j] += geo.phi[j] * (adv + m * geo.phi[i]);
            }
        }
        scatter(space, e, local, 1.0, values);
    }
}

}  // namespace

void add_reaction_advection(const FeSpace& space, std::span<const double> w, double mass_scale, double div_scale,
                            SparseMatrix& target, const DivergenceOptions& options) {
    check_nodal(space, w, "weight");
    if (target.shared_pattern() != space.pattern()) throw ParameterError("target matrix not on this space's pattern");
    if (options.points != 2) {
        add_divergence_general(space, w, mass_scale, div_scale, target, options);
        return;
    }
    auto values = target.values();
    const auto& mesh = space.mesh();
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const Quad& quad = mesh.quad(e);
        const double wn[4] = {w[quad[0]], w[quad[1]], w[quad[2]], w[quad[3]]};
        double local[4][4] = {};
        const auto qp = space.qp(e);
        for (int q = 0; q < 4; ++q) {
            const auto& phi = space.qp_phi()[q];
            const auto& g = qp[q].grad;
            const double wq = phi[0] * wn[0] + phi[1] * wn[1] + phi[2] * wn[2] + phi[3] * wn[3];
            const double gx = g[0][0] * wn[0] + g[1][0] * wn[1] + g[2][0] * wn[2] + g[3][0] * wn[3];
            const double gy = g[0][1] * wn[0] + g[1][1] * wn[1] + g[2][1] * wn[2] + g[3][1] * wn[3];
            double ax = 0.0, ay = 0.0;
            if (div_scale != 0.0) {
                if (!(wq > options.floor)) degenerate(e, wq, options.floor);
                const double f = div_scale * 2.0 * qp[q].jxw / wq;
                ax = f * gx;
                ay = f * gy;
            }
            const double m = mass_scale * wq * qp[q].jxw;
            for (int i = 0; i < 4; ++i) {
                const double row = ax * g[i][0] + ay * g[i][1] + m * phi[i];
                for (int j = 0; j < 4; ++j) local[i][j] += row * phi[j];
            }
        }
        scatter(space, e, local, 1.0, values);
    }
}

SparseMatrix assemble_weighted_divergence(const FeSpace& space, std::span<const double> w,
                                          const DivergenceOptions& options) {
    SparseMatrix d(space.pattern());
    add_reaction_advection(space, w, 0.0, 1.0, d, options);
    return d;
}

SparseMatrix assemble_divergence_jacobian(const FeSpace& space, std::span<const double> a,
                                          std::span<const double> rho, const DivergenceOptions& options) {
    check_nodal(space, a, "A");
    check_nodal(space, rho, "rho");
    const auto rule = QuadratureRule::gauss(options.points);
    SparseMatrix g(space.pattern());
    auto values = g.values();
    const auto& mesh = space.mesh();
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const Quad& quad = mesh.quad(e);
        double local[4][4] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto geo = map_reference_point(mesh, e, rule.points[q][0], rule.points[q][1]);
            const double jxw = geo.det_j * rule.weights[q];
            double aq = 0.0, rq = 0.0, gx = 0.0, gy = 0.0;
            for (int k = 0; k < 4; ++k) {
                aq += geo.phi[k] * a[quad[k]];
                rq += geo.phi[k] * rho[quad[k]];
                gx += geo.grad[k][0] * a[quad[k]];
                gy += geo.grad[k][1] * a[quad[k]];
            }
            if (!(aq > options.floor)) degenerate(e, aq, options.floor);
            const double c = 2.0 * rq * jxw;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const double vx = geo.grad[j][0] / aq - geo.phi[j] * gx / (aq * aq);
                    const double vy = geo.grad[j][1] / aq - geo.phi[j] * gy / (aq * aq);
                    local[i][j] += c * (vx * geo.grad[i][0] + vy * geo.grad[i][1]);
                }
        }
        scatter(space, e, local, 1.0, values);
    }
    return g;
}

std::vector<double> load_vector(const FeSpace& space, const Coefficient& f) {
    check_coefficient(space, f, "load");
    std::vector<double> b(space.dofs(), 0.0);
    const auto& mesh = space.mesh();
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const Quad& quad = mesh.quad(e);
        const auto qp = space.qp(e);
        for (int q = 0; q < 4; ++q) {
            const double fq = coefficient_at(space, f, e, q) * qp[q].jxw;
            const auto& phi = space.qp_phi()[q];
            for (int i = 0; i < 4; ++i) b[quad[i]] += fq * phi[i];
        }
    }
    return b;
}

std::vector<double> assemble_rhs_A(const FeSpace& space, const Coefficient& a_st, const Coefficient& eta,
                                   std::span<const double> a_prev, double dt, const SparseMatrix& mass) {
    if (!(dt > 0.0)) throw ParameterError("time step must be positive");
    check_nodal(space, a_prev, "A_prev");
    if (a_st.kind() == Coefficient::Kind::Cellwise)
        throw ParameterError("A_st must be constant or a nodal (H1) field");
    check_coefficient(space, eta, "eta");

    std::vector<double> b = load_vector(space, a_st);
    if (a_st.kind() == Coefficient::Kind::Nodal) {
        const auto v = a_st.values();
        const auto& mesh = space.mesh();
        for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
            const Quad& quad = mesh.quad(e);
            const auto qp = space.qp(e);
            for (int q = 0; q < 4; ++q) {
                const auto& g = qp[q].grad;
                double gx = 0.0, gy = 0.0;
                for (int k = 0; k < 4; ++k) {
                    gx += g[k][0] * v[quad[k]];
                    gy += g[k][1] * v[quad[k]];
                }
                const double f = coefficient_at(space, eta, e, q) * qp[q].jxw;
                for (int i = 0; i < 4; ++i) b[quad[i]] += f * (gx * g[i][0] + gy * g[i][1]);
            }
        }
    }
    const auto ma = spmv(mass, a_prev);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += ma[i] / dt;
    return b;
}

std::vector<double> assemble_rhs_rho(const FeSpace& space, const Coefficient& source,
                                     std::span<const double> rho_prev, double dt, const SparseMatrix& mass) {
    if (!(dt > 0.0)) throw ParameterError("time step must be positive");
    check_nodal(space, rho_prev, "rho_prev");
    std::vector<double> b = load_vector(space, source);
    const auto mr = spmv(mass, rho_prev);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += mr[i] / dt;
    return b;
}

}  // namespace crimesim::fem
