#include "crimesim/assembly.hpp"
#include "crimesim/element.hpp"
#include "crimesim/error.hpp"
#include "crimesim/mesh.hpp"

#include "../support/fem_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace crimesim;
using namespace crimesim::fem;

namespace {

std::vector<double> smooth_field(const Mesh& m, double base, double amp) {
    std::vector<double> w(m.node_count());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& p = m.node(i);
        w[i] = base + amp * std::sin(2.1 * p.x + 0.3) * std::cos(1.7 * p.y - 0.2);
    }
    return w;
}

double max_abs(std::span<const double> v) {
    double s = 0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("Gauss rules integrate polynomials exactly up to degree 2n-1") {
    for (int n = 1; n <= 6; ++n) {
        const auto r = QuadratureRule::gauss(n);
        REQUIRE(r.points.size() == static_cast<std::size_t>(n * n));
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0;
            for (std::size_t q = 0; q < r.points.size(); ++q) s += r.weights[q] * std::pow(r.points[q][0], p);
            const double exact = p % 2 ? 0.0 : 2.0 * 2.0 / (p + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(QuadratureRule::gauss(7), ParameterError);
}

TEST_CASE("shape functions form a partition of unity with zero-sum gradients") {
    for (double xi : {-1.0, -0.3, 0.5, 1.0})
        for (double et : {-1.0, 0.2, 0.9}) {
            const auto v = shape_values(xi, et);
            const auto g = shape_gradients(xi, et);
            CHECK(v[0] + v[1] + v[2] + v[3] == doctest::Approx(1.0));
            CHECK(g[0][0] + g[1][0] + g[2][0] + g[3][0] == doctest::Approx(0.0));
            CHECK(g[0][1] + g[1][1] + g[2][1] + g[3][1] == doctest::Approx(0.0));
        }
    const auto corner = shape_values(1.0, 1.0);
    CHECK(corner[2] == 1.0);
    CHECK(corner[0] == 0.0);
}

TEST_CASE("single square element matches the closed-form 1/36 and 1/6 patterns") {
    const double h = 0.7;
    const Mesh m = structured_quad_mesh(h, h, 1, 1);
    const FeSpace space(m);
    // Structured numbering: 0=(0,0), 1=(h,0), 2=(0,h), 3=(h,h); quad is {0,1,3,2}.
    const auto& q = m.quad(0);
    const double mref[4][4] = {{4, 2, 1, 2}, {2, 4, 2, 1}, {1, 2, 4, 2}, {2, 1, 2, 4}};
    const double kref[4][4] = {{4, -1, -2, -1}, {-1, 4, -1, -2}, {-2, -1, 4, -1}, {-1, -2, -1, 4}};
    const auto mass = assemble_mass(space);
    const auto stiff = assemble_stiffness(space);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(mass.at(q[i], q[j]) - h * h * mref[i][j] / 36.0) < 1e-12);
            CHECK(std::abs(stiff.at(q[i], q[j]) - kref[i][j] / 6.0) < 1e-12);
        }
}

TEST_CASE("structural identities: K 1 = 0, N(1) = M, D(const) = 0, D(c w) = D(w)") {
    for (const Mesh& m : {structured_quad_mesh(2.0, 1.0, 6, 4), oracle::jittered_mesh(6, 5, 0.25, 3u)}) {
        const FeSpace space(m);
        const auto mass = assemble_mass(space);
        const auto k = assemble_stiffness(space, 0.37);
        const std::vector<double> ones(m.node_count(), 1.0);
        CHECK(max_abs(spmv(k, ones)) < 1e-12);

        const auto n1 = assemble_weighted_mass(space, ones);
        CHECK(oracle::rel_diff(n1.values(), mass.values()) < 1e-14);

        const std::vector<double> constant(m.node_count(), 2.5);
        CHECK(max_abs(assemble_weighted_divergence(space, constant).values()) < 1e-13);

        const auto w = smooth_field(m, 2.0, 0.5);
        std::vector<double> cw(w);
        for (double& v : cw) v *= 3.7;
        CHECK(oracle::rel_diff(assemble_weighted_divergence(space, w).values(),
                               assemble_weighted_divergence(space, cw).values()) < 1e-13);

        // Column sums of D vanish: sum_i phi_i = 1 has zero gradient.
        const auto d = assemble_weighted_divergence(space, w).to_dense();
        const std::size_t n = m.node_count();
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += d[i * n + j];
            CHECK(std::abs(s) < 1e-12);
        }
        double total = 0;
        for (double v : mass.values()) total += v;
        CHECK(total == doctest::Approx(m.total_area()).epsilon(1e-13));
    }
}

TEST_CASE("assemblies agree with the 5x5 Gauss oracle on affine meshes") {
    for (const Mesh& m : {structured_quad_mesh(1.5, 1.0, 5, 3), oracle::sheared_mesh(4, 4, 0.4)}) {
        const FeSpace space(m);
        const auto w = smooth_field(m, 1.5, 0.6);

        CHECK(oracle::rel_diff(assemble_mass(space).to_dense(), oracle::mass(m)) < 1e-9);
        CHECK(oracle::rel_diff(assemble_stiffness(space, 0.3).to_dense(),
                               oracle::stiffness(m, [](const oracle::Eval&, std::size_t) { return 0.3; })) < 1e-9);

        const auto eta_nodal = Coefficient::nodal(smooth_field(m, 0.5, 0.2));
        CHECK(oracle::rel_diff(assemble_stiffness(space, eta_nodal).to_dense(),
                               oracle::stiffness(m, [&](const oracle::Eval& ev, std::size_t e) {
                                   return oracle::value(m, e, ev, eta_nodal.values());
                               })) < 1e-9);

        std::vector<double> cells(m.quad_count());
        for (std::size_t e = 0; e < cells.size(); ++e) cells[e] = 0.1 + 0.05 * static_cast<double>(e % 4);
        CHECK(oracle::rel_diff(assemble_stiffness(space, Coefficient::cellwise(cells)).to_dense(),
                               oracle::stiffness(m, [&](const oracle::Eval&, std::size_t e) { return cells[e]; })) <
              1e-9);

        CHECK(oracle::rel_diff(assemble_weighted_mass(space, w).to_dense(), oracle::weighted_mass(m, w)) < 1e-9);

        DivergenceOptions fine;
        fine.points = 5;
        CHECK(oracle::rel_diff(assemble_weighted_divergence(space, w, fine).to_dense(), oracle::divergence(m, w)) <
              1e-9);
    }
}

TEST_CASE("default 2x2 divergence matches the oracle on a gentle ramp") {
    const Mesh m = structured_quad_mesh(1.0, 1.0, 4, 4);
    const FeSpace space(m);
    std::vector<double> w(m.node_count());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 + 1e-5 * (m.node(i).x + 0.5 * m.node(i).y);
    CHECK(oracle::rel_diff(assemble_weighted_divergence(space, w).to_dense(), oracle::divergence(m, w)) < 1e-9);
}

TEST_CASE("mass matrix agrees with the oracle on a distorted mesh") {
    const Mesh m = oracle::jittered_mesh(5, 5, 0.3, 17u);
    const FeSpace space(m);
    CHECK(oracle::rel_diff(assemble_mass(space).to_dense(), oracle::mass(m)) < 1e-9);
    // Higher-order rules converge to the oracle for the rational integrands.
    const auto w = smooth_field(m, 1.5, 0.6);
    DivergenceOptions fine;
    fine.points = 6;
    CHECK(oracle::rel_diff(assemble_weighted_divergence(space, w, fine).to_dense(), oracle::divergence(m, w)) < 1e-6);
}

TEST_CASE("fused reaction-advection kernel equals its parts") {
    const Mesh m = oracle::jittered_mesh(6, 6, 0.2, 5u);
    const FeSpace space(m);
    const auto w = smooth_field(m, 2.0, 0.4);
    SparseMatrix fused(space.pattern());
    add_reaction_advection(space, w, 0.7, -1.3, fused);
    const auto expected =
        add_scaled({{0.7, assemble_weighted_mass(space, w)}, {-1.3, assemble_weighted_divergence(space, w)}});
    CHECK(oracle::rel_diff(fused.to_dense(), expected.to_dense()) < 1e-14);

    SparseMatrix fused5(space.pattern());
    DivergenceOptions five;
    five.points = 5;
    add_reaction_advection(space, w, 0.7, -1.3, fused5, five);
    // Both parts use the 5-point rule here.
    const auto wm = oracle::weighted_mass(m, w);
    const auto dv = oracle::divergence(m, w);
    std::vector<double> expected5(wm.size());
    for (std::size_t k = 0; k < wm.size(); ++k) expected5[k] = 0.7 * wm[k] - 1.3 * dv[k];
    CHECK(oracle::rel_diff(fused5.to_dense(), expected5) < 1e-12);
}

TEST_CASE("divergence Jacobian agrees with central differences") {
    const Mesh m = oracle::jittered_mesh(4, 4, 0.2, 9u);
    const FeSpace space(m);
    const auto a = smooth_field(m, 1.8, 0.5);
    const auto rho = smooth_field(m, 0.9, 0.3);
    const auto g = assemble_divergence_jacobian(space, a, rho).to_dense();
    const std::size_t n = m.node_count();
    const double eps = 1e-6;
    double worst = 0, scale = 0;
    for (std::size_t k = 0; k < n; ++k) {
        auto ap = a, am = a;
        ap[k] += eps;
        am[k] -= eps;
        const auto fp = spmv(assemble_weighted_divergence(space, ap), rho);
        const auto fm = spmv(assemble_weighted_divergence(space, am), rho);
        for (std::size_t i = 0; i < n; ++i) {
            const double fd = (fp[i] - fm[i]) / (2 * eps);
            worst = std::max(worst, std::abs(fd - g[i * n + k]));
            scale = std::max(scale, std::abs(g[i * n + k]));
        }
    }
    CHECK(worst / scale < 1e-7);
}

TEST_CASE("degenerate weights are reported with the element") {
    const Mesh m = structured_quad_mesh(1.0, 1.0, 3, 3);
    const FeSpace space(m);
    std::vector<double> w(m.node_count(), 1.0);
    w[5] = -2.0;  // interior node (1,1) touches elements 0, 1, 3 and 4
    try {
        assemble_weighted_divergence(space, w);
        FAIL("expected a degeneracy error");
    } catch (const DegeneracyError& e) {
        CHECK(e.element() == 0);
    }
    // The weighted mass alone does not need a positive weight.
    CHECK_NOTHROW(assemble_weighted_mass(space, w));
    CHECK_THROWS_AS(assemble_stiffness(space, -1.0), ParameterError);
}

TEST_CASE("load vectors and right-hand sides") {
    const Mesh m = oracle::sheared_mesh(5, 4, 0.3);
    const FeSpace space(m);
    const auto mass = assemble_mass(space);
    const std::vector<double> ones(m.node_count(), 1.0);
    const auto l = load_vector(space, 2.0);
    const auto m1 = spmv(mass, ones);
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(l[i] == doctest::Approx(2.0 * m1[i]).epsilon(1e-13));

    const auto f = smooth_field(m, 1.0, 0.5);
    const auto lf = load_vector(space, Coefficient::nodal(f));
    const auto mf = spmv(mass, f);
    for (std::size_t i = 0; i < lf.size(); ++i) CHECK(lf[i] == doctest::Approx(mf[i]).epsilon(1e-12));

    // Nodal A_st: b = M a_st + K_eta a_st + M a_prev / dt.
    const auto ast = smooth_field(m, 0.1, 0.05);
    const auto prev = smooth_field(m, 1.0, 0.2);
    const double dt = 0.04, eta = 0.3;
    const auto b = assemble_rhs_A(space, Coefficient::nodal(ast), eta, prev, dt, mass);
    const auto k = assemble_stiffness(space, eta);
    const auto ma = spmv(mass, ast), ka = spmv(k, ast), mp = spmv(mass, prev);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == doctest::Approx(ma[i] + ka[i] + mp[i] / dt).epsilon(1e-12));

    std::vector<double> cells(m.quad_count(), 0.1);
    CHECK_THROWS_AS(assemble_rhs_A(space, Coefficient::cellwise(cells), eta, prev, dt, mass), ParameterError);

    const auto r = assemble_rhs_rho(space, 1.0, prev, dt, mass);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(m1[i] + mp[i] / dt).epsilon(1e-12));
}

TEST_CASE("reference map of an affine element") {
    const Mesh m = oracle::sheared_mesh(1, 1, 0.5);
    const auto g = map_reference_point(m, 0, 0.0, 0.0);
    CHECK(g.det_j == doctest::Approx(0.25));
    CHECK(g.x.x == doctest::Approx(0.75));
    CHECK(g.x.y == doctest::Approx(0.5));
}

}
