#include "crimesim/error.hpp"
#include "crimesim/pde.hpp"

#include "../support/fem_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace crimesim;
using namespace crimesim::pde;

namespace {

NondimParams case_params(double eta) {
    NondimParams p;
    p.eta = eta;
    p.a_st = 1.0 / 30.0;
    p.source = 1.0;
    return p;
}

PdeState wavy_state(const Mesh& m, double amp) {
    PdeState s;
    std::vector<double> a(m.node_count()), r(m.node_count());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& p = m.node(i);
        a[i] = 1.0 + amp * std::cos(1.3 * p.x) * std::cos(0.9 * p.y + 0.4);
        r[i] = 0.9 + amp * std::sin(0.7 * p.x + 0.2) * std::cos(1.1 * p.y);
    }
    s.A = ScalarField(m, a);
    s.rho = ScalarField(m, r);
    return s;
}

double max_dev(const ScalarField& f, double v) {
    double d = 0;
    for (double x : f.values()) d = std::max(d, std::abs(x - v));
    return d;
}

}  // namespace

TEST_SUITE("pde") {

TEST_CASE("decay laws on constant states") {
    const Mesh m = oracle::jittered_mesh(5, 5, 0.2, 4u);
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.mode = CouplingMode::Loose;

    SUBCASE("attractiveness decays as A / (1 + dt) without density or sources") {
        NondimParams p;
        p.eta = 0.4;
        PdeState s;
        s.A = ScalarField(m, 2.0);
        s.rho = ScalarField(m, 0.0);
        const Stepper st(m, p, cfg);
        st.step(s);
        CHECK(max_dev(s.A, 2.0 / 1.1) < 1e-12);
        CHECK(max_dev(s.rho, 0.0) < 1e-12);
    }
    SUBCASE("density decays as rho / (1 + dt A) at fixed attractiveness") {
        const double a = 1.7, rho = 0.6;
        NondimParams p;
        p.eta = 0.4;
        p.a_st = a * (1.0 - rho);  // keeps A at its value in the first step
        PdeState s;
        s.A = ScalarField(m, a);
        s.rho = ScalarField(m, rho);
        const Stepper st(m, p, cfg);
        st.step(s);
        CHECK(max_dev(s.A, a) < 1e-12);
        CHECK(max_dev(s.rho, rho / (1.0 + cfg.dt * a)) < 1e-12);
    }
}

TEST_CASE("the homogeneous equilibrium is a fixed point of every scheme") {
    const Mesh m = structured_quad_mesh(4.0, 4.0, 8, 8);
    const auto p = case_params(0.3);
    const auto eq = equilibrium(p);
    for (auto mode : {CouplingMode::Loose, CouplingMode::Strong, CouplingMode::Monolithic}) {
        SolverConfig cfg;
        cfg.mode = mode;
        cfg.dt = 0.05;
        const Stepper st(m, p, cfg);
        PdeState s{0.0, ScalarField(m, eq.A_bar), ScalarField(m, eq.rho_bar), 0};
        for (int k = 0; k < 10; ++k) st.step(s);
        CHECK(max_dev(s.A, eq.A_bar) < 1e-12);
        CHECK(max_dev(s.rho, eq.rho_bar) < 1e-12);
        CHECK(s.step_index == 10);
        CHECK(s.time == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("strong coupling converges to the monolithic Newton solution") {
    const Mesh m = oracle::jittered_mesh(5, 5, 0.2, 8u);
    const auto p = case_params(0.05);
    SolverConfig cfg;
    cfg.dt = 0.04;
    cfg.tol1 = cfg.tol2 = 1e-13;
    const Stepper st(m, p, cfg);
    PdeState a = wavy_state(m, 0.3), b = a;
    const auto stats = st.step_strong(a);
    const auto rep = st.step_newton(b);
    CHECK(stats.fixed_point_iters > 1);
    CHECK(rep.iterations >= 1);
    CHECK(rep.residual_norms.back() < 1e-10);
    for (std::size_t i = 0; i < m.node_count(); ++i) {
        CHECK(std::abs(a.A[i] - b.A[i]) < 1e-10);
        CHECK(std::abs(a.rho[i] - b.rho[i]) < 1e-10);
    }
}

TEST_CASE("strong increments shrink monotonically near convergence") {
    const Mesh m = structured_quad_mesh(2.0, 2.0, 6, 6);
    SolverConfig cfg;
    cfg.dt = 0.04;
    cfg.tol1 = cfg.tol2 = 1e-12;
    const Stepper st(m, case_params(0.3), cfg);
    PdeState s = wavy_state(m, 0.2);
    const auto stats = st.step_strong(s);
    REQUIRE(stats.incr_A.size() >= 3);
    for (std::size_t k = 1; k < stats.incr_A.size(); ++k) CHECK(stats.incr_A[k] < stats.incr_A[k - 1]);
    CHECK(stats.incr_A.back() < 1e-12);
    CHECK(stats.incr_rho.back() < 1e-12);
    CHECK(stats.step1.size() == static_cast<std::size_t>(stats.fixed_point_iters));
}

TEST_CASE("one strong pass with a loose tolerance equals the loose scheme") {
    const Mesh m = oracle::jittered_mesh(4, 6, 0.2, 2u);
    SolverConfig cfg;
    cfg.dt = 0.04;
    cfg.tol1 = cfg.tol2 = 1e300;
    const Stepper st(m, case_params(0.1), cfg);
    PdeState a = wavy_state(m, 0.2), b = a;
    const auto sa = st.step_strong(a);
    const auto sb = st.step_loose(b);
    CHECK(sa.fixed_point_iters == 1);
    CHECK(sb.fixed_point_iters == 1);
    CHECK(std::equal(a.A.values().begin(), a.A.values().end(), b.A.values().begin()));
    CHECK(std::equal(a.rho.values().begin(), a.rho.values().end(), b.rho.values().begin()));
}

TEST_CASE("discrete balance of total density") {
    // 1^T M (rho' - rho) / dt = int source - int A' rho', because K and D have zero column sums.
    const Mesh m = oracle::jittered_mesh(6, 6, 0.25, 12u);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.tol1 = cfg.tol2 = 1e-13;
    const Stepper st(m, case_params(0.2), cfg);
    PdeState s = wavy_state(m, 0.25);
    const std::vector<double> prev(s.rho.values().begin(), s.rho.values().end());
    st.step_strong(s);
    const auto n = fem::assemble_weighted_mass(st.space(), s.A.values());
    const auto nr = spmv(n, s.rho.values());
    const std::vector<double> ones(m.node_count(), 1.0);
    const auto m1 = spmv(st.mass(), ones);
    double lhs = 0, reaction = 0;
    for (std::size_t i = 0; i < m1.size(); ++i) {
        lhs += m1[i] * (s.rho[i] - prev[i]) / cfg.dt;
        reaction += nr[i];
    }
    CHECK(lhs == doctest::Approx(m.total_area() - reaction).epsilon(1e-9));
}

TEST_CASE("mirror symmetry of the data is preserved") {
    const Mesh m = structured_quad_mesh(3.0, 3.0, 9, 9);
    PdeState s;
    std::vector<double> a(m.node_count()), r(m.node_count());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = m.node(i).x - 1.5, y = m.node(i).y;
        a[i] = 1.0 + 0.3 * std::exp(-x * x) * (1 + 0.2 * y);
        r[i] = 0.9 + 0.1 * std::cos(x) * std::sin(y);
    }
    s.A = ScalarField(m, a);
    s.rho = ScalarField(m, r);
    SolverConfig cfg;
    cfg.dt = 0.04;
    cfg.tol1 = cfg.tol2 = 1e-12;
    const Stepper st(m, case_params(0.1), cfg);
    for (int k = 0; k < 5; ++k) st.step(s);
    for (int j = 0; j <= 9; ++j)
        for (int i = 0; i <= 9; ++i) {
            const std::size_t p = j * 10 + i, q = j * 10 + (9 - i);
            CHECK(std::abs(s.A[p] - s.A[q]) < 1e-10);
            CHECK(std::abs(s.rho[p] - s.rho[q]) < 1e-10);
        }
}

TEST_CASE("iteration failures raise convergence errors with statistics") {
    const Mesh m = structured_quad_mesh(2.0, 2.0, 6, 6);
    SolverConfig cfg;
    cfg.dt = 0.04;
    cfg.tol1 = cfg.tol2 = 1e-14;
    cfg.max_fixed_point_iters = 2;
    const Stepper st(m, case_params(0.3), cfg);
    PdeState s = wavy_state(m, 0.3);
    const PdeState before = s;
    try {
        st.step_strong(s);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.stats().fixed_point_iters == 2);
        CHECK(e.stats().incr_A.size() == 2);
    }
    // The state is left untouched by a failed step.
    CHECK(s.step_index == before.step_index);
    CHECK(std::equal(s.A.values().begin(), s.A.values().end(), before.A.values().begin()));
}

TEST_CASE("nonpositive attractiveness is a degeneracy") {
    const Mesh m = structured_quad_mesh(1.0, 1.0, 3, 3);
    const Stepper st(m, case_params(0.3), {});
    PdeState s = wavy_state(m, 0.1);
    s.A[5] = -5.0;
    CHECK_THROWS_AS(st.step(s), DegeneracyError);

    PdeState wrong = wavy_state(structured_quad_mesh(1.0, 1.0, 3, 3), 0.1);
    CHECK_THROWS_AS(st.step(wrong), ParameterError);
}

TEST_CASE("configuration validation") {
    SolverConfig c;
    c.tol1 = 0.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.max_fixed_point_iters = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.dt = -1;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    CHECK(step_count(200.0, 1.0 / 25.0) == 5000);
    CHECK(step_count(0.0, 0.1) == 0);
    CHECK_THROWS_AS(step_count(1.0, 0.3), ParameterError);
}

TEST_CASE("initial state combines the base fields and noise") {
    const Mesh m = structured_quad_mesh(1.0, 1.0, 10, 10);
    NoiseSpec none;
    const auto s = initial_state(m, 1.0 / 30.0, 1.0, 0.8, none);
    CHECK(max_dev(s.A, 31.0 / 30.0) < 1e-15);
    CHECK(max_dev(s.rho, 0.8) == 0.0);
    NoiseSpec noisy{0.05, 0.01, 1.0, 1.0, 3};
    const auto t = initial_state(m, 1.0 / 30.0, 1.0, 0.8, noisy);
    CHECK(max_dev(t.A, 31.0 / 30.0) > 0.0);
    CHECK(max_dev(t.rho, 0.8) > 0.0);
    CHECK(max_dev(t.rho, 0.8) < 0.1);
    const auto u = initial_state(m, 1.0 / 30.0, 1.0, 0.8, noisy);
    CHECK(std::equal(t.A.values().begin(), t.A.values().end(), u.A.values().begin()));
}

TEST_CASE("run loop: cadence, callbacks and failure capture") {
    const Mesh m = structured_quad_mesh(2.0, 2.0, 4, 4);
    SolverConfig cfg;
    cfg.dt = 0.1;
    RunOptions opt;
    opt.t_end = 1.0;
    opt.output_every = 4;
    int calls = 0;
    opt.on_step = [&](const PdeState&, const StepRecord&) { ++calls; };
    const auto r = run(m, case_params(0.3), cfg, wavy_state(m, 0.1), opt);
    CHECK(r.ok());
    CHECK(calls == 10);
    CHECK(r.log.size() == 10);
    REQUIRE(r.snapshots.size() == 4);
    CHECK(r.snapshots[0].step == 0);
    CHECK(r.snapshots[1].step == 4);
    CHECK(r.snapshots[2].step == 8);
    CHECK(r.snapshots[3].step == 10);
    CHECK(r.final_state.time == doctest::Approx(1.0));
    CHECK(r.average_iterations() >= 1.0);

    cfg.tol1 = cfg.tol2 = 1e-15;
    cfg.max_fixed_point_iters = 1;
    opt.on_step = {};
    const auto f = run(m, case_params(0.3), cfg, wavy_state(m, 0.1), opt);
    CHECK_FALSE(f.ok());
    CHECK(f.log.empty());
    CHECK_THROWS_AS(std::rethrow_exception(f.error), ConvergenceError);
}

TEST_CASE("lumped norm variant converges to the same step") {
    const Mesh m = oracle::jittered_mesh(5, 5, 0.2, 21u);
    SolverConfig cfg;
    cfg.dt = 0.04;
    cfg.tol1 = cfg.tol2 = 1e-12;
    const Stepper consistent(m, case_params(0.1), cfg);
    cfg.norm = NormKind::Lumped;
    const Stepper lumped(m, case_params(0.1), cfg);
    PdeState a = wavy_state(m, 0.3), b = a;
    consistent.step(a);
    lumped.step(b);
    for (std::size_t i = 0; i < m.node_count(); ++i) CHECK(std::abs(a.A[i] - b.A[i]) < 1e-10);
    const std::vector<double> ones(m.node_count(), 1.0);
    CHECK(lumped.norm(ones) == doctest::Approx(std::sqrt(m.total_area())).epsilon(1e-13));
    CHECK(consistent.norm(ones) == doctest::Approx(std::sqrt(m.total_area())).epsilon(1e-13));
}

}
