#include "crimesim/abm.hpp"
#include "crimesim/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace crimesim;
using namespace crimesim::abm;

namespace {

AbmParams params(double eta = 0.2) {
    AbmParams p;
    p.params.theta = 0.56;
    p.params.omega = 1.0 / 15.0;
    p.params.gamma = 0.019;
    p.params.eta = eta;
    p.params.a_static = 1.0 / 30.0;
    p.params.dt = 0.5;
    p.params.lattice_h = 1.0;
    return p;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_SUITE("abm") {

TEST_CASE("2x2 lattice step enumerated by hand") {
    // Sites: 0=(0,0), 1=(1,0), 2=(0,1), 3=(1,1). Each has two real neighbours
    // and two walls; a wall counts as the site itself.
    const Lattice lat{2, 2, 1.0, {}};
    AbmParams p = params(0.4);
    p.a_static_field = {0.1, 0.2, 0.3, 0.4};
    LatticeState s;
    s.B = {0.5, 0.0, 0.25, 1.0};
    s.n = {2.0, 1.0, 0.0, 3.0};
    const double dt = p.params.dt, g = p.params.gamma, w = p.params.omega, th = p.params.theta, eta = p.params.eta;

    const double A[4] = {0.6, 0.2, 0.55, 1.4};
    const int nb[4][2] = {{1, 2}, {0, 3}, {0, 3}, {1, 2}};
    double prob[4], T[4], survivors[4];
    for (int k = 0; k < 4; ++k) {
        prob[k] = 1.0 - std::exp(-A[k] * dt);
        T[k] = A[nb[k][0]] + A[nb[k][1]] + 2.0 * A[k];
        survivors[k] = s.n[k] * (1.0 - prob[k]);
    }
    double expect_n[4], expect_b[4];
    for (int k = 0; k < 4; ++k) {
        const double stay = survivors[k] * 2.0 * A[k] / T[k];
        const double in = survivors[nb[k][0]] * A[k] / T[nb[k][0]] + survivors[nb[k][1]] * A[k] / T[nb[k][1]];
        expect_n[k] = stay + in + g * dt;
        const double lap = s.B[nb[k][0]] + s.B[nb[k][1]] - 2.0 * s.B[k];
        expect_b[k] = (s.B[k] + eta / 4.0 * lap) * (1.0 - w * dt) + th * s.n[k] * prob[k];
    }

    const auto next = step_deterministic(lat, p, s);
    for (int k = 0; k < 4; ++k) {
        CHECK(next.n[k] == doctest::Approx(expect_n[k]).epsilon(1e-14));
        CHECK(next.B[k] == doctest::Approx(expect_b[k]).epsilon(1e-14));
    }
    CHECK(next.step == 1);
    CHECK(next.t == dt);

    // Walkers are conserved apart from burglaries and births.
    double burgled = 0;
    for (int k = 0; k < 4; ++k) burgled += s.n[k] * prob[k];
    CHECK(sum(next.n) == doctest::Approx(sum(s.n) - burgled + 4 * g * dt).epsilon(1e-14));
}

TEST_CASE("lattice Laplacian with mirrored walls") {
    const Lattice lat{3, 2, 1.0, {}};
    const std::vector<double> f = {1, 2, 4, 0, 3, 5};
    const auto l = lattice_laplacian(lat, f);
    CHECK(l[0] == doctest::Approx(2 + 0 - 2 * 1));
    CHECK(l[4] == doctest::Approx(0 + 5 + 2 - 3 * 3));
    CHECK(sum(l) == doctest::Approx(0.0));
    const std::vector<double> c(6, 7.0);
    for (double v : lattice_laplacian(lat, c)) CHECK(v == 0.0);
}

TEST_CASE("equilibrium is stationary for the mean-field engine") {
    const Lattice lat{9, 7, 1.0, {}};
    const auto p = params();
    const auto e = equilibrium(p.params);
    CHECK(e.B_bar == doctest::Approx(p.params.theta * p.params.gamma / p.params.omega));
    CHECK(e.n_bar == doctest::Approx(p.params.gamma * p.params.dt / (1 - std::exp(-e.A_bar * p.params.dt))));
    LatticeState s = equilibrium_state(lat, p, false);
    for (int k = 0; k < 200; ++k) s = step_deterministic(lat, p, s);
    for (std::size_t i = 0; i < s.n.size(); ++i) {
        CHECK(std::abs(s.B[i] - e.B_bar) < 1e-12);
        CHECK(std::abs(s.n[i] - e.n_bar) < 1e-12);
    }
}

TEST_CASE("stochastic engine: reproducible, conserving, unbiased") {
    const Lattice lat{2, 2, 1.0, {}};
    AbmParams p = params();
    LatticeState s;
    s.B = {0.5, 0.1, 0.2, 1.0};
    s.n = {20, 10, 0, 30};

    const auto a = step_stochastic(lat, p, s, 99);
    const auto b = step_stochastic(lat, p, s, 99);
    CHECK(a.n == b.n);
    CHECK(a.B == b.B);
    for (double v : a.n) CHECK(v == std::round(v));

    // Without births the walkers plus the burglars equal the start.
    AbmParams nobirth = p;
    nobirth.params.gamma = 0.0;
    AbmRunOptions opt;
    opt.engine = Engine::Stochastic;
    opt.steps = 1;
    opt.seed = 5;
    const auto r = run_abm(lat, nobirth, s, opt);
    CHECK(r.log[0].total_n + r.log[0].total_burglaries == sum(s.n));

    // The mean over many independent steps matches the mean-field step.
    const auto expect = step_deterministic(lat, p, s);
    const int reps = 4000;
    std::vector<double> mean(4, 0.0), sq(4, 0.0);
    for (int k = 0; k < reps; ++k) {
        LatticeState t = s;
        t.step = k;  // distinct streams
        const auto n = step_stochastic(lat, p, t, 1234).n;
        for (int i = 0; i < 4; ++i) {
            mean[i] += n[i];
            sq[i] += n[i] * n[i];
        }
    }
    for (int i = 0; i < 4; ++i) {
        mean[i] /= reps;
        const double var = sq[i] / reps - mean[i] * mean[i];
        CHECK(std::abs(mean[i] - expect.n[i]) < 5.0 * std::sqrt(var / reps) + 1e-12);
    }

    s.n[0] = 2.5;
    CHECK_THROWS_AS(step_stochastic(lat, p, s, 1), ParameterError);
}

TEST_CASE("degenerate neighbourhoods and bad inputs") {
    const Lattice lat{2, 2, 1.0, {}};
    AbmParams p = params();
    p.params.a_static = 0.0;
    LatticeState s;
    s.B = {0, 0, 0, 0};
    s.n = {1, 1, 1, 1};
    CHECK_THROWS_AS(step_deterministic(lat, p, s), DegeneracyError);
    s.B = {1, 1, 1};
    CHECK_THROWS_AS(step_deterministic(lat, p, s), ParameterError);
    AbmParams bad = params();
    bad.params.eta = 2.0;
    CHECK_THROWS_AS(equilibrium(bad.params), ParameterError);
}

TEST_CASE("nondimensional views and the lattice mesh") {
    const Lattice lat{4, 3, 1.0, {}};
    const auto p = params();
    const auto s = equilibrium_state(lat, p, false);
    const auto v = nondimensional_view(lat, p, s);
    const auto e = equilibrium(p.params);
    CHECK(v.A[0] == doctest::Approx(e.A_bar / p.params.omega));
    CHECK(v.rho[0] == doctest::Approx(p.params.theta / p.params.omega * e.n_bar));
    CHECK(v.spacing == doctest::Approx(2.0 * std::sqrt(p.params.omega * p.params.dt)));
    const Mesh m = lattice_mesh(lat, p);
    REQUIRE(m.node_count() == lat.site_count());
    CHECK(m.node(lat.index(3, 2)).x == doctest::Approx(3 * v.spacing));
    CHECK(m.node(lat.index(3, 2)).y == doctest::Approx(2 * v.spacing));
}

TEST_CASE("run loop bookkeeping") {
    const Lattice lat{5, 5, 1.0, {}};
    const auto p = params();
    AbmRunOptions opt;
    opt.steps = 7;
    opt.output_every = 3;
    const auto r = run_abm(lat, p, equilibrium_state(lat, p, false), opt);
    CHECK(r.log.size() == 7);
    REQUIRE(r.snapshots.size() == 4);
    CHECK(r.snapshots[3].step == 7);
    const auto e = equilibrium(p.params);
    CHECK(r.log.back().mean_B == doctest::Approx(e.B_bar));
    CHECK(r.log.back().total_burglaries == doctest::Approx(25 * e.n_bar * burglary_probability(e.A_bar, p.params.dt)));
}

}
