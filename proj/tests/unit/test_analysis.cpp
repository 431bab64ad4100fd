#include "crimesim/analysis.hpp"
#include "crimesim/error.hpp"
#include "crimesim/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace crimesim;
using namespace crimesim::analysis;

namespace {

std::vector<double> bumps(const Mesh& m, const std::vector<Point>& centres, double width, double height) {
    std::vector<double> f(m.node_count(), 1.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        for (const auto& c : centres) {
            const double dx = m.node(i).x - c.x, dy = m.node(i).y - c.y;
            f[i] += height * std::exp(-(dx * dx + dy * dy) / (width * width));
        }
    return f;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("separated bumps are counted with equivalent-circle diameters") {
    const Mesh m = structured_quad_mesh(10.0, 10.0, 100, 100);
    const auto f = bumps(m, {{2.5, 2.5}, {7.5, 3.0}, {5.0, 7.5}}, 0.6, 2.0);
    const auto r = detect_hotspots(f, m, 1.0);
    CHECK(r.count == 3);
    CHECK(r.threshold_used == doctest::Approx(2.0).epsilon(1e-6));
    // Above half height: radius w sqrt(ln 2).
    const double d = 2.0 * 0.6 * std::sqrt(std::log(2.0));
    for (double di : r.diameters) CHECK(di == doctest::Approx(d).epsilon(0.1));
    CHECK(r.mean_diameter() == doctest::Approx(d).epsilon(0.1));
    for (std::size_t k = 0; k < r.areas.size(); ++k)
        CHECK(r.diameters[k] == doctest::Approx(2.0 * std::sqrt(r.areas[k] / std::numbers::pi)));
}

TEST_CASE("counting is invariant under affine maps of field and baseline") {
    const Mesh m = structured_quad_mesh(8.0, 8.0, 40, 40);
    const auto f = bumps(m, {{2, 2}, {6, 6}, {2, 6}}, 0.7, 1.5);
    const auto r = detect_hotspots(f, m, 1.0);
    std::vector<double> g(f);
    for (double& v : g) v = 3.0 * v - 7.0;
    const auto s = detect_hotspots(g, m, 3.0 - 7.0);
    CHECK(r.count == s.count);
    CHECK(r.components == s.components);
}

TEST_CASE("flat fields and isolated nodes have no hotspots") {
    const Mesh m = structured_quad_mesh(4.0, 4.0, 8, 8);
    std::vector<double> f(m.node_count(), 2.0);
    CHECK(detect_hotspots(f, m, 2.0).count == 0);
    f[40] = 5.0;  // one interior node
    CHECK(detect_hotspots(f, m, 2.0).count == 0);
    f[41] = 5.0;
    CHECK(detect_hotspots(f, m, 2.0).count == 1);
    std::vector<double> bad(3, 1.0);
    CHECK_THROWS_AS(detect_hotspots(bad, m, 0.0), ParameterError);
    CHECK_THROWS_AS(detect_hotspots(f, m, 2.0, -1.0), ParameterError);
}

TEST_CASE("a minimum rise separates hotspots from a nearly flat field") {
    const Mesh m = structured_quad_mesh(4.0, 4.0, 8, 8);
    std::vector<double> f(m.node_count(), 1.0);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += 1e-5 * std::sin(static_cast<double>(i));
    CHECK(detect_hotspots(f, m, 1.0).count > 0);
    CHECK(detect_hotspots(f, m, 1.0, 0.01).count == 0);
    f[40] = f[41] = 1.5;
    CHECK(detect_hotspots(f, m, 1.0, 0.01).count == 1);
}

TEST_CASE("diagonal neighbours within an element are connected") {
    const Mesh m = structured_quad_mesh(3.0, 3.0, 3, 3);
    std::vector<double> f(m.node_count(), 0.0);
    f[5] = 1.0;   // (1,1)
    f[10] = 1.0;  // (2,2)
    CHECK(detect_hotspots(f, m, 0.0).count == 1);
}

TEST_CASE("emergence detector") {
    EmergenceDetector d(3);
    CHECK_FALSE(d.observe(1));
    CHECK_FALSE(d.observe(2));
    CHECK_FALSE(d.observe(2));
    CHECK(d.observe(2));
    CHECK(d.observe(5));  // stays emerged
    CHECK(d.emerged());
}

TEST_CASE("exponential fit recovers generating coefficients") {
    std::vector<DataPoint> pts;
    for (double x = 0.025; x <= 0.451; x += 0.025) pts.push_back({x, 96.82 * std::exp(-16.14 * x) + 12.33});
    const auto f = fit_hotspot_count(pts);
    CHECK(f.coefficients[0] == doctest::Approx(96.82).epsilon(1e-6));
    CHECK(f.coefficients[1] == doctest::Approx(-16.14).epsilon(1e-6));
    CHECK(f.coefficients[2] == doctest::Approx(12.33).epsilon(1e-6));
    CHECK(f.evaluate(0.1) == doctest::Approx(96.82 * std::exp(-1.614) + 12.33));
    CHECK_FALSE(f.degenerate);
}

TEST_CASE("quadratic fit recovers generating coefficients") {
    std::vector<DataPoint> pts;
    for (double x = 0.025; x <= 0.451; x += 0.025) pts.push_back({x, -5.24 * x * x + 8.70 * x + 0.73});
    const auto f = fit_hotspot_diameter(pts);
    CHECK(f.coefficients[0] == doctest::Approx(0.73).epsilon(1e-9));
    CHECK(f.coefficients[1] == doctest::Approx(8.70).epsilon(1e-9));
    CHECK(f.coefficients[2] == doctest::Approx(-5.24).epsilon(1e-9));
    CHECK(f.residual_norm < 1e-10);
}

TEST_CASE("fit failure modes") {
    const std::vector<DataPoint> three = {{0.1, 1}, {0.2, 2}, {0.3, 3}};
    CHECK_THROWS_AS(fit_hotspot_count(three), FitError);
    const std::vector<DataPoint> repeated = {{0.1, 1}, {0.1, 2}, {0.2, 3}, {0.3, 3}};
    CHECK_THROWS_AS(fit_hotspot_count(repeated), FitError);
    const std::vector<DataPoint> collinear_x = {{0.2, 1}, {0.2, 2}, {0.2, 3}};
    CHECK_THROWS_AS(fit_hotspot_diameter(collinear_x), FitError);
    const std::vector<DataPoint> nonfinite = {{0.1, 1}, {0.2, NAN}, {0.3, 3}, {0.4, 4}};
    CHECK_THROWS_AS(fit_hotspot_count(nonfinite), FitError);

    // Constant data carry no exponential trend.
    const std::vector<DataPoint> flat = {{0.1, 4}, {0.2, 4}, {0.3, 4}, {0.4, 4}};
    const auto f = fit_hotspot_count(flat);
    CHECK(f.evaluate(0.25) == doctest::Approx(4.0));
}

TEST_CASE("expected burglaries on constant fields") {
    const Mesh m = structured_quad_mesh(2.0, 1.0, 4, 2);
    const double a = 1.2, rho = 0.7, dt = 0.04, too = 8.7;
    std::vector<pde::Snapshot> snaps;
    for (long k = 0; k < 4; ++k)
        snaps.push_back({k, k * dt, std::vector<double>(m.node_count(), a), std::vector<double>(m.node_count(), rho)});
    const auto c = burglary_counts(m, snaps, too, dt);
    REQUIRE(c.size() == m.quad_count());
    const double per = too * dt * 3 * (1 - std::exp(-a * dt)) * rho * 0.25;
    for (double v : c) CHECK(v == doctest::Approx(per).epsilon(1e-13));

    snaps[2].step = 5;
    CHECK_THROWS_AS(burglary_counts(m, snaps, too, dt), ParameterError);
}

TEST_CASE("nearest nodes against brute force") {
    const Mesh m = structured_quad_mesh(3.0, 2.0, 17, 11);
    Xoshiro256 rng(3);
    std::vector<Point> q;
    for (int k = 0; k < 300; ++k) q.push_back({-0.5 + 4.0 * rng.uniform(), -0.5 + 3.0 * rng.uniform()});
    const auto got = nearest_nodes(m, q);
    for (std::size_t k = 0; k < q.size(); ++k) {
        double best = 1e300;
        for (const auto& p : m.nodes()) best = std::min(best, std::hypot(p.x - q[k].x, p.y - q[k].y));
        const auto& p = m.node(got[k]);
        CHECK(std::hypot(p.x - q[k].x, p.y - q[k].y) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("field comparison across meshes") {
    const Mesh fine = structured_quad_mesh(4.0, 4.0, 40, 40);
    const Mesh coarse = structured_quad_mesh(4.0, 4.0, 20, 20);
    const auto ff = bumps(fine, {{1, 1}, {3, 3}}, 0.5, 1.0);
    const auto fc = bumps(coarse, {{1, 1}, {3, 3}}, 0.5, 1.0);
    const auto c = compare_fields(fine, ff, coarse, fc);
    CHECK(c.hotspot_count_difference == 0);
    CHECK(c.max_difference < 0.25);
    const auto self = compare_fields(fine, ff, fine, ff);
    CHECK(self.l2_difference == 0.0);
    CHECK(self.max_difference == 0.0);
    const Mesh other = structured_quad_mesh(5.0, 4.0, 20, 20);
    CHECK_THROWS_AS(compare_fields(fine, ff, other, fc), ParameterError);
}

}
