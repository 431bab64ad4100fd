#include "crimesim/element.hpp"

#include "crimesim/error.hpp"

#include <cmath>

namespace crimesim::fem {

namespace {

constexpr double kCornerXi[4] = {-1.0, 1.0, 1.0, -1.0};
constexpr double kCornerEta[4] = {-1.0, -1.0, 1.0, 1.0};

std::vector<std::pair<double, double>> gauss_1d(int n) {
    switch (n) {
        case 1: return {{0.0, 2.0}};
        case 2: {
            const double a = 1.0 / std::sqrt(3.0);
            return {{-a, 1.0}, {a, 1.0}};
        }
        case 3: {
            const double a = std::sqrt(0.6);
            return {{-a, 5.0 / 9.0}, {0.0, 8.0 / 9.0}, {a, 5.0 / 9.0}};
        }
        case 4: {
            const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
            const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
            const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            return {{-b, wb}, {-a, wa}, {a, wa}, {b, wb}};
        }
        case 5: {
            const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
            const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
            return {{-b, wb}, {-a, wa}, {0.0, 128.0 / 225.0}, {a, wa}, {b, wb}};
        }
        case 6:
            return {{-0.9324695142031521, 0.1713244923791704}, {-0.6612093864662645, 0.3607615730481386},
                    {-0.2386191860831969, 0.4679139345726910}, {0.2386191860831969, 0.4679139345726910},
                    {0.6612093864662645, 0.3607615730481386},  {0.9324695142031521, 0.1713244923791704}};
        default: throw ParameterError("Gauss rule order must be between 1 and 6");
    }
}

}  // namespace

QuadratureRule QuadratureRule::gauss(int n) {
    const auto g = gauss_1d(n);
    QuadratureRule rule;
    for (const auto& [y, wy] : g)
        for (const auto& [x, wx] : g) {
            rule.points.push_back({x, y});
            rule.weights.push_back(wx * wy);
        }
    return rule;
}

std::array<double, 4> shape_values(double xi, double eta) {
    std::array<double, 4> v{};
    for (int k = 0; k < 4; ++k) v[k] = 0.25 * (1.0 + kCornerXi[k] * xi) * (1.0 + kCornerEta[k] * eta);
    return v;
}

std::array<std::array<double, 2>, 4> shape_gradients(double xi, double eta) {
    std::array<std::array<double, 2>, 4> g{};
    for (int k = 0; k < 4; ++k) {
        g[k][0] = 0.25 * kCornerXi[k] * (1.0 + kCornerEta[k] * eta);
        g[k][1] = 0.25 * kCornerEta[k] * (1.0 + kCornerXi[k] * xi);
    }
    return g;
}

PointGeometry map_reference_point(const Mesh& mesh, std::size_t element, double xi, double eta) {
    const Quad& q = mesh.quad(element);
    PointGeometry geo;
    geo.phi = shape_values(xi, eta);
    const auto ref = shape_gradients(xi, eta);
    double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
    for (int k = 0; k < 4; ++k) {
        const Point& p = mesh.node(q[k]);
        geo.x.x += geo.phi[k] * p.x;
        geo.x.y += geo.phi[k] * p.y;
        j00 += p.x * ref[k][0];
        j01 += p.x * ref[k][1];
        j10 += p.y * ref[k][0];
        j11 += p.y * ref[k][1];
    }
    geo.det_j = j00 * j11 - j01 * j10;
    const double inv = 1.0 / geo.det_j;
    for (int k = 0; k < 4; ++k) {
        geo.grad[k][0] = inv * (j11 * ref[k][0] - j10 * ref[k][1]);
        geo.grad[k][1] = inv * (-j01 * ref[k][0] + j00 * ref[k][1]);
    }
    return geo;
}

}  // namespace crimesim::fem
