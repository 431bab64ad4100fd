#include "crimesim/profiles.hpp"

#include "crimesim/error.hpp"
#include "crimesim/rng.hpp"

#include <algorithm>
#include <cmath>

namespace crimesim::profiles {

Coefficient piecewise_eta(const Mesh& mesh) {
    std::vector<double> eta(mesh.quad_count());
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        double y = 0.0;
        for (int k : mesh.quad(e)) y += mesh.node(k).y;
        y /= 4.0;
        eta[e] = y < 4.0 ? 0.9 : y < 8.0 ? 0.3 : y < 12.0 ? 0.12 : 0.03;
    }
    return Coefficient::cellwise(std::move(eta));
}

std::vector<double> random_indicator(const Mesh& mesh, double delta, std::uint64_t seed, std::uint64_t salt) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw ParameterError("indicator probability must lie in [0, 1]");
    Xoshiro256 rng(derive_seed(seed, salt));
    std::vector<double> chi(mesh.node_count());
    for (double& c : chi) c = rng.uniform() < delta ? 1.0 : 0.0;
    return chi;
}

namespace {

constexpr std::uint64_t kSourceSalt = 0x686977;  // "hiw"

HighwayFields build(const Mesh& mesh, std::uint64_t seed, double (*ridge)(Point, double), double l) {
    const auto chi = random_indicator(mesh, 0.1, seed, kSourceSalt);
    std::vector<double> a_st(mesh.node_count()), source(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const double r = ridge(mesh.node(i), l);
        a_st[i] = r / 30.0 + 1.0 / 30.0;
        source[i] = r + chi[i];
    }
    return {Coefficient::nodal(std::move(a_st)), Coefficient::nodal(std::move(source))};
}

double square_ridge(Point p, double l) {
    if (!(p.x > l / 2 && p.y < l / 2)) return 0.0;
    const double d = p.x + p.y - l;
    return std::exp(-20.0 * d * d);
}

double city_ridge(Point p, double) {
    const double d = p.x < 9.5 ? 20.8 - p.y : 32.4923 - 16.0 / 13.0 * p.x - p.y;
    return std::exp(-20.0 * d * d);
}

bool inside(const std::vector<Point>& poly, Point p) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point a = poly[i], b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

double polygon_area(const std::vector<Point>& poly) {
    double s = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        s += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
    return 0.5 * std::abs(s);
}

}  // namespace

HighwayFields highway_square(const Mesh& mesh, double l, std::uint64_t seed) {
    if (!(l > 0.0)) throw ParameterError("domain size must be positive");
    return build(mesh, seed, square_ridge, l);
}

HighwayFields highway_city(const Mesh& mesh, std::uint64_t seed) { return build(mesh, seed, city_ridge, 24.0); }

const std::vector<Point>& city_outline() {
    // Lake shore on the east, a westward arm in the north-west, narrowing to the south.
    static const std::vector<Point> outline = {
        {5.0, 0.5},   {12.0, 0.5},  {12.6, 3.5},  {14.0, 7.0},  {15.2, 10.5}, {15.6, 13.5},
        {14.8, 16.5}, {13.4, 19.5}, {12.6, 23.5}, {7.5, 23.5},  {7.5, 21.5},  {1.0, 21.5},
        {1.0, 18.0},  {5.0, 18.0},  {5.0, 11.0},  {3.5, 9.0},   {3.5, 4.0},   {5.0, 2.5}};
    return outline;
}

Mesh city_mesh(int target_nodes, std::uint64_t seed) {
    if (target_nodes < 16) throw ParameterError("target node count too small");
    const auto& outline = city_outline();
    const double h = std::sqrt(polygon_area(outline) / target_nodes);
    const int n = static_cast<int>(std::ceil(24.0 / h));

    // Cells whose centre lies inside the outline.
    std::vector<char> cell(static_cast<std::size_t>(n) * n, 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) cell[j * n + i] = inside(outline, {(i + 0.5) * h, (j + 0.5) * h});

    // Largest edge-connected piece.
    std::vector<int> label(cell.size(), -1);
    int best = -1;
    std::size_t best_size = 0;
    for (std::size_t s = 0; s < cell.size(); ++s) {
        if (!cell[s] || label[s] >= 0) continue;
        const int id = static_cast<int>(s);
        std::vector<int> stack{id};
        label[s] = id;
        std::size_t size = 0;
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            ++size;
            const int ci = c % n, cj = c / n;
            const int nb[4][2] = {{ci - 1, cj}, {ci + 1, cj}, {ci, cj - 1}, {ci, cj + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[1] < 0 || q[0] >= n || q[1] >= n) continue;
                const int d = q[1] * n + q[0];
                if (cell[d] && label[d] < 0) {
                    label[d] = id;
                    stack.push_back(d);
                }
            }
        }
        if (size > best_size) {
            best_size = size;
            best = id;
        }
    }

    // Number the used grid points row by row.
    const int stride = n + 1;
    std::vector<int> node_id(static_cast<std::size_t>(stride) * stride, -1);
    std::vector<int> used_cells;
    for (std::size_t s = 0; s < cell.size(); ++s)
        if (label[s] == best) used_cells.push_back(static_cast<int>(s));
    for (int c : used_cells) {
        const int ci = c % n, cj = c / n;
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) node_id[(cj + dj) * stride + ci + di] = 0;
    }
    std::vector<Point> nodes;
    for (int j = 0; j < stride; ++j)
        for (int i = 0; i < stride; ++i)
            if (node_id[j * stride + i] == 0) {
                node_id[j * stride + i] = static_cast<int>(nodes.size());
                nodes.push_back({i * h, j * h});
            }
    std::vector<Quad> quads;
    for (int c : used_cells) {
        const int ci = c % n, cj = c / n;
        const int g = cj * stride + ci;
        quads.push_back({node_id[g], node_id[g + 1], node_id[g + 1 + stride], node_id[g + stride]});
    }

    // Jitter nodes not on the boundary of the piece.
    std::vector<int> incident(nodes.size(), 0);
    for (const Quad& q : quads)
        for (int k : q) ++incident[k];
    Xoshiro256 rng(derive_seed(seed, 0x6369747921));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double dx = (2.0 * rng.uniform() - 1.0) * 0.2 * h;
        const double dy = (2.0 * rng.uniform() - 1.0) * 0.2 * h;
        if (incident[i] == 4) {
            nodes[i].x += dx;
            nodes[i].y += dy;
        }
    }
    return Mesh(std::move(nodes), std::move(quads));
}

}  // namespace crimesim::profiles
