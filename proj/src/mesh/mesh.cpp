#include "crimesim/mesh.hpp"

#include "crimesim/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace crimesim {

namespace {

std::uint64_t next_mesh_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

Mesh::Mesh(std::vector<Point> nodes, std::vector<Quad> quads)
    : id_(next_mesh_id()), nodes_(std::move(nodes)), quads_(std::move(quads)) {
    const auto n = static_cast<long>(nodes_.size());
    if (quads_.empty()) throw ParameterError("mesh has no elements");
    for (const Point& p : nodes_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ParameterError("mesh node coordinate is not finite");

    for (std::size_t e = 0; e < quads_.size(); ++e) {
        const Quad& q = quads_[e];
        for (int idx : q)
            if (idx < 0 || idx >= n) throw TopologyError("node index out of range", e);
        for (int k = 0; k < 4; ++k)
            for (int l = k + 1; l < 4; ++l)
                if (q[k] == q[l]) throw TopologyError("repeated node", e);
        // Jacobian of the bilinear map at each corner, up to a positive factor.
        for (int k = 0; k < 4; ++k) {
            const Point& c = nodes_[q[k]];
            const Point& next = nodes_[q[(k + 1) % 4]];
            const Point& prev = nodes_[q[(k + 3) % 4]];
            if (!(cross(c, next, prev) > 0.0))
                throw TopologyError("non-positive Jacobian (element must be counter-clockwise and non-degenerate)", e);
        }
    }

    // Boundary: edges used by exactly one element.
    std::unordered_map<std::uint64_t, int> edge_count;
    edge_count.reserve(quads_.size() * 4);
    auto key = [](int a, int b) {
        const auto lo = static_cast<std::uint64_t>(std::min(a, b));
        const auto hi = static_cast<std::uint64_t>(std::max(a, b));
        return (hi << 32) | lo;
    };
    for (const Quad& q : quads_)
        for (int k = 0; k < 4; ++k) ++edge_count[key(q[k], q[(k + 1) % 4])];
    boundary_flag_.assign(nodes_.size(), 0);
    for (const Quad& q : quads_)
        for (int k = 0; k < 4; ++k)
            if (edge_count[key(q[k], q[(k + 1) % 4])] == 1) {
                boundary_flag_[q[k]] = 1;
                boundary_flag_[q[(k + 1) % 4]] = 1;
            }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (boundary_flag_[i]) boundary_nodes_.push_back(static_cast<int>(i));

    // Node adjacency through shared elements, as a compressed row structure.
    std::vector<std::vector<int>> adj(nodes_.size());
    for (const Quad& q : quads_)
        for (int a : q)
            for (int b : q)
                if (a != b) adj[a].push_back(b);
    adj_ptr_.assign(nodes_.size() + 1, 0);
    for (std::size_t i = 0; i < adj.size(); ++i) {
        auto& row = adj[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        adj_ptr_[i + 1] = adj_ptr_[i] + static_cast<int>(row.size());
    }
    adj_idx_.reserve(adj_ptr_.back());
    for (const auto& row : adj) adj_idx_.insert(adj_idx_.end(), row.begin(), row.end());
}

double Mesh::quad_area(std::size_t e) const {
    const Quad& q = quads_[e];
    const Point& a = nodes_[q[0]];
    const Point& b = nodes_[q[1]];
    const Point& c = nodes_[q[2]];
    const Point& d = nodes_[q[3]];
    // Shoelace formula.
    return 0.5 * ((a.x * b.y - b.x * a.y) + (b.x * c.y - c.x * b.y) + (c.x * d.y - d.x * c.y) +
                  (d.x * a.y - a.x * d.y));
}

double Mesh::total_area() const {
    double sum = 0.0;
    for (std::size_t e = 0; e < quads_.size(); ++e) sum += quad_area(e);
    return sum;
}

std::array<Point, 2> Mesh::bounding_box() const {
    Point lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Point hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const Point& p : nodes_) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    return {lo, hi};
}

void Lattice::validate() const {
    if (nx < 2 || ny < 2) throw ParameterError("lattice needs at least 2 sites per direction");
    if (!(h > 0.0)) throw ParameterError("lattice spacing must be positive");
}

Mesh structured_quad_mesh(double lx, double ly, int nx, int ny, Point origin) {
    if (nx < 1 || ny < 1) throw ParameterError("structured mesh needs at least one cell per direction");
    if (!(lx > 0.0) || !(ly > 0.0)) throw ParameterError("structured mesh lengths must be positive");

    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.push_back({origin.x + lx * i / nx, origin.y + ly * j / ny});

    std::vector<Quad> quads;
    quads.reserve(static_cast<std::size_t>(nx) * ny);
    const int stride = nx + 1;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n0 = j * stride + i;
            quads.push_back({n0, n0 + 1, n0 + 1 + stride, n0 + stride});
        }

    Mesh mesh(std::move(nodes), std::move(quads));
    mesh.set_spacing(lx / nx);
    return mesh;
}

std::vector<double> nodal_areas(const Mesh& mesh) {
    std::vector<double> area(mesh.node_count(), 0.0);
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const double quarter = 0.25 * mesh.quad_area(e);
        for (int n : mesh.quad(e)) area[n] += quarter;
    }
    return area;
}

}  // namespace crimesim
