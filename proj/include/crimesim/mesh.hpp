#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace crimesim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Node indices of a quadrilateral, counter-clockwise.
using Quad = std::array<int, 4>;

/// Unstructured quadrilateral mesh. Immutable after construction; the
/// constructor validates indices and corner Jacobians.
class Mesh {
public:
    Mesh(std::vector<Point> nodes, std::vector<Quad> quads);

    std::uint64_t id() const noexcept { return id_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t quad_count() const noexcept { return quads_.size(); }

    std::span<const Point> nodes() const noexcept { return nodes_; }
    std::span<const Quad> quads() const noexcept { return quads_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    const Quad& quad(std::size_t e) const { return quads_[e]; }

    /// Nodes lying on an edge used by exactly one element, ascending.
    std::span<const int> boundary_nodes() const noexcept { return boundary_nodes_; }
    bool is_boundary(std::size_t node) const { return boundary_flag_[node] != 0; }

    /// Nodes sharing at least one element with `node` (excluding itself), ascending.
    std::span<const int> adjacency(std::size_t node) const {
        return {adj_idx_.data() + adj_ptr_[node], adj_idx_.data() + adj_ptr_[node + 1]};
    }

    /// Nominal spacing for meshes built by structured_quad_mesh; 0 otherwise.
    double spacing() const noexcept { return spacing_; }
    void set_spacing(double h) noexcept { spacing_ = h; }

    double quad_area(std::size_t e) const;
    double total_area() const;

    std::array<Point, 2> bounding_box() const;

private:
    std::uint64_t id_;
    std::vector<Point> nodes_;
    std::vector<Quad> quads_;
    std::vector<int> boundary_nodes_;
    std::vector<char> boundary_flag_;
    std::vector<int> adj_ptr_;
    std::vector<int> adj_idx_;
    double spacing_ = 0.0;
};

/// Cartesian lattice of sites (i, j) at origin + h * (i, j).
struct Lattice {
    int nx = 2;
    int ny = 2;
    double h = 1.0;
    Point origin{};

    void validate() const;
    std::size_t site_count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    Point position(int i, int j) const { return {origin.x + h * i, origin.y + h * j}; }
};

/// Rectangle [0,lx] x [0,ly] split into nx x ny equal quads. Node (i, j) has
/// index j * (nx + 1) + i.
Mesh structured_quad_mesh(double lx, double ly, int nx, int ny, Point origin = {});

/// Quarter-area lumping: each quad contributes area/4 to each of its nodes.
std::vector<double> nodal_areas(const Mesh& mesh);

/// Plain-text mesh I/O; see README for the format.
Mesh load_mesh(const std::string& path);
Mesh parse_mesh(std::istream& in);
void save_mesh(const Mesh& mesh, const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace crimesim
