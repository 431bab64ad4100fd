#pragma once

#include "crimesim/mesh.hpp"

#include <array>
#include <vector>

namespace crimesim::fem {

/// Tensor-product Gauss rule on the reference square [-1,1]^2.
struct QuadratureRule {
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;

    /// n x n Gauss-Legendre points, 1 <= n <= 6.
    static QuadratureRule gauss(int n);
};

/// Bilinear basis on [-1,1]^2; node k sits at the k-th corner in the order
/// (-1,-1), (1,-1), (1,1), (-1,1).
std::array<double, 4> shape_values(double xi, double eta);
std::array<std::array<double, 2>, 4> shape_gradients(double xi, double eta);

/// Bilinear map of one element evaluated at a reference point.
struct PointGeometry {
    Point x;                                   ///< physical position
    double det_j = 0.0;                        ///< Jacobian determinant
    std::array<double, 4> phi{};               ///< basis values
    std::array<std::array<double, 2>, 4> grad{};  ///< physical basis gradients
};

PointGeometry map_reference_point(const Mesh& mesh, std::size_t element, double xi, double eta);

}  // namespace crimesim::fem
