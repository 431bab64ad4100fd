#pragma once

#include "crimesim/params.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace crimesim {

class Mesh;

/// Nodal coefficient vector bound to the mesh it was created on.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(const Mesh& mesh, double fill);
    ScalarField(const Mesh& mesh, std::vector<double> values);

    std::uint64_t mesh_id() const noexcept { return mesh_id_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::vector<double>& data() noexcept { return values_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    double min() const;
    double max() const;
    double mean() const;
    bool all_finite() const;

    bool same_mesh(const Mesh& mesh) const;

private:
    std::uint64_t mesh_id_ = 0;
    std::vector<double> values_;
};

enum class NoiseTarget { B, Rho };

/// Adds chi_delta * N(0, sigma^2) independently at each node, in node order.
/// The stream depends only on (spec.seed, target), so repeated calls agree
/// bit for bit. Values are not clamped.
ScalarField apply_sparse_noise(const ScalarField& base, const NoiseSpec& spec, NoiseTarget target);

}  // namespace crimesim
