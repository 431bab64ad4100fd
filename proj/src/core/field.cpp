#include "crimesim/field.hpp"

#include "crimesim/error.hpp"
#include "crimesim/mesh.hpp"
#include "crimesim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crimesim {

ScalarField::ScalarField(const Mesh& mesh, double fill)
    : mesh_id_(mesh.id()), values_(mesh.node_count(), fill) {}

ScalarField::ScalarField(const Mesh& mesh, std::vector<double> values)
    : mesh_id_(mesh.id()), values_(std::move(values)) {
    if (values_.size() != mesh.node_count())
        throw ParameterError("field length does not match mesh node count");
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::mean() const {
    return values_.empty() ? 0.0
                           : std::accumulate(values_.begin(), values_.end(), 0.0) /
                                 static_cast<double>(values_.size());
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool ScalarField::same_mesh(const Mesh& mesh) const {
    return mesh_id_ == mesh.id() && values_.size() == mesh.node_count();
}

ScalarField apply_sparse_noise(const ScalarField& base, const NoiseSpec& spec, NoiseTarget target) {
    spec.validate();
    const bool is_b = target == NoiseTarget::B;
    const double sigma = is_b ? spec.sigma_b : spec.sigma_rho;
    const double delta = is_b ? spec.delta_b : spec.delta_rho;

    ScalarField out = base;
    if (delta == 0.0) return out;

    NormalStream stream(derive_seed(spec.seed, is_b ? 0x42 : 0x72));
    auto values = out.values();
    for (double& v : values) {
        // The selection draw is consumed even when delta == 1 so that the
        // node-to-deviate assignment does not depend on delta.
        const bool selected = stream.uniform() < delta;
        const double xi = stream.next();
        if (selected) v += sigma * xi;
    }
    return out;
}

}  // namespace crimesim
