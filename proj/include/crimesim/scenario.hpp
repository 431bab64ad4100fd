#pragma once

#include "crimesim/abm.hpp"
#include "crimesim/config.hpp"
#include "crimesim/mesh.hpp"
#include "crimesim/pde.hpp"

#include <memory>
#include <string>
#include <vector>

namespace crimesim::scenario {

std::vector<std::string> preset_names();
/// Configuration of a built-in scenario. Throws ConfigError for unknown names.
Config preset(const std::string& name);
/// Preset (when the config names one under `preset`) overlaid by the config's own keys.
Config resolve(const Config& config);
/// Throws ConfigError naming the first key outside the documented schema.
void check_keys(const Config& config);

/// Mesh described by `mesh` (structured, chicago-like, or a file path) and its `mesh.*` keys.
Mesh build_mesh(const Config& config);

struct PdeSetup {
    std::shared_ptr<const Mesh> mesh;
    NondimParams params;
    pde::SolverConfig solver;
    Coefficient b0;
    double rho0 = 0.0;
    NoiseSpec noise;
    double t_end = 0.0;
    int output_every = 50;

    pde::PdeState initial() const;
};

PdeSetup build_pde(const Config& config);

struct AbmSetup {
    Lattice lattice;
    abm::AbmParams params;
    abm::AbmRunOptions options;
    abm::LatticeState initial;
};

/// Lattice scenario. Missing abm.* keys fall back to the PDE keys scaled to
/// dimensional units (eta as is, a_static = a_st * omega).
AbmSetup build_abm(const Config& config);

}  // namespace crimesim::scenario
