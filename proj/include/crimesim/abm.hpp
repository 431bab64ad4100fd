#pragma once

#include "crimesim/mesh.hpp"
#include "crimesim/params.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace crimesim::abm {

/// Dimensional lattice-model parameters. `a_static_field`, when non-empty,
/// overrides the constant params.a_static per site.
struct AbmParams {
    DimensionalParams params;
    std::vector<double> a_static_field;

    double a_static(std::size_t site) const {
        return a_static_field.empty() ? params.a_static : a_static_field[site];
    }
};

struct LatticeState {
    std::vector<double> B;
    std::vector<double> n;  ///< integer-valued in stochastic mode
    double t = 0.0;
    long step = 0;
};

enum class Engine { Deterministic, Stochastic };

/// Homogeneous stationary state of the lattice model: B = theta Gamma / omega,
/// n = Gamma dt / (1 - exp(-A dt)).
struct AbmEquilibrium {
    double A_bar = 0.0;
    double B_bar = 0.0;
    double n_bar = 0.0;
};
AbmEquilibrium equilibrium(const DimensionalParams& p);

/// p = 1 - exp(-A dt).
double burglary_probability(double a, double dt);

/// Sum of the four neighbours minus four times the centre; a missing
/// neighbour contributes the centre value.
std::vector<double> lattice_laplacian(const Lattice& lattice, std::span<const double> field);

std::vector<double> attractiveness(const Lattice& lattice, const AbmParams& p, std::span<const double> b);

/// B' = [B + (eta/4) lap(B)] (1 - omega dt) + theta E.
std::vector<double> step_B(const Lattice& lattice, const AbmParams& p, std::span<const double> b,
                           std::span<const double> events);

/// Expected criminal counts after one step. The random walk is reflecting:
/// a step toward a missing neighbour leaves the criminal in place, which is
/// weighted as if the ghost site had the centre's attractiveness.
std::vector<double> step_n_deterministic(const Lattice& lattice, const AbmParams& p, const LatticeState& state);

/// Mean-field step: E = n p, then B and n updates from the same time level.
LatticeState step_deterministic(const Lattice& lattice, const AbmParams& p, const LatticeState& state);

/// Agent-level step. Draws come from streams seeded by (seed, step, row).
LatticeState step_stochastic(const Lattice& lattice, const AbmParams& p, const LatticeState& state,
                             std::uint64_t seed);

struct AbmSnapshot {
    long step = 0;
    double t = 0.0;
    std::vector<double> A;
    std::vector<double> n;
};

struct AbmStepRecord {
    long step = 0;
    double t = 0.0;
    double total_n = 0.0;
    double total_burglaries = 0.0;  ///< events during the step (expected count in deterministic mode)
    double mean_B = 0.0;
};

struct AbmRunOptions {
    Engine engine = Engine::Deterministic;
    long steps = 0;
    int output_every = 50;
    std::uint64_t seed = 0;
    bool keep_snapshots = true;
    std::function<void(const LatticeState&, const AbmStepRecord&)> on_step;
};

struct AbmRunResult {
    std::vector<AbmSnapshot> snapshots;
    std::vector<AbmStepRecord> log;
    LatticeState final_state;
};

/// Homogeneous state at the model equilibrium, optionally with n rounded to
/// integers for the stochastic engine.
LatticeState equilibrium_state(const Lattice& lattice, const AbmParams& p, bool integer_n);

AbmRunResult run_abm(const Lattice& lattice, const AbmParams& p, LatticeState initial, const AbmRunOptions& options);

/// Nondimensional views of a lattice state: A/omega, (theta/omega) n, and
/// site positions scaled by 2 sqrt(omega dt) / h.
struct NondimView {
    std::vector<double> A;
    std::vector<double> rho;
    double spacing = 0.0;
    double time = 0.0;
};
NondimView nondimensional_view(const Lattice& lattice, const AbmParams& p, const LatticeState& state);

/// Structured mesh whose nodes coincide with the lattice sites in
/// nondimensional coordinates; node i of the mesh is site i.
Mesh lattice_mesh(const Lattice& lattice, const AbmParams& p);

}  // namespace crimesim::abm
