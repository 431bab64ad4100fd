#pragma once

#include "crimesim/assembly.hpp"
#include "crimesim/error.hpp"
#include "crimesim/field.hpp"
#include "crimesim/krylov.hpp"
#include "crimesim/mesh.hpp"
#include "crimesim/params.hpp"

#include <exception>
#include <functional>
#include <optional>
#include <vector>

namespace crimesim::pde {

struct PdeState {
    double time = 0.0;
    ScalarField A;
    ScalarField rho;
    long step_index = 0;
};

enum class CouplingMode { Loose, Strong, Monolithic };
enum class NormKind { Consistent, Lumped };

struct SolverConfig {
    CouplingMode mode = CouplingMode::Strong;
    double tol1 = 1e-6;
    double tol2 = 1e-6;
    int max_fixed_point_iters = 200;
    double dt = 1.0 / 25.0;
    double linear_tol = 1e-12;
    int linear_max_iter = -1;  ///< <= 0 selects 10 * n
    Preconditioner preconditioner = Preconditioner::Jacobi;
    NormKind norm = NormKind::Consistent;
    double a_floor = 1e-10;

    void validate() const;
};

struct StepStats {
    int fixed_point_iters = 0;
    std::vector<double> incr_A;    ///< relative increment of A per fixed-point pass
    std::vector<double> incr_rho;
    std::vector<SolveReport> step1;
    std::vector<SolveReport> step2;
    std::size_t negative_rho_nodes = 0;  ///< undershoots after the step; not an error

    int linear_iters_1() const;
    int linear_iters_2() const;
};

/// Fixed-point or Newton iteration that did not meet its tolerance, or
/// whose iterate left A > 0.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, StepStats stats) : Error(what), stats_(std::move(stats)) {}
    const StepStats& stats() const noexcept { return stats_; }

private:
    StepStats stats_;
};

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residual_norms;  ///< ||R|| before each update, then after the last
};

/// Backward-Euler integrator of the nondimensional attractiveness/density
/// system on a fixed mesh. Time-independent operators and loads are built
/// once; the mesh must outlive the stepper.
class Stepper {
public:
    Stepper(const Mesh& mesh, NondimParams params, SolverConfig config);

    const SolverConfig& config() const noexcept { return config_; }
    const NondimParams& params() const noexcept { return params_; }
    const fem::FeSpace& space() const noexcept { return space_; }
    const SparseMatrix& mass() const noexcept { return mass_; }

    /// Advances by one step using config().mode.
    StepStats step(PdeState& state) const;
    StepStats step_loose(PdeState& state) const;
    /// Nonpositive A in the input or the accepted state raises DegeneracyError.
    StepStats step_strong(PdeState& state) const;
    NewtonReport step_newton(PdeState& state) const;

    /// Step-1 system matrix (1+dt)/dt M + K_eta - N(rho).
    SparseMatrix attractiveness_matrix(std::span<const double> rho) const;
    /// Step-2 system matrix 1/dt M + K - D(A) + N(A).
    SparseMatrix density_matrix(std::span<const double> a) const;
    std::vector<double> attractiveness_rhs(std::span<const double> a_prev) const;
    std::vector<double> density_rhs(std::span<const double> rho_prev) const;

    /// Norm used by the stopping criterion: sqrt(v^T M v), or the lumped variant.
    double norm(std::span<const double> v) const;
    /// M v, or the lumped mass times v, matching norm().
    std::vector<double> weighted(std::span<const double> v) const;

private:
    void check_state(const PdeState& state) const;
    void finish_step(PdeState& state, std::vector<double> a, std::vector<double> rho, StepStats& stats) const;

    const Mesh& mesh_;
    NondimParams params_;
    SolverConfig config_;
    fem::FeSpace space_;
    SparseMatrix mass_;
    SparseMatrix stiffness_;      ///< unit diffusion
    SparseMatrix base_attr_;      ///< (1+dt)/dt M + K_eta
    SparseMatrix base_density_;   ///< 1/dt M + K
    std::vector<double> load_attr_;
    std::vector<double> load_density_;
    std::vector<double> lumped_;
};

/// Free-function forms; each builds a Stepper, so prefer Stepper in loops.
StepStats step_loose(PdeState& state, const Mesh& mesh, const NondimParams& params, const SolverConfig& cfg);
StepStats step_strong(PdeState& state, const Mesh& mesh, const NondimParams& params, const SolverConfig& cfg);
NewtonReport step_monolithic_newton(PdeState& state, const Mesh& mesh, const NondimParams& params,
                                    const SolverConfig& cfg);

/// A0 = A_st + B0 and rho0, each with sparse Gaussian noise.
PdeState initial_state(const Mesh& mesh, const Coefficient& a_st, const Coefficient& b0, double rho0,
                       const NoiseSpec& noise);

struct StepRecord {
    long step = 0;
    double time = 0.0;
    int iters = 0;
    double incr_A = 0.0;
    double incr_rho = 0.0;
    double min_A = 0.0, max_A = 0.0, min_rho = 0.0, max_rho = 0.0;
    int linear_iters_1 = 0;
    int linear_iters_2 = 0;
};

struct Snapshot {
    long step = 0;
    double time = 0.0;
    std::vector<double> A;
    std::vector<double> rho;
};

struct RunOptions {
    double t_end = 0.0;
    int output_every = 50;        ///< snapshot cadence in steps; the final step is always kept
    bool keep_snapshots = true;
    std::function<void(const PdeState&, const StepRecord&)> on_step;
    std::function<void(const PdeState&)> on_snapshot;
};

struct RunResult {
    std::vector<Snapshot> snapshots;
    std::vector<StepRecord> log;
    PdeState final_state;
    std::exception_ptr error;  ///< set when a step failed; log and snapshots cover the completed steps

    bool ok() const noexcept { return !error; }
    double average_iterations() const;
};

/// Number of steps of size dt that reach t_end; t_end must be a multiple of dt.
long step_count(double t_end, double dt);

RunResult run(const Mesh& mesh, const NondimParams& params, const SolverConfig& cfg, PdeState initial,
              const RunOptions& options);

}  // namespace crimesim::pde
