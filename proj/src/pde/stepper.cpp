#include "crimesim/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crimesim::pde {

void SolverConfig::validate() const {
    if (!(tol1 > 0.0) || !(tol2 > 0.0)) throw ParameterError("stopping tolerances must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("time step must be positive");
    if (max_fixed_point_iters < 1) throw ParameterError("max_fixed_point_iters must be at least 1");
    if (!(linear_tol > 0.0)) throw ParameterError("linear tolerance must be positive");
    if (!(a_floor > 0.0)) throw ParameterError("attractiveness floor must be positive");
}

int StepStats::linear_iters_1() const {
    int s = 0;
    for (const auto& r : step1) s += r.iterations;
    return s;
}

int StepStats::linear_iters_2() const {
    int s = 0;
    for (const auto& r : step2) s += r.iterations;
    return s;
}

Stepper::Stepper(const Mesh& mesh, NondimParams params, SolverConfig config)
    : mesh_(mesh), params_(std::move(params)), config_(config), space_(mesh) {
    config_.validate();
    params_.validate();
    if (params_.a_st.kind() == Coefficient::Kind::Cellwise)
        throw ParameterError("A_st must be constant or nodal");
    const double dt = config_.dt;
    mass_ = fem::assemble_mass(space_);
    stiffness_ = fem::assemble_stiffness(space_, 1.0);
    const SparseMatrix k_eta = fem::assemble_stiffness(space_, params_.eta);
    base_attr_ = add_scaled({{(1.0 + dt) / dt, mass_}, {1.0, k_eta}});
    base_density_ = add_scaled({{1.0 / dt, mass_}, {1.0, stiffness_}});

    const std::vector<double> zero(mesh.node_count(), 0.0);
    load_attr_ = fem::assemble_rhs_A(space_, params_.a_st, params_.eta, zero, dt, mass_);
    load_density_ = fem::assemble_rhs_rho(space_, params_.source, zero, dt, mass_);

    lumped_.assign(mesh.node_count(), 0.0);
    const auto& pat = mass_.pattern();
    const auto mv = mass_.values();
    for (int i = 0; i < pat.rows; ++i)
        for (int p = pat.row_ptr[i]; p < pat.row_ptr[i + 1]; ++p) lumped_[i] += mv[p];
}

SparseMatrix Stepper::attractiveness_matrix(std::span<const double> rho) const {
    SparseMatrix s = base_attr_;
    fem::add_weighted_mass(space_, rho, -1.0, s);
    return s;
}

SparseMatrix Stepper::density_matrix(std::span<const double> a) const {
    SparseMatrix s = base_density_;
    fem::add_reaction_advection(space_, a, 1.0, -1.0, s, {config_.a_floor, 2});
    return s;
}

std::vector<double> Stepper::attractiveness_rhs(std::span<const double> a_prev) const {
    std::vector<double> b = spmv(mass_, a_prev);
    const double inv = 1.0 / config_.dt;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = load_attr_[i] + inv * b[i];
    return b;
}

std::vector<double> Stepper::density_rhs(std::span<const double> rho_prev) const {
    std::vector<double> b = spmv(mass_, rho_prev);
    const double inv = 1.0 / config_.dt;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = load_density_[i] + inv * b[i];
    return b;
}

std::vector<double> Stepper::weighted(std::span<const double> v) const {
    if (config_.norm == NormKind::Consistent) return spmv(mass_, v);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = lumped_[i] * v[i];
    return out;
}

double Stepper::norm(std::span<const double> v) const {
    const auto mv = weighted(v);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * mv[i];
    return std::sqrt(std::max(s, 0.0));
}

namespace {

[[noreturn]] void nonpositive(const Mesh& mesh, std::size_t node, double value) {
    std::size_t element = 0;
    for (std::size_t e = 0; e < mesh.quad_count(); ++e) {
        const auto& q = mesh.quad(e);
        if (std::find(q.begin(), q.end(), static_cast<int>(node)) != q.end()) {
            element = e;
            break;
        }
    }
    throw DegeneracyError("attractiveness " + std::to_string(value) + " at node " + std::to_string(node) +
                              " is not positive",
                          element);
}

}  // namespace

void Stepper::check_state(const PdeState& state) const {
    if (!state.A.same_mesh(mesh_) || !state.rho.same_mesh(mesh_))
        throw ParameterError("state fields do not belong to the stepper's mesh");
    const auto a = state.A.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] > 0.0)) nonpositive(mesh_, i, a[i]);
}

namespace {

// ||next - prev|| / ||prev||, or the absolute increment when ||prev|| = 0.
// `norm_sq` holds ||prev||^2 on entry and ||next||^2 on return, obtained
// from the same mass product as the increment.
double relative_increment(const Stepper& s, std::span<const double> next, std::span<const double> prev,
                          double& norm_sq) {
    std::vector<double> d(next.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = next[i] - prev[i];
    const auto md = s.weighted(d);
    double dd = 0.0, pd = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        dd += d[i] * md[i];
        pd += prev[i] * md[i];
    }
    const double prev_norm = std::sqrt(std::max(norm_sq, 0.0));
    norm_sq = norm_sq + 2.0 * pd + dd;
    const double num = std::sqrt(std::max(dd, 0.0));
    return prev_norm > 0.0 ? num / prev_norm : num;
}

SolverOptions linear_options(const SolverConfig& c) {
    return {c.linear_tol, c.linear_max_iter, c.preconditioner};
}

}  // namespace

void Stepper::finish_step(PdeState& state, std::vector<double> a, std::vector<double> rho, StepStats& stats) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(rho[i]))
            throw ConvergenceError("non-finite value at node " + std::to_string(i), stats);
        if (!(a[i] > 0.0)) nonpositive(mesh_, i, a[i]);
        if (rho[i] < 0.0) ++stats.negative_rho_nodes;
    }
    state.A.data() = std::move(a);
    state.rho.data() = std::move(rho);
    state.step_index += 1;
    state.time = static_cast<double>(state.step_index) * config_.dt;
}

StepStats Stepper::step(PdeState& state) const {
    switch (config_.mode) {
        case CouplingMode::Loose: return step_loose(state);
        case CouplingMode::Strong: return step_strong(state);
        case CouplingMode::Monolithic: {
            const NewtonReport r = step_newton(state);
            StepStats s;
            s.fixed_point_iters = r.iterations;
            return s;
        }
    }
    return {};
}

StepStats Stepper::step_loose(PdeState& state) const {
    check_state(state);
    StepStats stats;
    const auto opts = linear_options(config_);
    std::vector<double> a(state.A.values().begin(), state.A.values().end());
    std::vector<double> rho(state.rho.values().begin(), state.rho.values().end());

    stats.step1.push_back(solve(attractiveness_matrix(state.rho.values()), attractiveness_rhs(state.A.values()), a, opts));
    stats.step2.push_back(solve(density_matrix(a), density_rhs(state.rho.values()), rho, opts));
    double norm_a = norm(state.A.values()), norm_rho = norm(state.rho.values());
    norm_a *= norm_a;
    norm_rho *= norm_rho;
    stats.incr_A.push_back(relative_increment(*this, a, state.A.values(), norm_a));
    stats.incr_rho.push_back(relative_increment(*this, rho, state.rho.values(), norm_rho));
    stats.fixed_point_iters = 1;
    finish_step(state, std::move(a), std::move(rho), stats);
    return stats;
}

StepStats Stepper::step_strong(PdeState& state) const {
    check_state(state);
    StepStats stats;
    const auto opts = linear_options(config_);
    const auto b_attr = attractiveness_rhs(state.A.values());
    const auto b_density = density_rhs(state.rho.values());
    std::vector<double> a_k(state.A.values().begin(), state.A.values().end());
    std::vector<double> rho_k(state.rho.values().begin(), state.rho.values().end());
    double norm_a = norm(a_k), norm_rho = norm(rho_k);
    norm_a *= norm_a;
    norm_rho *= norm_rho;

    for (int k = 0; k < config_.max_fixed_point_iters; ++k) {
        std::vector<double> a_next = a_k;
        stats.step1.push_back(solve(attractiveness_matrix(rho_k), b_attr, a_next, opts));
        std::vector<double> rho_next = rho_k;
        // An iterate that leaves A > 0 is not a solution of the step: the
        // iteration has diverged, whereas a nonpositive input is degenerate.
        const SparseMatrix density = [&] {
            try {
                return density_matrix(a_next);
            } catch (const DegeneracyError& e) {
                stats.fixed_point_iters = k + 1;
                throw ConvergenceError("fixed-point iterate " + std::to_string(k + 1) + " lost positivity (" +
                                           e.what() + ")",
                                       stats);
            }
        }();
        stats.step2.push_back(solve(density, b_density, rho_next, opts));

        const double inc_a = relative_increment(*this, a_next, a_k, norm_a);
        const double inc_rho = relative_increment(*this, rho_next, rho_k, norm_rho);
        stats.incr_A.push_back(inc_a);
        stats.incr_rho.push_back(inc_rho);
        stats.fixed_point_iters = k + 1;
        a_k = std::move(a_next);
        rho_k = std::move(rho_next);
        if (!std::isfinite(inc_a) || !std::isfinite(inc_rho))
            throw ConvergenceError("fixed-point iteration produced non-finite increments", stats);
        if (inc_a < config_.tol1 && inc_rho < config_.tol2) {
            finish_step(state, std::move(a_k), std::move(rho_k), stats);
            return stats;
        }
    }
    throw ConvergenceError("fixed-point iteration did not converge in " +
                               std::to_string(config_.max_fixed_point_iters) + " iterations (last increments " +
                               std::to_string(stats.incr_A.back()) + ", " + std::to_string(stats.incr_rho.back()) +
                               ")",
                           stats);
}

StepStats step_loose(PdeState& state, const Mesh& mesh, const NondimParams& params, const SolverConfig& cfg) {
    return Stepper(mesh, params, cfg).step_loose(state);
}

StepStats step_strong(PdeState& state, const Mesh& mesh, const NondimParams& params, const SolverConfig& cfg) {
    return Stepper(mesh, params, cfg).step_strong(state);
}

NewtonReport step_monolithic_newton(PdeState& state, const Mesh& mesh, const NondimParams& params,
                                    const SolverConfig& cfg) {
    return Stepper(mesh, params, cfg).step_newton(state);
}

PdeState initial_state(const Mesh& mesh, const Coefficient& a_st, const Coefficient& b0, double rho0,
                       const NoiseSpec& noise) {
    noise.validate();
    for (const Coefficient* c : {&a_st, &b0}) {
        if (c->kind() == Coefficient::Kind::Cellwise) throw ParameterError("initial fields must be constant or nodal");
        if (c->kind() == Coefficient::Kind::Nodal && c->values().size() != mesh.node_count())
            throw ParameterError("nodal initial field length does not match mesh");
    }
    auto nodal = [&](const Coefficient& c) {
        return c.is_constant() ? std::vector<double>(mesh.node_count(), c.value())
                               : std::vector<double>(c.values().begin(), c.values().end());
    };
    const ScalarField b = apply_sparse_noise(ScalarField(mesh, nodal(b0)), noise, NoiseTarget::B);
    const auto a_static = nodal(a_st);
    PdeState s;
    std::vector<double> a(mesh.node_count());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a_static[i] + b[i];
    s.A = ScalarField(mesh, std::move(a));
    s.rho = apply_sparse_noise(ScalarField(mesh, rho0), noise, NoiseTarget::Rho);
    return s;
}

}  // namespace crimesim::pde
