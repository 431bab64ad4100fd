#include "crimesim/pde.hpp"

#include <algorithm>
#include <cmath>

namespace crimesim::pde {

double RunResult::average_iterations() const {
    if (log.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : log) s += r.iters;
    return s / static_cast<double>(log.size());
}

long step_count(double t_end, double dt) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be finite and nonnegative");
    if (!(dt > 0.0)) throw ParameterError("time step must be positive");
    const double ratio = t_end / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw ParameterError("t_end must be an integer multiple of dt");
    return static_cast<long>(rounded);
}

namespace {

StepRecord make_record(const PdeState& s, const StepStats& st) {
    StepRecord r;
    r.step = s.step_index;
    r.time = s.time;
    r.iters = st.fixed_point_iters;
    r.incr_A = st.incr_A.empty() ? 0.0 : st.incr_A.back();
    r.incr_rho = st.incr_rho.empty() ? 0.0 : st.incr_rho.back();
    r.min_A = s.A.min();
    r.max_A = s.A.max();
    r.min_rho = s.rho.min();
    r.max_rho = s.rho.max();
    r.linear_iters_1 = st.linear_iters_1();
    r.linear_iters_2 = st.linear_iters_2();
    return r;
}

}  // namespace

RunResult run(const Mesh& mesh, const NondimParams& params, const SolverConfig& cfg, PdeState initial,
              const RunOptions& options) {
    if (options.output_every < 1) throw ParameterError("output cadence must be at least one step");
    const long steps = step_count(options.t_end, cfg.dt);
    const Stepper stepper(mesh, params, cfg);

    RunResult result;
    result.final_state = std::move(initial);
    PdeState& state = result.final_state;
    auto snapshot = [&] {
        if (options.keep_snapshots)
            result.snapshots.push_back({state.step_index, state.time,
                                        std::vector<double>(state.A.values().begin(), state.A.values().end()),
                                        std::vector<double>(state.rho.values().begin(), state.rho.values().end())});
        if (options.on_snapshot) options.on_snapshot(state);
    };
    snapshot();

    for (long k = 0; k < steps; ++k) {
        try {
            const StepStats st = stepper.step(state);
            result.log.push_back(make_record(state, st));
            if (options.on_step) options.on_step(state, result.log.back());
        } catch (...) {
            result.error = std::current_exception();
            return result;
        }
        if ((k + 1) % options.output_every == 0 || k + 1 == steps) snapshot();
    }
    return result;
}

}  // namespace crimesim::pde
