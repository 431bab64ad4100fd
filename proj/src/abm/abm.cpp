#include "crimesim/abm.hpp"

#include "crimesim/error.hpp"
#include "crimesim/rng.hpp"

#include <cmath>
#include <string>

namespace crimesim::abm {

namespace {

constexpr int kDi[4] = {-1, 1, 0, 0};
constexpr int kDj[4] = {0, 0, -1, 1};

void check_sizes(const Lattice& lattice, std::span<const double> v, const char* name) {
    if (v.size() != lattice.site_count())
        throw ParameterError(std::string(name) + " has " + std::to_string(v.size()) + " entries, lattice has " +
                             std::to_string(lattice.site_count()) + " sites");
}

void check_params(const Lattice& lattice, const AbmParams& p) {
    lattice.validate();
    p.params.validate();
    if (!p.a_static_field.empty()) check_sizes(lattice, p.a_static_field, "a_static_field");
}

// Total outgoing weight of site (i, j): neighbour attractiveness, with a
// missing neighbour replaced by the centre value.
double walk_normalizer(const Lattice& lat, std::span<const double> a, int i, int j) {
    const double centre = a[lat.index(i, j)];
    double t = 0.0;
    for (int d = 0; d < 4; ++d) {
        const int ni = i + kDi[d], nj = j + kDj[d];
        t += (ni >= 0 && ni < lat.nx && nj >= 0 && nj < lat.ny) ? a[lat.index(ni, nj)] : centre;
    }
    return t;
}

std::vector<double> normalizers(const Lattice& lat, std::span<const double> a) {
    std::vector<double> t(lat.site_count());
    for (int j = 0; j < lat.ny; ++j)
        for (int i = 0; i < lat.nx; ++i) {
            const double v = walk_normalizer(lat, a, i, j);
            if (!(v > 0.0))
                throw DegeneracyError("neighbourhood attractiveness of site (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ") is not positive",
                                      lat.index(i, j));
            t[lat.index(i, j)] = v;
        }
    return t;
}

double poisson_draw(Xoshiro256& rng, double lambda) {
    if (lambda <= 0.0) return 0.0;
    const double limit = std::exp(-lambda);
    double prod = rng.uniform();
    int k = 0;
    while (prod > limit) {
        ++k;
        prod *= rng.uniform();
    }
    return k;
}

}  // namespace

AbmEquilibrium equilibrium(const DimensionalParams& p) {
    p.validate();
    if (!(p.omega > 0.0)) throw ParameterError("omega must be positive for an equilibrium to exist");
    AbmEquilibrium e;
    e.B_bar = p.theta * p.gamma / p.omega;
    e.A_bar = p.a_static + e.B_bar;
    const double q = burglary_probability(e.A_bar, p.dt);
    if (!(q > 0.0)) throw ParameterError("equilibrium attractiveness must be positive");
    e.n_bar = p.gamma * p.dt / q;
    return e;
}

double burglary_probability(double a, double dt) { return -std::expm1(-a * dt); }

std::vector<double> lattice_laplacian(const Lattice& lat, std::span<const double> field) {
    check_sizes(lat, field, "field");
    std::vector<double> out(field.size());
    for (int j = 0; j < lat.ny; ++j)
        for (int i = 0; i < lat.nx; ++i) {
            const double c = field[lat.index(i, j)];
            double s = 0.0;
            for (int d = 0; d < 4; ++d) {
                const int ni = i + kDi[d], nj = j + kDj[d];
                s += (ni >= 0 && ni < lat.nx && nj >= 0 && nj < lat.ny) ? field[lat.index(ni, nj)] : c;
            }
            out[lat.index(i, j)] = s - 4.0 * c;
        }
    return out;
}

std::vector<double> attractiveness(const Lattice& lattice, const AbmParams& p, std::span<const double> b) {
    check_sizes(lattice, b, "B");
    std::vector<double> a(b.size());
    for (std::size_t s = 0; s < a.size(); ++s) a[s] = p.a_static(s) + b[s];
    return a;
}

std::vector<double> step_B(const Lattice& lattice, const AbmParams& p, std::span<const double> b,
                           std::span<const double> events) {
    check_params(lattice, p);
    check_sizes(lattice, events, "events");
    const auto lap = lattice_laplacian(lattice, b);
    const double decay = 1.0 - p.params.omega * p.params.dt;
    const double k = p.params.eta / 4.0;
    std::vector<double> out(b.size());
    for (std::size_t s = 0; s < b.size(); ++s) out[s] = (b[s] + k * lap[s]) * decay + p.params.theta * events[s];
    return out;
}

std::vector<double> step_n_deterministic(const Lattice& lat, const AbmParams& p, const LatticeState& state) {
    check_params(lat, p);
    check_sizes(lat, state.n, "n");
    const auto a = attractiveness(lat, p, state.B);
    const auto t = normalizers(lat, a);
    const double dt = p.params.dt;

    // Flux leaving each site per unit target attractiveness.
    std::vector<double> flux(a.size());
    for (std::size_t s = 0; s < a.size(); ++s)
        flux[s] = state.n[s] * (1.0 - burglary_probability(a[s], dt)) / t[s];

    std::vector<double> out(a.size());
    for (int j = 0; j < lat.ny; ++j)
        for (int i = 0; i < lat.nx; ++i) {
            const std::size_t s = lat.index(i, j);
            double in = 0.0;
            for (int d = 0; d < 4; ++d) {
                const int ni = i + kDi[d], nj = j + kDj[d];
                in += (ni >= 0 && ni < lat.nx && nj >= 0 && nj < lat.ny) ? flux[lat.index(ni, nj)] : flux[s];
            }
            out[s] = a[s] * in + p.params.gamma * dt;
        }
    return out;
}

namespace {

LatticeState deterministic_impl(const Lattice& lat, const AbmParams& p, const LatticeState& state, double* burglaries) {
    const auto a = attractiveness(lat, p, state.B);
    std::vector<double> events(a.size());
    double total = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        events[s] = state.n[s] * burglary_probability(a[s], p.params.dt);
        total += events[s];
    }
    LatticeState next;
    next.n = step_n_deterministic(lat, p, state);
    next.B = step_B(lat, p, state.B, events);
    next.step = state.step + 1;
    next.t = static_cast<double>(next.step) * p.params.dt;
    if (burglaries) *burglaries = total;
    return next;
}

LatticeState stochastic_impl(const Lattice& lat, const AbmParams& p, const LatticeState& state, std::uint64_t seed,
                             double* burglaries) {
    check_params(lat, p);
    check_sizes(lat, state.n, "n");
    const auto a = attractiveness(lat, p, state.B);
    const auto t = normalizers(lat, a);
    const double dt = p.params.dt;

    std::vector<double> events(a.size(), 0.0);
    std::vector<double> next_n(a.size(), 0.0);
    double total = 0.0;
    for (int j = 0; j < lat.ny; ++j) {
        Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(state.step), static_cast<std::uint64_t>(j)));
        for (int i = 0; i < lat.nx; ++i) {
            const std::size_t s = lat.index(i, j);
            const double count = std::round(state.n[s]);
            if (count < 0.0 || std::abs(count - state.n[s]) > 1e-9)
                throw ParameterError("stochastic engine needs nonnegative integer criminal counts");
            const double prob = burglary_probability(a[s], dt);
            std::size_t dest[4];
            double weight[4];
            for (int d = 0; d < 4; ++d) {
                const int ni = i + kDi[d], nj = j + kDj[d];
                const bool inside = ni >= 0 && ni < lat.nx && nj >= 0 && nj < lat.ny;
                dest[d] = inside ? lat.index(ni, nj) : s;
                weight[d] = inside ? a[dest[d]] : a[s];
            }
            for (long c = 0; c < static_cast<long>(count); ++c) {
                if (rng.uniform() < prob) {
                    events[s] += 1.0;
                    continue;
                }
                double u = rng.uniform() * t[s];
                int d = 0;
                while (d < 3 && u >= weight[d]) u -= weight[d++];
                next_n[dest[d]] += 1.0;
            }
            total += events[s];
        }
        for (int i = 0; i < lat.nx; ++i) next_n[lat.index(i, j)] += poisson_draw(rng, p.params.gamma * dt);
    }

    LatticeState next;
    next.n = std::move(next_n);
    next.B = step_B(lat, p, state.B, events);
    next.step = state.step + 1;
    next.t = static_cast<double>(next.step) * dt;
    if (burglaries) *burglaries = total;
    return next;
}

}  // namespace

LatticeState step_deterministic(const Lattice& lattice, const AbmParams& p, const LatticeState& state) {
    return deterministic_impl(lattice, p, state, nullptr);
}

LatticeState step_stochastic(const Lattice& lattice, const AbmParams& p, const LatticeState& state,
                             std::uint64_t seed) {
    return stochastic_impl(lattice, p, state, seed, nullptr);
}

LatticeState equilibrium_state(const Lattice& lattice, const AbmParams& p, bool integer_n) {
    check_params(lattice, p);
    const AbmEquilibrium e = equilibrium(p.params);
    LatticeState s;
    s.B.assign(lattice.site_count(), e.B_bar);
    s.n.assign(lattice.site_count(), integer_n ? std::round(e.n_bar) : e.n_bar);
    return s;
}

AbmRunResult run_abm(const Lattice& lattice, const AbmParams& p, LatticeState initial, const AbmRunOptions& options) {
    check_params(lattice, p);
    if (options.steps < 0) throw ParameterError("step count must be nonnegative");
    if (options.output_every < 1) throw ParameterError("output cadence must be at least one step");
    AbmRunResult result;
    result.final_state = std::move(initial);
    LatticeState& state = result.final_state;
    auto snapshot = [&] {
        if (options.keep_snapshots)
            result.snapshots.push_back({state.step, state.t, attractiveness(lattice, p, state.B), state.n});
    };
    snapshot();
    for (long k = 0; k < options.steps; ++k) {
        double burglaries = 0.0;
        state = options.engine == Engine::Deterministic
                    ? deterministic_impl(lattice, p, state, &burglaries)
                    : stochastic_impl(lattice, p, state, options.seed, &burglaries);
        AbmStepRecord rec;
        rec.step = state.step;
        rec.t = state.t;
        for (double v : state.n) rec.total_n += v;
        rec.total_burglaries = burglaries;
        for (double v : state.B) rec.mean_B += v;
        rec.mean_B /= static_cast<double>(state.B.size());
        result.log.push_back(rec);
        if (options.on_step) options.on_step(state, rec);
        if ((k + 1) % options.output_every == 0 || k + 1 == options.steps) snapshot();
    }
    return result;
}

NondimView nondimensional_view(const Lattice& lattice, const AbmParams& p, const LatticeState& state) {
    check_params(lattice, p);
    if (!(p.params.omega > 0.0)) throw ParameterError("omega must be positive");
    NondimView v;
    v.A = attractiveness(lattice, p, state.B);
    for (double& x : v.A) x /= p.params.omega;
    v.rho.resize(state.n.size());
    const double scale = p.params.theta / p.params.omega;
    for (std::size_t s = 0; s < v.rho.size(); ++s) v.rho[s] = scale * state.n[s];
    v.spacing = 2.0 * std::sqrt(p.params.omega * p.params.dt);
    v.time = p.params.omega * state.t;
    return v;
}

Mesh lattice_mesh(const Lattice& lattice, const AbmParams& p) {
    check_params(lattice, p);
    const double s = 2.0 * std::sqrt(p.params.omega * p.params.dt);
    const double k = s / lattice.h;
    return structured_quad_mesh(s * (lattice.nx - 1), s * (lattice.ny - 1), lattice.nx - 1, lattice.ny - 1,
                                {lattice.origin.x * k, lattice.origin.y * k});
}

}  // namespace crimesim::abm
