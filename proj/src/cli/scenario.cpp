#include "crimesim/scenario.hpp"

#include "crimesim/error.hpp"
#include "crimesim/profiles.hpp"
#include "crimesim/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace crimesim::scenario {

namespace {

Config from_pairs(std::initializer_list<std::pair<const char*, const char*>> pairs) {
    Config c;
    for (const auto& [k, v] : pairs) c.set(k, v);
    return c;
}

Config common() {
    return from_pairs({{"a_st", "1/30"},
                       {"source", "1"},
                       {"rho0", "0.8"},
                       {"dt", "1/25"},
                       {"t_end", "200"},
                       {"mesh", "structured"},
                       {"mesh.lx", "16"},
                       {"mesh.ly", "16"},
                       {"mesh.nx", "100"},
                       {"mesh.ny", "100"},
                       {"solver.mode", "strong"},
                       {"solver.tol", "1e-6"},
                       {"output.every", "50"},
                       {"seed", "1"},
                       {"abm.theta", "0.2339"},
                       {"abm.gamma", "0.019"},
                       {"abm.omega", "1/15"},
                       {"abm.dt", "0.3"},
                       {"abm.h", "1"},
                       {"abm.nx", "57"},
                       {"abm.ny", "57"}});
}

Config noisy() {
    Config c = common();
    c.merge(from_pairs({{"sigma_b", "0.05"}, {"sigma_rho", "0.01"}, {"delta", "1"}}));
    return c;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "preset", "eta", "a_st", "source", "b0", "rho0", "theta_over_omega", "profile", "sigma_b", "sigma_rho",
        "delta", "delta_b", "delta_rho", "seed", "dt", "t_end", "mesh", "mesh.lx", "mesh.ly", "mesh.nx", "mesh.ny",
        "mesh.nodes", "mesh.seed", "solver.mode", "solver.tol", "solver.tol1", "solver.tol2", "solver.max_iters",
        "solver.linear_tol", "solver.linear_max_iter", "solver.precond", "solver.norm", "solver.a_floor",
        "output.dir", "output.every", "output.vtk", "abm.engine", "abm.theta", "abm.omega", "abm.gamma", "abm.eta",
        "abm.a_static", "abm.h", "abm.dt", "abm.nx", "abm.ny", "abm.steps", "abm.t_end", "abm.output_every",
        "abm.init", "sweep.eta", "sweep.workers", "sweep.window", "hotspot.min_rise"};
    return keys;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"case1", "case2", "case3", "case2-piecewise-eta", "highway-square", "chicago-like"};
}

Config preset(const std::string& name) {
    if (name == "case1") {
        Config c = common();
        c.merge(from_pairs({{"eta", "0.9"}, {"abm.theta", "0.58"}, {"abm.gamma", "0.0077"}}));
        return c;
    }
    if (name == "case2") {
        Config c = noisy();
        c.set("eta", "0.3");
        return c;
    }
    if (name == "case3") {
        Config c = noisy();
        c.set("eta", "0.03");
        return c;
    }
    if (name == "case2-piecewise-eta") {
        Config c = noisy();
        c.set("eta", "piecewise");
        return c;
    }
    if (name == "highway-square") {
        Config c = noisy();
        c.merge(from_pairs({{"eta", "0.3"}, {"profile", "highway-square"}, {"delta_b", "0.1"}, {"delta_rho", "1"}}));
        return c;
    }
    if (name == "chicago-like") {
        Config c = noisy();
        c.merge(from_pairs({{"eta", "0.06"},
                            {"mesh", "chicago-like"},
                            {"mesh.nodes", "11218"},
                            {"mesh.seed", "7"},
                            {"dt", "1/50"},
                            {"solver.tol", "1e-9"}}));
        return c;
    }
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + names + ")");
}

Config resolve(const Config& config) {
    if (!config.has("preset")) return config;
    Config c = preset(config.get_string("preset"));
    // A shorthand key given by the caller beats the preset's specific keys.
    const std::pair<const char*, std::array<const char*, 2>> shorthands[] = {
        {"delta", {"delta_b", "delta_rho"}}, {"solver.tol", {"solver.tol1", "solver.tol2"}}};
    for (const auto& [key, specific] : shorthands)
        if (config.has(key))
            for (const char* k : specific)
                if (!config.has(k)) c.set(k, config.get_string(key));
    c.merge(config);
    return c;
}

void check_keys(const Config& config) {
    for (const auto& [k, v] : config.entries())
        if (!known_keys().count(k)) throw ConfigError("unknown configuration key '" + k + "'");
}

Mesh build_mesh(const Config& c) {
    const std::string kind = c.get_string("mesh", "structured");
    if (kind == "structured") {
        Mesh m = structured_quad_mesh(c.get_double("mesh.lx", 16.0), c.get_double("mesh.ly", 16.0),
                                      static_cast<int>(c.get_int("mesh.nx", 100)),
                                      static_cast<int>(c.get_int("mesh.ny", 100)));
        return m;
    }
    if (kind == "chicago-like")
        return profiles::city_mesh(static_cast<int>(c.get_int("mesh.nodes", 11218)), c.get_u64("mesh.seed", 7));
    return load_mesh(kind);
}

pde::PdeState PdeSetup::initial() const { return pde::initial_state(*mesh, params.a_st, b0, rho0, noise); }

namespace {

Coefficient scalar_or_throw(const Config& c, const std::string& key, double fallback) {
    if (!c.has(key)) return fallback;
    if (!c.is_number(key)) throw ConfigError("key '" + key + "' must be a number");
    return c.get_double(key);
}

pde::CouplingMode parse_mode(const std::string& s) {
    if (s == "loose") return pde::CouplingMode::Loose;
    if (s == "strong") return pde::CouplingMode::Strong;
    if (s == "monolithic") return pde::CouplingMode::Monolithic;
    throw ConfigError("solver.mode must be loose, strong or monolithic");
}

}  // namespace

PdeSetup build_pde(const Config& config) {
    const Config c = resolve(config);
    check_keys(c);
    PdeSetup s;
    s.mesh = std::make_shared<const Mesh>(build_mesh(c));
    const Mesh& mesh = *s.mesh;

    if (c.has("eta") && c.get_string("eta") == "piecewise")
        s.params.eta = profiles::piecewise_eta(mesh);
    else
        s.params.eta = scalar_or_throw(c, "eta", 0.9);
    s.params.theta_over_omega = c.get_double("theta_over_omega", 0.0);

    s.noise.sigma_b = c.get_double("sigma_b", 0.0);
    s.noise.sigma_rho = c.get_double("sigma_rho", 0.0);
    const double delta = c.get_double("delta", 0.0);
    s.noise.delta_b = c.get_double("delta_b", delta);
    s.noise.delta_rho = c.get_double("delta_rho", c.has("delta_b") && !c.has("delta") ? s.noise.delta_b : delta);
    s.noise.seed = c.get_u64("seed", 1);

    const std::string profile = c.get_string("profile", "none");
    if (profile == "none") {
        s.params.a_st = scalar_or_throw(c, "a_st", 1.0 / 30.0);
        s.params.source = scalar_or_throw(c, "source", 1.0);
        s.b0 = c.has("b0") ? scalar_or_throw(c, "b0", 0.0) : s.params.source;
    } else if (profile == "highway-square" || profile == "highway-city") {
        const auto box = mesh.bounding_box();
        auto f = profile == "highway-square" ? profiles::highway_square(mesh, box[1].x - box[0].x, s.noise.seed)
                                             : profiles::highway_city(mesh, s.noise.seed);
        s.params.a_st = f.a_st;
        s.params.source = f.source;
        s.b0 = f.source;
    } else {
        throw ConfigError("profile must be none, highway-square or highway-city");
    }
    s.rho0 = c.get_double("rho0", 0.8);
    s.params.validate();
    s.noise.validate();

    auto& sv = s.solver;
    sv.mode = parse_mode(c.get_string("solver.mode", "strong"));
    const double tol = c.get_double("solver.tol", 1e-6);
    sv.tol1 = c.get_double("solver.tol1", tol);
    sv.tol2 = c.get_double("solver.tol2", tol);
    sv.max_fixed_point_iters = static_cast<int>(c.get_int("solver.max_iters", 200));
    sv.dt = c.get_double("dt", 1.0 / 25.0);
    sv.linear_tol = c.get_double("solver.linear_tol", 1e-12);
    sv.linear_max_iter = static_cast<int>(c.get_int("solver.linear_max_iter", -1));
    const std::string pre = c.get_string("solver.precond", "jacobi");
    if (pre == "jacobi")
        sv.preconditioner = Preconditioner::Jacobi;
    else if (pre == "ilu0")
        sv.preconditioner = Preconditioner::Ilu0;
    else
        throw ConfigError("solver.precond must be jacobi or ilu0");
    const std::string norm = c.get_string("solver.norm", "consistent");
    if (norm == "consistent")
        sv.norm = pde::NormKind::Consistent;
    else if (norm == "lumped")
        sv.norm = pde::NormKind::Lumped;
    else
        throw ConfigError("solver.norm must be consistent or lumped");
    sv.a_floor = c.get_double("solver.a_floor", 1e-10);
    try {
        sv.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }

    s.t_end = c.get_double("t_end", 200.0);
    s.output_every = static_cast<int>(c.get_int("output.every", 50));
    if (s.output_every < 1) throw ConfigError("output.every must be at least 1");
    pde::step_count(s.t_end, sv.dt);
    return s;
}

AbmSetup build_abm(const Config& config) {
    const Config c = resolve(config);
    check_keys(c);
    AbmSetup s;
    auto& p = s.params.params;
    p.theta = c.get_double("abm.theta", 0.58);
    p.omega = c.get_double("abm.omega", 1.0 / 15.0);
    p.gamma = c.get_double("abm.gamma", 0.0077);
    if (c.has("abm.eta"))
        p.eta = c.get_double("abm.eta");
    else if (c.has("eta") && c.is_number("eta"))
        p.eta = c.get_double("eta");
    else
        throw ConfigError("abm.eta is required when eta is not a constant");
    p.a_static = c.has("abm.a_static") ? c.get_double("abm.a_static") : c.get_double("a_st", 1.0 / 30.0) * p.omega;
    p.lattice_h = c.get_double("abm.h", 1.0);
    p.dt = c.get_double("abm.dt", 0.3);
    p.validate();

    s.lattice.nx = static_cast<int>(c.get_int("abm.nx", 57));
    s.lattice.ny = static_cast<int>(c.get_int("abm.ny", 57));
    s.lattice.h = p.lattice_h;
    s.lattice.validate();

    const std::string engine = c.get_string("abm.engine", "deterministic");
    if (engine == "deterministic")
        s.options.engine = abm::Engine::Deterministic;
    else if (engine == "stochastic")
        s.options.engine = abm::Engine::Stochastic;
    else
        throw ConfigError("abm.engine must be deterministic or stochastic");
    s.options.seed = c.get_u64("seed", 1);
    if (c.has("abm.steps"))
        s.options.steps = c.get_int("abm.steps");
    else
        s.options.steps = pde::step_count(c.get_double("abm.t_end", c.get_double("t_end", 200.0) / p.omega), p.dt);
    s.options.output_every = static_cast<int>(c.get_int("abm.output_every", 50));

    const bool stochastic = s.options.engine == abm::Engine::Stochastic;
    const std::string init = c.get_string("abm.init", "pde");
    if (init == "equilibrium") {
        s.initial = abm::equilibrium_state(s.lattice, s.params, stochastic);
    } else if (init == "pde") {
        // B = b0 * omega and n = rho0 * omega / theta, the dimensional images
        // of the continuum initial data.
        const double b0 = c.get_double("b0", c.get_double("source", 1.0)) * p.omega;
        const double n0 = c.get_double("rho0", 0.8) * p.omega / p.theta;
        s.initial.B.assign(s.lattice.site_count(), b0);
        s.initial.n.assign(s.lattice.site_count(), n0);
        if (stochastic) {
            Xoshiro256 rng(derive_seed(s.options.seed, 0x6e30));
            const double limit = std::exp(-n0);
            for (double& n : s.initial.n) {
                int k = 0;
                for (double prod = rng.uniform(); prod > limit; prod *= rng.uniform()) ++k;
                n = k;
            }
        }
    } else {
        throw ConfigError("abm.init must be pde or equilibrium");
    }
    return s;
}

}  // namespace crimesim::scenario
