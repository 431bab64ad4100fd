#include "crimesim/commands.hpp"

#include "crimesim/abm.hpp"
#include "crimesim/analysis.hpp"
#include "crimesim/error.hpp"
#include "crimesim/io.hpp"
#include "crimesim/krylov.hpp"
#include "crimesim/pde.hpp"
#include "crimesim/scenario.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace crimesim::cli {

namespace fs = std::filesystem;

int exit_code_for(std::exception_ptr error) {
    if (!error) return kOk;
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError&) {
        return kConfig;
    } catch (const ParameterError&) {
        return kConfig;
    } catch (const IoError&) {
        return kIo;
    } catch (const ParseError&) {
        return kMesh;
    } catch (const TopologyError&) {
        return kMesh;
    } catch (const SolverError&) {
        return kLinearSolver;
    } catch (const pde::ConvergenceError&) {
        return kConvergence;
    } catch (const FitError&) {
        return kFit;
    } catch (const DegeneracyError&) {
        return kDegenerate;
    } catch (...) {
        return kInternal;
    }
}

namespace {

std::string message_of(std::exception_ptr error) {
    try {
        std::rethrow_exception(error);
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown error";
    }
}

std::string padded(long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06ld", step);
    return buf;
}

fs::path output_dir(const CommonOptions& o, const Config& c) {
    return o.out_dir.empty() ? fs::path(c.get_string("output.dir", "out")) : fs::path(o.out_dir);
}

const std::vector<std::string> kStatsHeader = {"step",  "time",  "iters",   "incr_A",         "incr_rho",
                                               "min_A", "max_A", "min_rho", "max_rho",        "linear_iters_1",
                                               "linear_iters_2"};

std::vector<std::vector<std::string>> stats_rows(const std::vector<pde::StepRecord>& log) {
    using io::format_double;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(log.size());
    for (const auto& r : log)
        rows.push_back({std::to_string(r.step), format_double(r.time), std::to_string(r.iters),
                        format_double(r.incr_A), format_double(r.incr_rho), format_double(r.min_A),
                        format_double(r.max_A), format_double(r.min_rho), format_double(r.max_rho),
                        std::to_string(r.linear_iters_1), std::to_string(r.linear_iters_2)});
    return rows;
}

void write_fields(const fs::path& path, const Mesh& mesh, std::span<const double> a, std::span<const double> rho,
                  const std::string& title) {
    const io::NamedField fields[] = {{"A", a}, {"rho", rho}};
    io::write_vtk(path, mesh, fields, title);
}

std::string vtk_title(const char* what, long step, double time) {
    return std::string("crimesim ") + what + " step " + std::to_string(step) + " time " + io::format_double(time);
}

/// Baseline for hotspot detection: the homogeneous equilibrium when the
/// model is homogeneous, otherwise the field mean.
double hotspot_baseline(const scenario::PdeSetup& s, std::span<const double> a) {
    if (s.params.a_st.is_constant() && s.params.source.is_constant())
        return equilibrium(s.params.a_st.value(), s.params.source.value()).A_bar;
    double m = 0.0;
    for (double v : a) m += v;
    return m / static_cast<double>(a.size());
}

}  // namespace

Config load_config(const CommonOptions& o) {
    Config c;
    if (!o.config_path.empty()) {
        try {
            c = Config::load(o.config_path);
        } catch (const ParseError& e) {
            throw ConfigError(o.config_path + ": " + e.what());
        }
    }
    if (!o.preset.empty()) c.set("preset", o.preset);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        c.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (o.seed) c.set("seed", std::to_string(*o.seed));
    c = scenario::resolve(c);
    scenario::check_keys(c);
    return c;
}

int cmd_pde_run(const CommonOptions& o, std::ostream& log) {
    const Config c = load_config(o);
    const auto setup = scenario::build_pde(c);
    const Mesh& mesh = *setup.mesh;
    const fs::path out = output_dir(o, c);
    const bool vtk = c.get_bool("output.vtk", true);
    io::RunManifest manifest("pde-run", c.entries(), setup.noise.seed);

    const double too = setup.params.theta_over_omega;
    std::vector<double> burglaries;
    std::optional<pde::Snapshot> previous;

    pde::RunOptions ro;
    ro.t_end = setup.t_end;
    ro.output_every = setup.output_every;
    ro.keep_snapshots = false;
    ro.on_snapshot = [&](const pde::PdeState& s) {
        log << "step " << s.step_index << " t=" << io::format_double(s.time) << " A in [" << io::format_double(s.A.min())
            << ", " << io::format_double(s.A.max()) << "] rho in [" << io::format_double(s.rho.min()) << ", "
            << io::format_double(s.rho.max()) << "]\n";
        if (!vtk) return;
        const std::string name = "snapshot_" + padded(s.step_index) + ".vtk";
        write_fields(out / name, mesh, s.A.values(), s.rho.values(), vtk_title("pde", s.step_index, s.time));
        manifest.add_file(out, name);
    };
    if (too > 0.0) {
        burglaries.assign(mesh.quad_count(), 0.0);
        auto capture = [](const pde::PdeState& s) {
            return pde::Snapshot{s.step_index, s.time, {s.A.values().begin(), s.A.values().end()},
                                 {s.rho.values().begin(), s.rho.values().end()}};
        };
        previous = capture(pde::initial_state(mesh, setup.params.a_st, setup.b0, setup.rho0, setup.noise));
        ro.on_step = [&](const pde::PdeState& s, const pde::StepRecord&) {
            pde::Snapshot current = capture(s);
            const pde::Snapshot pair[] = {*previous, current};
            const auto add = analysis::burglary_counts(mesh, pair, too, setup.solver.dt);
            for (std::size_t e = 0; e < add.size(); ++e) burglaries[e] += add[e];
            previous = std::move(current);
        };
    }

    fs::create_directories(out);
    const auto result = pde::run(mesh, setup.params, setup.solver, setup.initial(), ro);
    io::write_csv(out / "stats.csv", kStatsHeader, stats_rows(result.log));
    manifest.add_file(out, "stats.csv");
    if (too > 0.0) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t e = 0; e < burglaries.size(); ++e)
            rows.push_back({std::to_string(e), io::format_double(burglaries[e])});
        const std::vector<std::string> header = {"element", "burglaries"};
        io::write_csv(out / "burglaries.csv", header, rows);
        manifest.add_file(out, "burglaries.csv");
    }
    manifest.add_note("average_iterations", io::format_double(result.average_iterations()));
    manifest.add_note("steps_completed", std::to_string(result.log.size()));
    int code = kOk;
    if (!result.ok()) {
        code = exit_code_for(result.error);
        manifest.set_status("error", message_of(result.error));
        log << "error: " << message_of(result.error) << "\n";
    }
    manifest.write(out / "manifest.json");
    log << "average fixed-point iterations " << io::format_double(result.average_iterations()) << "\n";
    return code;
}

int cmd_abm_run(const CommonOptions& o, std::ostream& log) {
    const Config c = load_config(o);
    auto setup = scenario::build_abm(c);
    const fs::path out = output_dir(o, c);
    fs::create_directories(out);
    io::RunManifest manifest("abm-run", c.entries(), setup.options.seed);

    const auto result = abm::run_abm(setup.lattice, setup.params, setup.initial, setup.options);
    const Mesh mesh = abm::lattice_mesh(setup.lattice, setup.params);
    const auto& p = setup.params.params;
    for (const auto& snap : result.snapshots) {
        std::vector<double> a(snap.A), rho(snap.n);
        for (double& v : a) v /= p.omega;
        for (double& v : rho) v *= p.theta / p.omega;
        const std::string name = "abm_" + padded(snap.step) + ".vtk";
        write_fields(out / name, mesh, a, rho, vtk_title("abm", snap.step, p.omega * snap.t));
        manifest.add_file(out, name);
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : result.log)
        rows.push_back({std::to_string(r.step), io::format_double(r.t), io::format_double(r.total_n),
                        io::format_double(r.total_burglaries), io::format_double(r.mean_B)});
    const std::vector<std::string> header = {"step", "time", "total_n", "total_burglaries", "mean_B"};
    io::write_csv(out / "abm.csv", header, rows);
    manifest.add_file(out, "abm.csv");
    manifest.write(out / "manifest.json");
    log << "lattice run finished after " << result.log.size() << " steps\n";
    return kOk;
}

namespace {

struct SweepOutcome {
    bool ok = false;
    int count = 0;
    double mean_diameter = 0.0;
    double emerged_at = -1.0;
    int code = kOk;
    std::string message;
};

/// Text report of both fits; `failed` is set when the count fit fails.
std::string fit_summary(const std::vector<analysis::DataPoint>& counts,
                        const std::vector<analysis::DataPoint>& diameters, bool* failed = nullptr) {
    std::ostringstream s;
    using io::format_double;
    s << "model exponential: count(eta) = a * exp(b * eta) + c\n";
    try {
        const auto f = analysis::fit_hotspot_count(counts);
        s << "a = " << format_double(f.coefficients[0]) << "\nb = " << format_double(f.coefficients[1])
          << "\nc = " << format_double(f.coefficients[2]) << "\nresidual_norm = " << format_double(f.residual_norm)
          << "\niterations = " << f.iterations << "\ndegenerate = " << (f.degenerate ? "true" : "false") << "\n";
    } catch (const FitError& e) {
        s << "failed: " << e.what() << "\n";
        if (failed) *failed = true;
    }
    s << "model quadratic: diameter(eta) = c0 + c1 * eta + c2 * eta^2\n";
    try {
        const auto f = analysis::fit_hotspot_diameter(diameters);
        s << "c0 = " << format_double(f.coefficients[0]) << "\nc1 = " << format_double(f.coefficients[1])
          << "\nc2 = " << format_double(f.coefficients[2]) << "\nresidual_norm = " << format_double(f.residual_norm)
          << "\n";
    } catch (const FitError& e) {
        s << "failed: " << e.what() << "\n";
    }
    return s.str();
}

}  // namespace

int cmd_sweep_eta(const CommonOptions& o, std::vector<double> etas, std::ostream& log) {
    const Config c = load_config(o);
    if (etas.empty() && c.has("sweep.eta")) etas = c.get_list("sweep.eta");
    if (etas.empty()) {
        log << "error: sweep-eta needs at least one eta value (--eta or sweep.eta)\n";
        return kUsage;
    }
    for (double e : etas)
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eta values must lie in (0, 1]");
    const fs::path out = output_dir(o, c);
    fs::create_directories(out);
    io::RunManifest manifest("sweep-eta", c.entries(), c.get_u64("seed", 1));
    const int window = static_cast<int>(c.get_int("sweep.window", 10));
    const double min_rise = c.get_double("hotspot.min_rise", kMinRise);

    std::vector<SweepOutcome> outcomes(etas.size());
    std::vector<std::vector<std::string>> run_files(etas.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < etas.size(); k = next++) {
            SweepOutcome& r = outcomes[k];
            const std::string tag = "eta_" + io::format_double(etas[k]);
            try {
                Config ci = c;
                ci.set("eta", io::format_double(etas[k]));
                const auto setup = scenario::build_pde(ci);
                analysis::EmergenceDetector detector(window);
                pde::RunOptions ro;
                ro.t_end = setup.t_end;
                ro.output_every = setup.output_every;
                ro.keep_snapshots = false;
                ro.on_snapshot = [&](const pde::PdeState& s) {
                    const auto a = s.A.values();
                    const bool before = detector.emerged();
                    const double base = hotspot_baseline(setup, a);
                    if (detector.observe(analysis::detect_hotspots(a, *setup.mesh, base, min_rise).count) && !before)
                        r.emerged_at = s.time;
                };
                const auto result = pde::run(*setup.mesh, setup.params, setup.solver, setup.initial(), ro);
                io::write_csv(out / tag / "stats.csv", kStatsHeader, stats_rows(result.log));
                run_files[k].push_back(tag + "/stats.csv");
                if (!result.ok()) std::rethrow_exception(result.error);
                const auto& fin = result.final_state;
                write_fields(out / tag / "final.vtk", *setup.mesh, fin.A.values(), fin.rho.values(),
                             vtk_title("pde", fin.step_index, fin.time));
                run_files[k].push_back(tag + "/final.vtk");
                const auto report =
                    analysis::detect_hotspots(fin.A.values(), *setup.mesh, hotspot_baseline(setup, fin.A.values()), min_rise);
                r.ok = true;
                r.count = report.count;
                r.mean_diameter = report.mean_diameter();
            } catch (...) {
                r.code = exit_code_for(std::current_exception());
                r.message = message_of(std::current_exception());
            }
            std::lock_guard lock(log_mutex);
            log << "eta " << io::format_double(etas[k]) << ": "
                << (r.ok ? "count " + std::to_string(r.count) + " mean diameter " + io::format_double(r.mean_diameter)
                         : "failed: " + r.message)
                << "\n";
        }
    };
    const int workers = std::max(1, std::min<int>(thread_count(), static_cast<int>(etas.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<std::vector<std::string>> rows, failures;
    std::vector<analysis::DataPoint> counts, diameters;
    for (std::size_t k = 0; k < etas.size(); ++k) {
        for (const auto& f : run_files[k]) manifest.add_file(out, f);
        const auto& r = outcomes[k];
        if (!r.ok) {
            failures.push_back({io::format_double(etas[k]), std::to_string(r.code), r.message});
            continue;
        }
        rows.push_back({io::format_double(etas[k]), std::to_string(r.count), io::format_double(r.mean_diameter)});
        counts.push_back({etas[k], static_cast<double>(r.count)});
        if (r.count > 0) diameters.push_back({etas[k], r.mean_diameter});
        manifest.add_note("emerged_at_eta_" + io::format_double(etas[k]),
                          r.emerged_at >= 0.0 ? io::format_double(r.emerged_at) : "never");
    }
    const std::vector<std::string> header = {"eta", "count", "mean_diameter"};
    io::write_csv(out / "sweep.csv", header, rows);
    manifest.add_file(out, "sweep.csv");
    if (!failures.empty()) {
        for (auto& f : failures)
            for (char& ch : f[2])
                if (ch == ',' || ch == '\n') ch = ';';
        const std::vector<std::string> fheader = {"eta", "exit_code", "message"};
        io::write_csv(out / "failures.csv", fheader, failures);
        manifest.add_file(out, "failures.csv");
    }
    io::write_text(out / "fit.txt", fit_summary(counts, diameters));
    manifest.add_file(out, "fit.txt");
    if (rows.empty()) {
        manifest.set_status("error", "every run failed");
        manifest.write(out / "manifest.json");
        return outcomes.front().code;
    }
    manifest.write(out / "manifest.json");
    return kOk;
}

int cmd_analyze(const CommonOptions& o, const std::string& input, const std::string& field,
                std::optional<double> baseline, double min_rise, std::ostream& log) {
    if (input.empty()) {
        log << "error: analyze needs --input\n";
        return kUsage;
    }
    const fs::path out = o.out_dir.empty() ? fs::path("out") : fs::path(o.out_dir);
    fs::create_directories(out);
    if (fs::path(input).extension() == ".csv") {
        std::istringstream text(io::read_text(input));
        std::string line;
        std::getline(text, line);
        if (line.rfind("eta,count,mean_diameter", 0) != 0) throw IoError("expected a sweep CSV with header eta,count,mean_diameter");
        std::vector<analysis::DataPoint> counts, diameters;
        while (std::getline(text, line)) {
            if (line.empty()) continue;
            double eta = 0, count = 0, diam = 0;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &eta, &count, &diam) != 3)
                throw IoError("malformed sweep row '" + line + "'");
            counts.push_back({eta, count});
            if (count > 0) diameters.push_back({eta, diam});
        }
        bool failed = false;
        const std::string summary = fit_summary(counts, diameters, &failed);
        io::write_text(out / "fit.txt", summary);
        log << summary;
        return failed ? kFit : kOk;
    }

    io::VtkData data;
    try {
        data = io::read_vtk(input);
    } catch (const ParseError& e) {
        throw IoError(input + ": " + e.what());
    }
    const Mesh mesh = data.mesh();
    const auto& values = data.field(field);
    double base = 0.0;
    if (baseline) {
        base = *baseline;
    } else {
        for (double v : values) base += v;
        base /= static_cast<double>(values.size());
    }
    const auto report = analysis::detect_hotspots(values, mesh, base, min_rise);
    std::vector<std::vector<std::string>> rows;
    for (int k = 0; k < report.count; ++k)
        rows.push_back({std::to_string(k), std::to_string(report.components[k].size()),
                        io::format_double(report.areas[k]), io::format_double(report.diameters[k])});
    const std::vector<std::string> header = {"id", "nodes", "area", "diameter"};
    io::write_csv(out / "hotspots.csv", header, rows);
    log << "hotspots " << report.count << " threshold " << io::format_double(report.threshold_used)
        << " mean_diameter " << io::format_double(report.mean_diameter()) << "\n";
    return kOk;
}

int cmd_mesh_gen(const CommonOptions& o, std::ostream& log) {
    const Config c = load_config(o);
    const Mesh mesh = scenario::build_mesh(c);
    const fs::path out = output_dir(o, c);
    fs::create_directories(out);
    std::ostringstream text;
    write_mesh(mesh, text);
    io::write_text(out / "mesh.txt", text.str());
    io::write_vtk(out / "mesh.vtk", mesh, {}, "crimesim mesh");
    io::RunManifest manifest("mesh-gen", c.entries(), c.get_u64("mesh.seed", 0));
    manifest.add_file(out, "mesh.txt");
    manifest.add_file(out, "mesh.vtk");
    manifest.write(out / "manifest.json");
    log << "mesh with " << mesh.node_count() << " nodes and " << mesh.quad_count() << " quads\n";
    return kOk;
}

int thread_count() {
    const char* v = std::getenv("CRIMESIM_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) return 1;
    return static_cast<int>(std::min(n, 256L));
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Crime hotspot simulation: continuum model, lattice model and analysis"};
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 ok, 1 internal, 2 usage, 3 configuration, 4 I/O, 5 mesh, 6 linear solver,\n"
        "7 convergence, 8 fit, 9 degenerate attractiveness. CRIMESIM_THREADS sets the sweep worker count.");

    CommonOptions common;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "Run configuration file (key = value)");
        sub->add_option("--out", common.out_dir, "Output directory (default: output.dir or ./out)");
        sub->add_option("--seed", seed, "Random seed (overrides the config)");
        sub->add_option("--preset", common.preset,
                        "Built-in scenario: case1, case2, case3, case2-piecewise-eta, highway-square, chicago-like");
        sub->add_option("--set", common.overrides, "Override a config key, key=value (repeatable)");
    };
    auto* pde_run = app.add_subcommand("pde-run", "Integrate the continuum model");
    auto* abm_run = app.add_subcommand("abm-run", "Run the lattice model");
    auto* sweep = app.add_subcommand("sweep-eta", "Hotspot statistics over a range of eta, with fits");
    auto* analyze = app.add_subcommand("analyze", "Hotspots of a VTK snapshot, or fits of a sweep CSV");
    auto* mesh_gen = app.add_subcommand("mesh-gen", "Write the configured mesh");
    for (auto* s : {pde_run, abm_run, sweep, analyze, mesh_gen}) add_common(s);
    std::vector<double> etas;
    sweep->add_option("--eta", etas, "Comma-separated eta values")->delimiter(',');
    std::string input, field = "A";
    std::optional<double> baseline;
    double min_rise = kMinRise;
    analyze->add_option("--input", input, "VTK snapshot or sweep CSV");
    analyze->add_option("--field", field, "Field name in the snapshot (default A)");
    analyze->add_option("--baseline", baseline, "Hotspot baseline (default: field mean)");
    analyze->add_option("--min-rise", min_rise, "Smallest peak elevation above the baseline (default 0.01)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    for (auto* s : {pde_run, abm_run, sweep, analyze, mesh_gen})
        if (s->count("--seed")) common.seed = seed;

    try {
        if (pde_run->parsed()) return cmd_pde_run(common, out);
        if (abm_run->parsed()) return cmd_abm_run(common, out);
        if (sweep->parsed()) return cmd_sweep_eta(common, etas, out);
        if (analyze->parsed()) return cmd_analyze(common, input, field, baseline, min_rise, out);
        if (mesh_gen->parsed()) return cmd_mesh_gen(common, out);
    } catch (...) {
        err << "error: " << message_of(std::current_exception()) << "\n";
        return exit_code_for(std::current_exception());
    }
    return kUsage;
}

}  // namespace crimesim::cli
