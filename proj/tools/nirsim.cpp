/**
 * @file nirsim.cpp
 * @brief Command line front end: kernel tables and probes, the ground-state
 *        solver, Gibbs sampling runs, field evaluations and the named
 *        diagnostic experiments. All heavy subcommands read the key=value
 *        config (see config.hpp) with flag overrides, write CSV + JSON into
 *        --out, and honor NIRSIM_THREADS.
 */

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nirsim/experiments.hpp"
#include "nirsim/field.hpp"
#include "nirsim/io.hpp"
#include "nirsim/version.hpp"

using namespace nirsim;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    double T = -1, dt = -1, e = -1, sigma = -1, alpha = -1;
    long steps = -1, burnin = -1, chains = -1;
    long long seed = -1;
    int d = -1;

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? default_config()
                                            : load_config_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (T > 0) cfg.T = T;
        if (dt > 0) cfg.dt = dt;
        if (e >= 0) cfg.params.e = e;
        if (sigma > 0) cfg.params.sigma = sigma;
        if (alpha > 0) cfg.params.pot_alpha = alpha;
        if (d > 0) cfg.params.d = d;
        if (steps > 0) cfg.mcmc.sweeps = steps;
        if (burnin >= 0) cfg.mcmc.burnin = burnin;
        if (chains > 0) cfg.mcmc.chains = static_cast<int>(chains);
        if (seed >= 0) cfg.mcmc.seed = static_cast<std::uint64_t>(seed);
        // re-validate the merged config through the canonical round trip
        return parse_config(serialize_config(cfg));
    }

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "config file (key = value)");
        app->add_option("--out", out_dir, "output directory");
        app->add_option("--T", T, "half window");
        app->add_option("--dt", dt, "bead spacing");
        app->add_option("--e", e, "coupling");
        app->add_option("--sigma", sigma, "charge width");
        app->add_option("--alpha", alpha, "potential exponent");
        app->add_option("--d", d, "dimension");
        app->add_option("--steps", steps, "post burn-in sweeps");
        app->add_option("--burnin", burnin, "burn-in sweeps");
        app->add_option("--chains", chains, "chain count");
        app->add_option("--seed", seed, "rng seed");
    }
};

int report_checks(const ExperimentResult& res, bool do_assert) {
    for (const auto& c : res.checks)
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": "
                  << c.detail << "\n";
    if (!res.complete) {
        std::cout << "(stopped at checkpoint; rerun to resume)\n";
        return 0;
    }
    if (!do_assert) return 0;
    int fails = 0;
    for (const auto& c : res.checks) fails += c.pass ? 0 : 1;
    return fails;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nirsim: particle-field Gibbs simulation at a massless dispersion"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    bool do_assert = false;
    app.add_flag("--assert", do_assert,
                 "exit nonzero when a hard acceptance check fails");
    long stop_after = -1;
    app.add_option("--stop-after", stop_after,
                   "checkpoint and stop after this many sweeps per chain");

    // kernels
    auto* kernels = app.add_subcommand("kernels", "pair kernel table and probes");
    auto* ktable = kernels->add_subcommand("table", "build and save the W table");
    CommonOpts kopt;
    kopt.attach(ktable);
    auto* kprobe = kernels->add_subcommand("probe", "emit CSV rows (r,t,W)");
    CommonOpts kpopt;
    kpopt.attach(kprobe);
    std::vector<double> probe_r{0.0, 0.5, 1.0, 2.0}, probe_t{0.0, 0.5, 1.0, 2.0};
    kprobe->add_option("--r", probe_r, "radii to probe");
    kprobe->add_option("--t", probe_t, "time gaps to probe");

    // schrodinger
    auto* schro = app.add_subcommand("schrodinger", "radial ground state");
    auto* solve = schro->add_subcommand("solve", "solve and persist the ground state");
    CommonOpts sopt;
    sopt.attach(solve);

    // sample
    auto* sample = app.add_subcommand("sample", "MCMC run of the Gibbs measure");
    CommonOpts smopt;
    smopt.attach(sample);

    // field
    auto* field = app.add_subcommand("field", "conditional field statistics");
    auto* fmean = field->add_subcommand("mean", "CSV (k, Re g_hat, Im g_hat)");
    CommonOpts fmopt;
    fmopt.attach(fmean);
    auto* fsample = field->add_subcommand("sample", "joint field draws as CSV");
    CommonOpts fsopt;
    fsopt.attach(fsample);
    int n_draws = 1000;
    fsample->add_option("--draws", n_draws, "number of joint draws");

    // diagnose / run
    auto* diag = app.add_subcommand("diagnose", "run a named experiment");
    std::string experiment;
    diag->add_option("name", experiment, "experiment name")->required();
    CommonOpts dopt;
    dopt.attach(diag);

    auto* config_cmd = app.add_subcommand("config", "print or check a config");
    std::string cfg_action = "print";
    config_cmd->add_option("action", cfg_action, "print|check");
    CommonOpts copt;
    copt.attach(config_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ktable->parsed()) {
            ExperimentResult res = run_experiment(kopt.resolve(), "kernels");
            for (const auto& f : res.files) std::cout << f << "\n";
            return report_checks(res, do_assert);
        }
        if (kprobe->parsed()) {
            RunConfig cfg = kpopt.resolve();
            std::cout << "r,t,W\n";
            for (double r : probe_r)
                for (double t : probe_t)
                    std::cout << io::fmt_full(r) << "," << io::fmt_full(t) << ","
                              << io::fmt_full(pair_kernel_momentum(r, t, cfg.params))
                              << "\n";
            return 0;
        }
        if (solve->parsed()) {
            RunConfig cfg = sopt.resolve();
            RadialGroundState gs =
                solve_ground_state(PotentialSpec::from(cfg.params), cfg.params.d);
            fs::create_directories(cfg.out_dir);
            fs::path gpath = fs::path(cfg.out_dir) / "ground_state.nirg";
            gs.save(gpath.string());
            nlohmann::ordered_json j;
            j["config_hash"] = std::to_string(config_hash(cfg));
            j["version"] = kVersion;
            j["E_p"] = gs.E_p;
            j["r_max"] = gs.r_max;
            j["grid_step"] = gs.h;
            j["residual"] = gs.residual;
            std::ofstream os(fs::path(cfg.out_dir) / "ground_state.json");
            os << j.dump(2) << "\n";
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (sample->parsed()) {
            RunConfig cfg = smopt.resolve();
            if (cfg.params.e > 1.0)
                std::cerr << "warning: e = " << cfg.params.e
                          << " is outside the weak-coupling regime where the "
                             "infinite-volume Gibbs measure is known to exist\n";
            ExperimentResult res = run_experiment(cfg, "sample", stop_after);
            for (const auto& f : res.files) std::cout << f << "\n";
            return report_checks(res, do_assert);
        }
        if (fmean->parsed()) {
            RunConfig cfg = fmopt.resolve();
            PathConfig pc;
            pc.T = cfg.T;
            pc.dt = cfg.dt;
            pc.d = cfg.params.d;
            DiscretizedPath path = DiscretizedPath::zeros(pc);
            std::cout << "k,Re_g,Im_g\n";
            for (int i = 1; i <= 64; ++i) {
                double k = 8.0 * i / 64.0;
                double kvec[5] = {k, 0, 0, 0, 0};
                auto g = g_hat0(kvec, path, pc, cfg.params);
                std::cout << io::fmt_full(k) << "," << io::fmt_full(g.real())
                          << "," << io::fmt_full(g.imag()) << "\n";
            }
            return 0;
        }
        if (fsample->parsed()) {
            RunConfig cfg = fsopt.resolve();
            FieldSampleSpec spec;
            spec.h_hats = {[](double k) { return std::exp(-0.5 * k * k); },
                           [](double k) { return std::exp(-0.5 * k * k); }};
            spec.times = {0.0, 1.0};
            PathConfig pc;
            pc.T = cfg.T;
            pc.dt = cfg.dt;
            pc.d = cfg.params.d;
            CounterRng rng(cfg.mcmc.seed, 0xF1E1D);
            auto draws =
                sample_field_at_times(spec, nullptr, pc, cfg.params, n_draws, rng);
            std::cout << "gauss_t0,gauss_t1\n";
            for (int s = 0; s < n_draws; ++s)
                std::cout << io::fmt_full(draws[2 * s]) << ","
                          << io::fmt_full(draws[2 * s + 1]) << "\n";
            return 0;
        }
        if (diag->parsed()) {
            RunConfig cfg = dopt.resolve();
            if (cfg.params.e > 1.0)
                std::cerr << "warning: e = " << cfg.params.e
                          << " is outside the weak-coupling regime where the "
                             "infinite-volume Gibbs measure is known to exist\n";
            ExperimentResult res = run_experiment(cfg, experiment, stop_after);
            for (const auto& f : res.files) std::cout << f << "\n";
            return report_checks(res, do_assert);
        }
        if (config_cmd->parsed()) {
            RunConfig cfg = copt.resolve();
            if (cfg_action == "check") {
                std::cout << "config ok, hash " << std::hex << config_hash(cfg)
                          << std::dec << "\n";
            } else {
                std::cout << serialize_config(cfg);
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
