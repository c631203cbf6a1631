// Experiment runner: parses a JSON config, dispatches one experiment, writes
// a CSV table plus a JSON manifest (config hash, tolerances, calibrated
// constants). Exit codes: 0 success, 1 computation failure, 2 config error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "semi/config.hpp"
#include "semi/free_energy.hpp"
#include "semi/invariants.hpp"
#include "semi/io.hpp"
#include "semi/lattice.hpp"
#include "semi/states.hpp"

namespace {

using semi::ExperimentConfig;
namespace fs = std::filesystem;

struct RunContext {
    ExperimentConfig cfg;
    std::string subcommand;
    fs::path out_dir;
    double kappa = 0.0;
};

nlohmann::json base_manifest(const RunContext& ctx) {
    nlohmann::json m;
    m["subcommand"] = ctx.subcommand;
    m["config"] = ctx.cfg.canonical();
    m["config_hash"] = semi::config_hash(ctx.cfg.canonical());
    m["calibrated_kappa"] = ctx.kappa;
    m["tolerances"] = {{"top_weight", ctx.cfg.options.top_weight_tol},
                       {"deficit", ctx.cfg.options.deficit_tol},
                       {"quad_rel", ctx.cfg.options.quad_rel_tol}};
    return m;
}

void finish(RunContext& ctx, const semi::CsvTable& table, nlohmann::json manifest,
            const std::string& stem) {
    const fs::path csv_path = ctx.out_dir / (stem + ".csv");
    const fs::path man_path = ctx.out_dir / (stem + ".manifest.json");
    manifest["outputs"] = {csv_path.string()};
    table.write(csv_path.string());
    semi::write_text_atomic(man_path.string(), manifest.dump(2) + "\n");
    std::cout << "wrote " << csv_path.string() << "\n";
}

int run_partition(RunContext& ctx) {
    const semi::SymbolClassS h = ctx.cfg.make_symbol();
    const double beta = ctx.cfg.beta;
    const semi::ClassicalTargets tgt =
        semi::classical_targets(h, beta, ctx.cfg.options);

    semi::CsvTable table({"eps", "n_max", "Z_scaled", "Z_classical",
                          "Z_upper_symbol", "err_rel"});
    for (double eps : ctx.cfg.eps_list) {
        const semi::FockSpec spec =
            semi::certified_spec(h, beta, eps, 0.0, ctx.cfg.options);
        const semi::SpectralHamiltonian H = semi::build_hamiltonian(h, spec);
        const semi::GibbsResult gibbs =
            semi::gibbs_state(H, beta, ctx.cfg.options.top_weight_tol);
        const double Z_scaled =
            std::exp(gibbs.log_Z + h.modes() * std::log(M_PI * eps));
        const semi::PolySymbol hup =
            semi::upper_symbol(h.symbol()).evaluate(eps);
        const semi::RefineResult zup = semi::classical_partition(
            [&hup](const Eigen::VectorXcd& z) { return hup.eval(z).real(); },
            beta, h.modes(), semi::default_policy_for(h, beta));
        table.add_row({eps, double(spec.n_max), Z_scaled, tgt.Z0,
                       zup.value.real(), (Z_scaled - tgt.Z0) / tgt.Z0});
    }
    nlohmann::json manifest = base_manifest(ctx);
    manifest["Z_classical"] = tgt.Z0;
    finish(ctx, table, manifest, "partition");
    return 0;
}

int run_entropy_convergence(RunContext& ctx) {
    const semi::SymbolClassS h = ctx.cfg.make_symbol();
    const semi::EntropyConvergenceResult res = semi::entropy_convergence_experiment(
        h, ctx.cfg.beta, ctx.cfg.eps_list, ctx.cfg.options);

    semi::CsvTable table({"eps", "n_max", "Z_scaled", "S_vN_renorm", "S_W_renorm",
                          "S_B_target", "err_vN", "err_W", "F_vN_renorm",
                          "F_W_renorm", "F_B_target"});
    for (const auto& r : res.rows)
        table.add_row({r.eps, double(r.n_max), r.Z_scaled, r.S_vN_renorm,
                       r.S_W_renorm, r.S_B_target, r.err_vN, r.err_W,
                       r.F_vN_renorm, r.F_W_renorm, r.F_B_target});

    nlohmann::json manifest = base_manifest(ctx);
    manifest["S_B_target"] = res.targets.S_B;
    manifest["Z_classical"] = res.targets.Z0;
    if (!res.assumption_A.empty()) {
        nlohmann::json a;
        for (const auto& [k, values] : res.assumption_A)
            a[std::to_string(k)] = values;
        manifest["assumption_A_norms"] = a;
    }

    // Sampled classical Gibbs density alongside the table.
    const semi::ClassicalDensity gamma = semi::classical_gibbs(
        h.evaluator(), ctx.cfg.beta, res.targets.grid);
    const fs::path density_path = ctx.out_dir / "classical_density.csv";
    semi::write_field_csv(density_path.string(), gamma.grid.nodes, gamma.values);
    manifest["density_csv"] = density_path.string();

    finish(ctx, table, manifest, "entropy_convergence");
    return 0;
}

int run_free_energy(RunContext& ctx) {
    const semi::SymbolClassS h = ctx.cfg.make_symbol();
    const semi::EntropyConvergenceResult res = semi::entropy_convergence_experiment(
        h, ctx.cfg.beta, ctx.cfg.eps_list, ctx.cfg.options);

    semi::CsvTable table({"eps", "F_vN_renorm", "F_W_renorm", "F_B_target",
                          "jensen_lhs", "jensen_rhs", "jensen_gap"});
    for (const auto& r : res.rows) {
        const semi::JensenCheck jc = semi::jensen_lower_bound_check(
            h, ctx.cfg.beta, r.eps, ctx.cfg.options);
        table.add_row({r.eps, r.F_vN_renorm, r.F_W_renorm, r.F_B_target, jc.lhs,
                       jc.rhs, jc.gap});
    }
    nlohmann::json manifest = base_manifest(ctx);
    manifest["F_B_target"] = res.targets.F_B;
    finish(ctx, table, manifest, "free_energy");
    return 0;
}

int run_gamma_upper(RunContext& ctx) {
    const semi::SymbolClassS h = ctx.cfg.make_symbol();
    const semi::GammaUpperResult res = semi::gamma_upper_experiment(
        ctx.cfg.gamma_upper_sigma2, ctx.cfg.modes, ctx.cfg.eps_list, h,
        ctx.cfg.options);

    semi::CsvTable table({"eps", "n_max", "S_W_renorm", "S_B_f", "gap",
                          "husimi_conv_err", "energy", "energy_target",
                          "matrix_path"});
    for (const auto& r : res.rows)
        table.add_row({r.eps, double(r.n_max), r.S_W_renorm, r.S_B_f, r.gap,
                       r.husimi_conv_err, r.energy, r.energy_target,
                       r.matrix_path ? 1.0 : 0.0});
    nlohmann::json manifest = base_manifest(ctx);
    manifest["S_B_f"] = res.S_B_f;
    finish(ctx, table, manifest, "gamma_upper");
    return 0;
}

int run_lattice_divergence(RunContext& ctx) {
    const semi::SymbolClassS h = ctx.cfg.make_symbol();
    semi::DivergenceOptions dopts;
    dopts.beta = ctx.cfg.beta;
    const semi::DivergenceReport rep = semi::divergence_experiment(
        ctx.cfg.lattice_density(), ctx.cfg.lattice_delta, ctx.cfg.lattice_M_list,
        h, dopts);

    semi::CsvTable table({"M", "eps", "n_max", "S_vN", "S_rel", "renormalized",
                          "trace_N", "admissibility"});
    for (const auto& r : rep.rows)
        table.add_row({double(r.M), r.eps, double(r.n_max), r.S_vN, r.S_rel,
                       r.renormalized, r.trace_N, r.admissibility});

    nlohmann::json manifest = base_manifest(ctx);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"M", r.M},
                        {"eps", r.eps},
                        {"S_vN", r.S_vN},
                        {"S_rel", r.S_rel},
                        {"renormalized", r.renormalized}});
    manifest["rows"] = rows;
    manifest["slope"] = rep.slope;
    manifest["intercept"] = rep.intercept;
    manifest["slope_target"] = rep.slope_target;
    manifest["classical_offset"] = rep.classical_offset;
    manifest["S_B_f"] = rep.S_B_f;
    manifest["skipped_M"] = rep.skipped_M;
    finish(ctx, table, manifest, "lattice_divergence");
    return 0;
}

int run_check_invariants(RunContext& ctx) {
    const std::vector<semi::InvariantCheck> checks =
        semi::run_invariant_suite(ctx.cfg.seed);
    semi::CsvTable table({"check", "value", "bound", "pass"});
    bool ok = true;
    for (const auto& c : checks) {
        table.add_row_mixed({c.name, semi::format_g17(c.value),
                             semi::format_g17(c.bound), c.pass ? "1" : "0"});
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name
                  << "  value=" << semi::format_g17(c.value)
                  << "  bound=" << semi::format_g17(c.bound) << "\n";
        ok = ok && c.pass;
    }
    nlohmann::json manifest = base_manifest(ctx);
    manifest["all_pass"] = ok;
    finish(ctx, table, manifest, "check_invariants");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("SEMI_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(threads)));

    CLI::App app{"semic: semiclassical Gibbs entropy experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string output_override;
    bool dry_run = false;
    app.add_option("-c,--config", config_path, "JSON experiment config")
        ->required();
    app.add_option("-o,--output-dir", output_override, "override output dir");
    app.add_flag("--dry-run", dry_run, "validate config and exit");

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"partition", "quantum vs classical partition functions"},
        {"entropy-convergence", "renormalized Gibbs entropy sweep"},
        {"free-energy", "renormalized Gibbs free energies"},
        {"gamma-upper", "recovery-sequence entropy sweep"},
        {"lattice-divergence", "coherent lattice slow-renormalization slope"},
        {"check-invariants", "full structural property suite"},
    };
    for (const auto& [name, desc] : subs) app.add_subcommand(name, desc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems count as config errors
    }

    RunContext ctx;
    try {
        ctx.cfg = ExperimentConfig::load(config_path);
    } catch (const semi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (dry_run) {
        std::cout << "config ok: hash "
                  << semi::config_hash(ctx.cfg.canonical()) << "\n";
        return 0;
    }

    ctx.subcommand = app.get_subcommands().front()->get_name();
    ctx.out_dir = output_override.empty() ? ctx.cfg.output_dir : output_override;

    try {
        ctx.kappa = semi::calibrate_characteristic_kappa();
        if (ctx.subcommand == "partition") return run_partition(ctx);
        if (ctx.subcommand == "entropy-convergence")
            return run_entropy_convergence(ctx);
        if (ctx.subcommand == "free-energy") return run_free_energy(ctx);
        if (ctx.subcommand == "gamma-upper") return run_gamma_upper(ctx);
        if (ctx.subcommand == "lattice-divergence")
            return run_lattice_divergence(ctx);
        if (ctx.subcommand == "check-invariants") return run_check_invariants(ctx);
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const semi::Error& e) {
        std::cerr << ctx.subcommand << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << ctx.subcommand << ": unexpected: " << e.what() << "\n";
        return 1;
    }
}
