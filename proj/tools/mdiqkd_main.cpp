#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mdiqkd/commands.hpp"
#include "mdiqkd/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string mode;
    bool single_basis_decoy = false;
    bool phase_randomized = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--seed", args.seed, "override [run] seed");
    cmd->add_option("--out", args.out_path, "output CSV path (default: stdout)");
    cmd->add_option("--mode", args.mode, "override [run] mode (asymptotic|montecarlo)")
        ->check(CLI::IsMember({"asymptotic", "montecarlo"}));
    cmd->add_flag("--single-basis-decoy", args.single_basis_decoy,
                  "run decoy estimation in the Z basis only");
    cmd->add_flag("--phase-randomized", args.phase_randomized,
                  "certify X-basis weights via phase randomization");
}

mdiqkd::RunConfig load_config(const CommonArgs& args) {
    mdiqkd::RunConfig cfg = mdiqkd::RunConfig::from_file(args.config_path);
    // CLI flags override individual config keys.
    if (args.seed) cfg.seed = *args.seed;
    if (!args.mode.empty()) cfg.mode = args.mode;
    if (args.single_basis_decoy) cfg.single_basis_decoy = true;
    if (args.phase_randomized) cfg.phase_randomized = true;
    if (const char* log = std::getenv("MDK_LOG"); log && std::string(log) == "debug")
        std::cerr << "[mdiqkd] effective config:\n" << cfg.effective_text();
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw mdiqkd::ConfigError("cannot open output file '" + path + "'");
    return f;
}

int run_simulate(const CommonArgs& args) {
    const mdiqkd::RunConfig cfg = load_config(args);
    const mdiqkd::SimulateResult res = mdiqkd::run_simulate(cfg);
    if (args.out_path.empty()) {
        mdiqkd::write_observables_csv(std::cout, res.tables, res.echo);
    } else {
        std::ofstream f = open_out(args.out_path);
        mdiqkd::write_observables_csv(f, res.tables, res.echo);
    }
    return 0;
}

int run_keyrate(const CommonArgs& args, const std::string& obs_path) {
    const mdiqkd::RunConfig cfg = load_config(args);
    std::ifstream obs_file(obs_path);
    if (!obs_file) throw mdiqkd::ConfigError("cannot open observables file '" + obs_path + "'");
    const std::vector<mdiqkd::TwoPulseObservables> tables = mdiqkd::read_observables_csv(obs_file);
    const mdiqkd::KeyrateOutcome out = mdiqkd::run_keyrate_pipeline(cfg, tables);
    std::cout << mdiqkd::keyrate_human_report(cfg, out);
    if (!args.out_path.empty()) {
        const bool fresh = !std::ifstream(args.out_path).good();
        std::ofstream f(args.out_path, std::ios::app);
        if (!f) throw mdiqkd::ConfigError("cannot open output file '" + args.out_path + "'");
        if (fresh) mdiqkd::write_keyrate_csv_header(f);
        mdiqkd::write_keyrate_csv_row(f, cfg, out);
    }
    return 0;
}

int run_scan(const CommonArgs& args) {
    const mdiqkd::RunConfig cfg = load_config(args);
    const mdiqkd::ScanResult scan = mdiqkd::run_scan(cfg);
    if (args.out_path.empty()) {
        mdiqkd::write_scan_csv(std::cout, scan, cfg.effective_text());
    } else {
        std::ofstream f = open_out(args.out_path);
        mdiqkd::write_scan_csv(f, scan, cfg.effective_text());
    }
    return 0;
}

int run_optimize(const CommonArgs& args) {
    const mdiqkd::RunConfig cfg = load_config(args);
    const mdiqkd::OptimizeResult res = mdiqkd::run_optimize(cfg);
    std::cout << "best mu_x = " << mdiqkd::format_g17(res.best.mu_x) << "\n";
    std::cout << "best mu_y = " << mdiqkd::format_g17(res.best.mu_y) << "\n";
    std::cout << "best rate = " << mdiqkd::format_g17(res.best.report.rate) << "\n";
    if (res.best.report.zeroed_reason)
        std::cout << "zeroed_reason = " << mdiqkd::to_string(*res.best.report.zeroed_reason)
                  << "\n";
    if (!args.out_path.empty()) {
        std::ofstream f = open_out(args.out_path);
        mdiqkd::write_optimize_csv(f, res, cfg.effective_text());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-intensity decoy-state analysis for MDI-QKD"};
    app.require_subcommand(1);

    CommonArgs sim_args, key_args, scan_args, opt_args;
    std::string obs_path;

    CLI::App* sim = app.add_subcommand("simulate", "synthesize observables to CSV");
    add_common(sim, sim_args);

    CLI::App* key = app.add_subcommand("keyrate", "bounds and key rate from observables");
    add_common(key, key_args);
    key->add_option("--obs", obs_path, "observables CSV (from simulate or experiment)")->required();

    CLI::App* scan = app.add_subcommand("scan", "key rate over a distance/transmittance grid");
    add_common(scan, scan_args);

    CLI::App* opt = app.add_subcommand("optimize", "grid search over decoy/signal intensities");
    add_common(opt, opt_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return run_simulate(sim_args);
        if (key->parsed()) return run_keyrate(key_args, obs_path);
        if (scan->parsed()) return run_scan(scan_args);
        if (opt->parsed()) return run_optimize(opt_args);
    } catch (const mdiqkd::DecoyConditionViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const mdiqkd::DegenerateDenominator& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mdiqkd::ZeroSingleYield& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mdiqkd::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
