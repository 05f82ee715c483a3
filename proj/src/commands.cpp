#include "mdiqkd/commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mdiqkd/channel_sim.hpp"
#include "mdiqkd/errors.hpp"

namespace mdiqkd {

SimulateResult run_simulate(const RunConfig& cfg) {
    SimulateResult out;
    out.echo = cfg.effective_text();
    const SourceTriple alice = cfg.alice_sources();
    const SourceTriple bob = cfg.bob_sources();
    const GroundTruthChannel channel = cfg.channel();
    if (cfg.mode == "montecarlo") {
        const MonteCarloResult mc = run_monte_carlo_omp(channel, alice, bob, cfg.sim_config());
        out.tables = {mc.z, mc.x};
    } else {
        out.tables = {synthesize_observables(channel, alice, bob, Basis::Z),
                      synthesize_observables(channel, alice, bob, Basis::X)};
    }
    return out;
}

KeyrateOutcome run_keyrate_pipeline(const RunConfig& cfg,
                                    const std::vector<TwoPulseObservables>& tables) {
    const SourceTriple alice = cfg.alice_sources();
    const SourceTriple bob = cfg.bob_sources();

    const TwoPulseObservables* obs_z = find_basis(tables, Basis::Z);
    const TwoPulseObservables* obs_x = find_basis(tables, Basis::X);
    if (!obs_z) throw std::invalid_argument("keyrate: observables are missing the Z basis");
    if (!obs_x) throw std::invalid_argument("keyrate: observables are missing the X basis");

    KeyrateOutcome out;
    if (cfg.has_fluctuation) {
        out.worst_case_used = true;
        const WorstCaseBound wz =
            worst_case_bound_omp(*obs_z, alice, bob, cfg.fluctuation_for(*obs_z));
        out.s11_z = wz.bound;
        out.worst_corner_index = wz.corner_index;
        out.s11_x = cfg.single_basis_decoy
                        ? s11_equal_bases(out.s11_z.value)
                        : worst_case_bound_omp(*obs_x, alice, bob, cfg.fluctuation_for(*obs_x))
                              .bound.value;
    } else {
        out.s11_z = s11_lower_bound(*obs_z, alice, bob);
        out.s11_x = cfg.single_basis_decoy ? s11_equal_bases(out.s11_z.value)
                                           : s11_lower_bound(*obs_x, alice, bob).value;
    }

    out.e11_x = e11x_upper_bound(*obs_x, out.s11_x, alice.decoy, bob.decoy);
    out.deltas = make_delta_report(cfg.coding, cfg.delta_mode());

    KeyRateInputs in;
    in.s11_z = out.s11_z.value;
    in.e11_x = out.e11_x;
    in.observables = *obs_z;
    in.delta_report = out.deltas;
    in.f_ec = cfg.f_ec;
    in.single_basis_decoy = cfg.single_basis_decoy;
    in.single_basis_plain_delta2 = cfg.single_basis_plain_delta2;
    out.report = cfg.single_basis_decoy ? keyrate_single_basis_decoy(in, alice, bob)
                                        : keyrate_basis_error(in, alice, bob);
    return out;
}

ScanResult run_scan(const RunConfig& cfg) {
    if (cfg.scan_distance_km.empty() && cfg.scan_eta.empty())
        throw ConfigError("scan: config has no [scan] grid");
    if (!cfg.table_csv.empty())
        throw ConfigError("scan: channel.table_csv overrides cannot vary with the scan grid");
    if (cfg.has_fluctuation && cfg.fluct_from_counts)
        throw ConfigError("scan: fluctuation.from_counts needs counts, but scans are asymptotic");

    ScanResult out;
    const bool by_distance = !cfg.scan_distance_km.empty();
    out.x_kind = by_distance ? "distance_km" : "eta";
    const std::vector<double>& grid = by_distance ? cfg.scan_distance_km : cfg.scan_eta;

    for (double x : grid) {
        ScanRow row;
        row.x = x;
        row.eta = by_distance ? std::pow(10.0, -cfg.db_per_km * x / 10.0) : x;
        try {
            RunConfig point = cfg;
            point.eta_a = row.eta;
            point.eta_b = row.eta;
            const SourceTriple alice = point.alice_sources();
            const SourceTriple bob = point.bob_sources();
            const GroundTruthChannel channel = point.channel();
            const std::vector<TwoPulseObservables> tables = {
                synthesize_observables(channel, alice, bob, Basis::Z),
                synthesize_observables(channel, alice, bob, Basis::X)};
            row.outcome = run_keyrate_pipeline(point, tables);
        } catch (const ZeroSingleYield&) {
            row.outcome.report = KeyRateReport{};
            row.outcome.report.zeroed_reason = ZeroReason::zero_single_yield;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

OptimizeResult run_optimize(const RunConfig& cfg) {
    if (cfg.opt_mu_x.empty() || cfg.opt_mu_y.empty())
        throw ConfigError("optimize: config needs [optimize] mu_x and mu_y grids");
    if (cfg.alice_x.type == "custom" || cfg.bob_x.type == "custom")
        throw ConfigError("optimize: custom sources have no intensity to optimize");
    OptimizeSpec spec;
    spec.grid.mu_x = cfg.opt_mu_x;
    spec.grid.mu_y = cfg.opt_mu_y;
    spec.kind_a = source_kind_from_string(cfg.alice_x.type);
    spec.kind_b = source_kind_from_string(cfg.bob_x.type);
    spec.k_max = cfg.k_max;
    spec.mode = cfg.delta_mode();
    spec.single_basis_decoy = cfg.single_basis_decoy;
    spec.single_basis_plain_delta2 = cfg.single_basis_plain_delta2;
    spec.f_ec = cfg.f_ec;
    return optimize_intensities_omp(cfg.channel(), cfg.coding, spec);
}

namespace {

std::string reason_text(const KeyRateReport& rep) {
    return rep.zeroed_reason ? to_string(*rep.zeroed_reason) : "";
}

// Error notes land in CSV cells; keep them comma-free.
std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

void write_comment_block(std::ostream& os, const std::string& echo) {
    std::istringstream lines(echo);
    std::string line;
    while (std::getline(lines, line)) os << "# " << line << "\n";
}

}  // namespace

void write_keyrate_csv_header(std::ostream& os) {
    os << "mode,single_basis_decoy,phase_randomized,worst_case,s11_z,branch,clamped,e11_x,"
          "frac_z,frac_x,phase_flip,delta11_z,gain,cost,rate,zeroed_reason\n";
}

void write_keyrate_csv_row(std::ostream& os, const RunConfig& cfg, const KeyrateOutcome& out) {
    os << cfg.mode << ',' << (cfg.single_basis_decoy ? 1 : 0) << ','
       << (cfg.phase_randomized ? 1 : 0) << ',' << (out.worst_case_used ? 1 : 0) << ','
       << format_g17(out.s11_z.value) << ',' << branch_name(out.s11_z.branch) << ','
       << (out.s11_z.clamped ? 1 : 0) << ',' << format_g17(out.e11_x) << ','
       << format_g17(out.deltas.frac_z) << ',' << format_g17(out.deltas.frac_x) << ','
       << format_g17(out.report.phase_flip_used) << ',' << format_g17(out.report.delta11_z) << ','
       << format_g17(out.report.gain) << ',' << format_g17(out.report.cost) << ','
       << format_g17(out.report.rate) << ',' << reason_text(out.report) << "\n";
}

std::string keyrate_human_report(const RunConfig& cfg, const KeyrateOutcome& out) {
    std::ostringstream os;
    os << "s11_z lower bound   : " << format_g17(out.s11_z.value) << "  (branch "
       << branch_name(out.s11_z.branch) << (out.s11_z.clamped ? ", clamped" : "") << ")\n";
    os << "  vacuum corrections: " << format_g17(out.s11_z.tilde_s0) << " / "
       << format_g17(out.s11_z.tilde_s0_prime) << "\n";
    os << "  other branch      : " << format_g17(out.s11_z.other_branch_value)
       << " (diagnostic only)\n";
    if (out.worst_case_used)
        os << "  worst case        : corner " << out.worst_corner_index << " of 512\n";
    os << "s11_x used          : " << format_g17(out.s11_x)
       << (cfg.single_basis_decoy ? "  (transferred from Z basis)" : "") << "\n";
    os << "e11_x upper bound   : " << format_g17(out.e11_x) << "\n";
    os << "ideal fraction Z/X  : " << format_g17(out.deltas.frac_z) << " / "
       << format_g17(out.deltas.frac_x) << "\n";
    os << "phase flip used     : " << format_g17(out.report.phase_flip_used) << "\n";
    os << "delta11_z           : " << format_g17(out.report.delta11_z) << "\n";
    os << "gain / cost         : " << format_g17(out.report.gain) << " / "
       << format_g17(out.report.cost) << "\n";
    os << "rate per signal pair: " << format_g17(out.report.rate) << "\n";
    if (out.report.zeroed_reason)
        os << "zeroed_reason       : " << to_string(*out.report.zeroed_reason) << "\n";
    return os.str();
}

void write_scan_csv(std::ostream& os, const ScanResult& scan, const std::string& echo) {
    write_comment_block(os, echo);
    os << scan.x_kind << ",eta,rate,s11_z,e11_x,frac_z,frac_x,zeroed_reason,error\n";
    for (const ScanRow& row : scan.rows) {
        os << format_g17(row.x) << ',' << format_g17(row.eta) << ','
           << format_g17(row.outcome.report.rate) << ',' << format_g17(row.outcome.s11_z.value)
           << ',' << format_g17(row.outcome.e11_x) << ',' << format_g17(row.outcome.deltas.frac_z)
           << ',' << format_g17(row.outcome.deltas.frac_x) << ',' << reason_text(row.outcome.report)
           << ',' << csv_safe(row.error) << "\n";
    }
}

void write_optimize_csv(std::ostream& os, const OptimizeResult& result, const std::string& echo) {
    write_comment_block(os, echo);
    os << "mu_x,mu_y,rate,zeroed_reason,error\n";
    for (const GridPoint& g : result.grid) {
        os << format_g17(g.mu_x) << ',' << format_g17(g.mu_y) << ',' << format_g17(g.report.rate)
           << ',' << reason_text(g.report) << ',' << csv_safe(g.error) << "\n";
    }
}

}  // namespace mdiqkd
