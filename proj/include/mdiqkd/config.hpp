#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdiqkd/channel_sim.hpp"
#include "mdiqkd/key_rate.hpp"
#include "mdiqkd/photon_source.hpp"
#include "mdiqkd/qubit_state.hpp"

namespace mdiqkd {

/// One source's config entry: a named distribution or an explicit
/// probability vector.
struct SourceSpec {
    std::string type = "coherent";  // coherent | thermal | custom
    double mu = 0.0;
    std::vector<double> probs;  // custom only
    double tail_tolerance = PhotonNumberSource::kDefaultTailTolerance;
};

/// Parsed, validated run configuration. See README for the file schema.
/// All defaults are materialized at parse time, so effective_text() is a
/// complete, re-parsable description of the run.
struct RunConfig {
    SourceSpec alice_x, alice_y, bob_x, bob_y;

    double eta_a = 0.1;
    double eta_b = 0.1;
    double dark = 0.0;
    double misalign = 0.0;
    int k_max = 40;
    std::string table_csv;  // optional per-entry channel-table overrides

    CodingErrorModel coding;

    bool has_fluctuation = false;
    bool fluct_from_counts = false;
    double fluct_n_std = 5.0;
    std::array<double, 9> fluct_cells{};

    double f_ec = 1.16;
    std::string mode = "asymptotic";  // asymptotic | montecarlo
    bool single_basis_decoy = false;
    bool phase_randomized = false;
    bool single_basis_plain_delta2 = false;
    std::uint64_t seed = 1;
    std::uint64_t n_pairs = 1000000;
    std::array<double, 3> p_alice{1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::array<double, 3> p_bob{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double p_basis_z = 0.5;

    std::vector<double> scan_distance_km;
    std::vector<double> scan_eta;
    double db_per_km = 0.2;

    std::vector<double> opt_mu_x;
    std::vector<double> opt_mu_y;

    /// Parses "[section]" / "key = value" text; '#' and ';' start comments.
    /// Unknown keys, malformed values, and inconsistent combinations raise
    /// ConfigError with the offending key and line.
    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);

    /// Canonical echo of every effective parameter; parsing it back yields an
    /// identical configuration (floats printed with 17 significant digits).
    std::string effective_text() const;

    SourceTriple alice_sources() const;
    SourceTriple bob_sources() const;
    /// Parametric channel with any table_csv overrides applied.
    GroundTruthChannel channel() const;
    DeltaMode delta_mode() const {
        return phase_randomized ? DeltaMode::phase_randomized : DeltaMode::flip_mixture;
    }
    SimRunConfig sim_config() const;
    FluctuationSpec fluctuation_for(const TwoPulseObservables& obs) const;
};

}  // namespace mdiqkd
