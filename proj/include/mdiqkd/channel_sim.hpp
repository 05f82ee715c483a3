#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mdiqkd/observables.hpp"
#include "mdiqkd/photon_source.hpp"

namespace mdiqkd {

/// Ground-truth oracle: exact success probability y(n,m) and error
/// probability e(n,m) for a pulse pair carrying n and m photons. The default
/// tables come from a parametric coincidence model; every entry can be
/// overridden, so soundness tests can feed arbitrary tables.
struct GroundTruthChannel {
    double eta_a = 0.0;     // Alice-arm transmittance, detector efficiency folded in
    double eta_b = 0.0;
    double dark = 0.0;      // dark-count probability per detection window
    double misalign = 0.0;  // misalignment error probability
    int k_max = 0;
    std::vector<double> y_table;  // (k_max+1)^2 row-major over (n,m)
    std::vector<double> e_table;

    double y(int n, int m) const {
        return y_table[static_cast<std::size_t>(n * (k_max + 1) + m)];
    }
    double e(int n, int m) const {
        return e_table[static_cast<std::size_t>(n * (k_max + 1) + m)];
    }
    void set_y(int n, int m, double v) {
        y_table[static_cast<std::size_t>(n * (k_max + 1) + m)] = v;
    }
    void set_e(int n, int m, double v) {
        e_table[static_cast<std::size_t>(n * (k_max + 1) + m)] = v;
    }

    /// Table shapes and entry ranges ([0,1]).
    void validate() const;
};

/// Default model: both arms must announce a detection, so
///   y(n,m) = [1 - (1-dark)(1-eta_a)^n] * [1 - (1-dark)(1-eta_b)^m].
/// Errors mix the misalignment rate with a 50% rate on the fraction of
/// successes attributable to dark counts; vacuum pairs always err at 50%.
GroundTruthChannel build_channel(double eta_a, double eta_b, double dark, double misalign,
                                 int k_max);

/// Applies entry-wise overrides from CSV rows "n,m,y,e" (header optional,
/// '#' comments allowed).
void apply_table_overrides_csv(GroundTruthChannel& channel, std::istream& is);

/// Exact asymptotic observables for one basis: every yield is the
/// photon-number-weighted sum of oracle entries, and every error rate the
/// matching weighted error sum divided by the yield (0 where the yield
/// vanishes). The same tables serve both bases; the oracle is basis
/// independent by construction.
TwoPulseObservables synthesize_observables(const GroundTruthChannel& channel,
                                           const SourceTriple& alice, const SourceTriple& bob,
                                           Basis basis);

struct SimRunConfig {
    std::uint64_t n_pairs = 0;
    std::array<double, 3> probs_alpha{1.0 / 3, 1.0 / 3, 1.0 / 3};  // o, x, y
    std::array<double, 3> probs_beta{1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::array<double, 2> basis_probs{0.5, 0.5};  // Z, X
    std::uint64_t seed = 0;

    void validate() const;
};

struct MonteCarloResult {
    TwoPulseObservables z;
    TwoPulseObservables x;
};

/// Seed-splitting rule for shard i: splitmix64(seed xor (i+1)*0x9E3779B97F4A7C15).
/// Stated here because serial and parallel execution must tally identically.
std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard_index);

/// Finite-size simulation. Trials are partitioned into fixed-size shards,
/// each driven by its own derived seed; per-shard integer tallies are merged
/// in shard order, so the result depends only on (config, seed), never on
/// scheduling. Per pair the draws are: alpha, beta, basis, photon numbers k
/// and l, success, then error only on success.
MonteCarloResult run_monte_carlo(const GroundTruthChannel& channel, const SourceTriple& alice,
                                 const SourceTriple& bob, const SimRunConfig& cfg);

/// OpenMP twin of run_monte_carlo; shards run concurrently and the tallies
/// are bit-identical to the serial reference.
MonteCarloResult run_monte_carlo_omp(const GroundTruthChannel& channel, const SourceTriple& alice,
                                     const SourceTriple& bob, const SimRunConfig& cfg);

}  // namespace mdiqkd
