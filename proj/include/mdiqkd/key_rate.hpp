#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdiqkd/channel_sim.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/observables.hpp"
#include "mdiqkd/photon_source.hpp"
#include "mdiqkd/qubit_state.hpp"

namespace mdiqkd {

enum class ZeroReason { negative_delta, phase_flip_half, negative_rate, zero_single_yield };

const char* to_string(ZeroReason r);

/// Everything the key-rate formulas consume. The delta report is computed by
/// the caller (make_delta_report) so the same inputs can be evaluated under
/// different coding-error assumptions.
struct KeyRateInputs {
    double s11_z = 0.0;               // certified lower bound
    double e11_x = 0.0;               // certified upper bound
    TwoPulseObservables observables;  // Z basis, for the signal-pair yield and error
    DeltaReport delta_report;
    double f_ec = 1.16;               // error-correction inefficiency
    bool single_basis_decoy = false;
    // Sensitivity toggle for the single-basis phase-flip inflation: divide by
    // the plain two-pulse Z weight instead of its post-selected fraction.
    bool single_basis_plain_delta2 = false;

    void validate() const;
};

/// Key rate per emitted signal-signal pair, with itemized terms.
struct KeyRateReport {
    double rate = 0.0;
    double phase_flip_used = 0.0;  // value fed to the entropy gain term
    double delta11_z = 0.0;        // single-photon-pair share of signal successes
    double gain = 0.0;             // privacy-amplified single-photon term
    double cost = 0.0;             // error-correction term
    std::optional<ZeroReason> zeroed_reason;
};

/// -e*log2(e) - (1-e)*log2(1-e) with H(0) = H(1) = 0.
/// Throws std::domain_error outside [0,1].
double binary_entropy(double e);

/// Baseline rate with no coding errors:
/// a1'*b1'*s11_z*(1 - H(e11_x)) - f * S_yy * H(E_yy).
KeyRateReport keyrate_decoy(const KeyRateInputs& in, const SourceTriple& alice,
                            const SourceTriple& bob);

/// Rate with basis-dependent coding errors: the single-photon gain is scaled
/// by the certified Z-basis ideal fraction and the phase flip inflated by the
/// X-basis one. Negative certified weights zero the rate outright.
KeyRateReport keyrate_basis_error(const KeyRateInputs& in, const SourceTriple& alice,
                                  const SourceTriple& bob);

/// Variant for decoy estimation run in the Z basis only: the phase flip is
/// additionally divided by the Z-basis ideal fraction (inputs.e11_x must have
/// been computed with the Z-basis yield transferred via s11_equal_bases).
KeyRateReport keyrate_single_basis_decoy(const KeyRateInputs& in, const SourceTriple& alice,
                                         const SourceTriple& bob);

/// One-way protocol with a single-photon fraction delta1 of post-selected
/// Z bits: frac_z*delta1*(1 - H(e_x/(frac_x*delta1))) - f*H(detected_e).
KeyRateReport keyrate_single_photon_source(double e_x, double detected_e, double delta1,
                                           const CodingErrorModel& coding, double f_ec,
                                           DeltaMode mode = DeltaMode::flip_mixture);

enum class SourceKind { coherent, thermal };

SourceKind source_kind_from_string(const std::string& s);
const char* to_string(SourceKind k);

struct IntensityGrid {
    std::vector<double> mu_x;
    std::vector<double> mu_y;
};

struct OptimizeSpec {
    IntensityGrid grid;
    SourceKind kind_a = SourceKind::coherent;
    SourceKind kind_b = SourceKind::coherent;
    int k_max = 40;
    DeltaMode mode = DeltaMode::flip_mixture;
    bool single_basis_decoy = false;
    bool single_basis_plain_delta2 = false;
    double f_ec = 1.16;
};

struct GridPoint {
    double mu_x = 0.0;
    double mu_y = 0.0;
    KeyRateReport report;
    std::string error;  // nonempty when this point could not be evaluated
};

struct OptimizeResult {
    GridPoint best;
    std::vector<GridPoint> grid;  // row-major: mu_x outer, mu_y inner
};

/// Exhaustive deterministic grid search maximizing keyrate_basis_error over
/// (mu_x, mu_y) pairs with mu_x < mu_y. Points that fail to evaluate are kept
/// in the grid with rate 0 and an error note. Ties break toward smaller mu_y,
/// then smaller mu_x. Throws ConfigError when no feasible pair exists.
OptimizeResult optimize_intensities(const GroundTruthChannel& channel,
                                    const CodingErrorModel& coding, const OptimizeSpec& spec);

/// OpenMP twin of optimize_intensities; grid points evaluated concurrently,
/// winner selected by the same deterministic rule.
OptimizeResult optimize_intensities_omp(const GroundTruthChannel& channel,
                                        const CodingErrorModel& coding, const OptimizeSpec& spec);

}  // namespace mdiqkd
