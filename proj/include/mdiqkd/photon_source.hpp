#pragma once

#include <string>
#include <vector>

namespace mdiqkd {

/// Truncated photon-number distribution of one physical source.
///
/// probs[k] is the weight of the k-photon component. Mass beyond k_max is
/// never renormalized away silently: it lives in truncation_tail, so
/// sum(probs) + truncation_tail reconstructs 1 to within 1e-12.
struct PhotonNumberSource {
    static constexpr double kDefaultTailTolerance = 1e-10;

    std::string label;
    std::vector<double> probs;      // p_0 .. p_{k_max}
    double mean_photon = 0.0;       // informational only
    double truncation_tail = 0.0;   // probability mass beyond k_max

    int k_max() const { return static_cast<int>(probs.size()) - 1; }
    double p(int k) const { return probs[static_cast<std::size_t>(k)]; }

    /// Throws std::invalid_argument when any p_k is outside [0,1], when
    /// sum + tail strays from 1 by more than 1e-12, or when the tail
    /// exceeds tail_tol.
    void validate(double tail_tol = kDefaultTailTolerance) const;
};

/// The degenerate vacuum source: p_0 = 1.
PhotonNumberSource vacuum_source(int k_max);

/// Phase-randomized coherent light: Poissonian p_k = e^{-mu} mu^k / k!.
/// Rejects mu < 0, k_max < 2, and truncation tails above tail_tol
/// (raise k_max in that case).
PhotonNumberSource coherent_source(double mu, int k_max,
                                   double tail_tol = PhotonNumberSource::kDefaultTailTolerance);

/// Heralded parametric-down-conversion source, modeled with thermal
/// statistics p_k = mu^k / (1+mu)^{k+1}.
PhotonNumberSource heralded_pdc_source(double mu, int k_max,
                                       double tail_tol = PhotonNumberSource::kDefaultTailTolerance);

/// Arbitrary user-supplied distribution; the tail is whatever mass is
/// missing from 1. Validates like the built-in constructors.
PhotonNumberSource custom_source(std::string label, std::vector<double> probs,
                                 double tail_tol = PhotonNumberSource::kDefaultTailTolerance);

/// Outcome of the decoy admissibility check. first_violation_k identifies
/// the smallest k whose ratio comparison failed; k = 1 flags the
/// ratio(2) >= ratio(1) comparison itself.
struct DecoyConditionReport {
    bool ok = true;
    int first_violation_k = -1;
    double lhs = 0.0;  // cross products of the failing comparison
    double rhs = 0.0;
    std::string message() const;
};

/// Admissibility between the weak (x) and strong (y) distributions:
/// y.p(k)/x.p(k) >= y.p(2)/x.p(2) >= y.p(1)/x.p(1) for every k >= 2.
/// Implemented as cross-multiplied comparisons with relative slack 1e-12,
/// so zero probabilities at k >= 3 are handled without dividing.
/// Throws DecoyConditionViolation when x.p(1) or x.p(2) is zero while the
/// matching y component is positive (the condition is undefined there).
DecoyConditionReport check_decoy_condition(const PhotonNumberSource& x,
                                           const PhotonNumberSource& y);

/// One side's three sources. The decoy condition between decoy and signal
/// is an invariant, checked by validate().
struct SourceTriple {
    PhotonNumberSource vacuum;
    PhotonNumberSource decoy;   // the weak (x) source
    PhotonNumberSource signal;  // the strong (y) source

    int k_max() const { return decoy.k_max(); }
    /// Throws DecoyConditionViolation / std::invalid_argument.
    void validate() const;
};

/// Builds the triple (with matching vacuum source) and validates it.
SourceTriple make_source_triple(PhotonNumberSource decoy, PhotonNumberSource signal);

}  // namespace mdiqkd
