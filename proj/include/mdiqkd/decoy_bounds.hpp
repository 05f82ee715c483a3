#pragma once

#include <array>
#include <utility>

#include "mdiqkd/observables.hpp"
#include "mdiqkd/photon_source.hpp"

namespace mdiqkd {

/// Symmetric per-cell relative deviation bounds for the observed yields,
/// indexed like TwoPulseObservables cells. Entries in [0, 1).
struct FluctuationSpec {
    std::array<double, 9> rel_bounds{};

    void validate() const;
    static FluctuationSpec uniform(double rel);

    /// Derives each bound as n_std binomial standard errors of the observed
    /// yield, in relative terms: n_std * sqrt((1-S) / (S*N)). Cells with
    /// S = 0 or N = 0 get 0; results are capped just below 1. This is a
    /// modeling convenience, not a confidence statement.
    static FluctuationSpec from_counts(const TwoPulseObservables& obs, double n_std = 5.0);
};

enum class S11Branch { ka_le_kb, ka_ge_kb };

const char* branch_name(S11Branch b);

/// Certified lower bound on the two-single-photon yield, with diagnostics.
struct S11Bound {
    double value = 0.0;              // clamped to [0,1]
    S11Branch branch = S11Branch::ka_le_kb;
    double ka = 0.0;
    double kb = 0.0;
    double tilde_s0 = 0.0;           // vacuum correction, decoy pair
    double tilde_s0_prime = 0.0;     // vacuum correction, signal pair
    double raw_value = 0.0;          // before clamping
    double other_branch_value = 0.0; // diagnostic only; not certified
    bool clamped = false;
};

/// Vacuum-event corrections for the decoy pair and the signal pair:
///   a0*S(o,x) + b0*S(x,o) - a0*b0*S(o,o)   and the primed analogue.
/// Returns (tilde_s0, tilde_s0_prime).
std::pair<double, double> vacuum_corrections(const TwoPulseObservables& obs,
                                             const PhotonNumberSource& xa,
                                             const PhotonNumberSource& xb,
                                             const PhotonNumberSource& ya,
                                             const PhotonNumberSource& yb);

/// Two-branch lower bound on the two-single-photon yield from the nine
/// observed yields of one basis. Selects the branch by comparing
/// K_a = a1'*b2'/(a1*b2) against K_b = a2'*b1'/(a2*b1); only the selected
/// branch is certified.
///
/// Throws DecoyConditionViolation if either side fails the admissibility
/// check, DegenerateDenominator when the selected branch denominator is 0
/// within 1e-15 (decoy and signal intensities too similar).
S11Bound s11_lower_bound(const TwoPulseObservables& obs, const SourceTriple& alice,
                         const SourceTriple& bob);

/// Upper bound on the error rate of single-photon pairs in the X basis,
/// clamped to [0,1]. s11_x must be a certified positive lower bound; throws
/// ZeroSingleYield otherwise (callers must treat that as "no key").
double e11x_upper_bound(const TwoPulseObservables& obs_x, double s11_x,
                        const PhotonNumberSource& xa, const PhotonNumberSource& xb);

/// Transfer of the Z-basis single-photon-pair yield to the X basis, valid
/// when both bases emit the same photon-number-space states (the
/// single-photon pair density matrix is basis independent).
double s11_equal_bases(double s11_z);

struct WorstCaseBound {
    S11Bound bound;
    std::array<int, 9> corner{};  // -1/+1 per cell; +1 wherever rel bound is 0
    int corner_index = 0;
};

/// Minimizes s11_lower_bound over all 512 sign corners
/// S -> S * (1 +/- rel_bound) per cell. Exhaustive by design: monotonicity
/// is never assumed. Ties land on the smallest corner index, so results are
/// independent of evaluation order. With all bounds zero this reproduces
/// s11_lower_bound bitwise.
WorstCaseBound worst_case_bound(const TwoPulseObservables& obs, const SourceTriple& alice,
                                const SourceTriple& bob, const FluctuationSpec& fluct);

/// OpenMP twin of worst_case_bound; identical results, corners evaluated in
/// parallel. The serial version is the reference implementation.
WorstCaseBound worst_case_bound_omp(const TwoPulseObservables& obs, const SourceTriple& alice,
                                    const SourceTriple& bob, const FluctuationSpec& fluct);

}  // namespace mdiqkd
