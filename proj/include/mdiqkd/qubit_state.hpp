#pragma once

#include <array>
#include <complex>
#include <optional>

namespace mdiqkd {

/// 2x2 Hermitian density operator with value semantics.
struct DensityMatrix2 {
    using cplx = std::complex<double>;

    // Row-major entries; validity (Hermitian, trace 1, PSD) is checked by
    // validate(), not enforced by construction.
    std::array<std::array<cplx, 2>, 2> m{};

    static DensityMatrix2 pure(cplx amp0, cplx amp1);
    static DensityMatrix2 basis_state(int bit);  // |0><0| or |1><1|
    static DensityMatrix2 maximally_mixed();     // I/2

    double trace() const;
    double determinant() const;
    double min_eigenvalue() const;
    double max_eigenvalue() const;

    bool is_hermitian(double tol = 1e-12) const;
    bool is_psd(double tol = 1e-12) const;
    /// Hermitian within tol, trace 1 within tol, eigenvalues >= -tol.
    void validate(double tol = 1e-12) const;
};

DensityMatrix2 operator+(const DensityMatrix2& a, const DensityMatrix2& b);
DensityMatrix2 operator-(const DensityMatrix2& a, const DensityMatrix2& b);
DensityMatrix2 operator*(double s, const DensityMatrix2& a);

/// How the ideal sub-source weights are certified: intentional random bit
/// flips, or a (possibly imperfect) phase-randomizing operation in X basis.
enum class DeltaMode { flip_mixture, phase_randomized };

/// Threshold angles and protocol knobs for basis-dependent coding errors.
///
/// Angles bound the per-pulse error angles of each side in each basis; pulses
/// may vary and correlate below the threshold, which is what the worst-case
/// weight formulas absorb. g_z/g_x allow a small fraction of pulses above
/// threshold. delta_x_max bounds the phase-randomization imperfection.
struct CodingErrorModel {
    double theta_az = 0.0;
    double theta_ax = 0.0;
    double theta_bz = 0.0;
    double theta_bx = 0.0;
    double g_z = 0.0;
    double g_x = 0.0;
    double delta_x_max = 0.0;
    // Intentional wrong-state probabilities; default tan(threshold angle)
    // of the side/basis they are applied to.
    std::optional<double> flip_p_z;
    std::optional<double> flip_p_x;

    enum class Side { alice, bob };

    double theta(Side s, bool x_basis) const;
    double flip_p(Side s, bool x_basis) const;

    /// Angles in [0, pi/2] (pi/2 itself is the swapped-basis pathology and
    /// must remain expressible), g in [0,1), explicit flip probabilities in
    /// [0, 1/2).
    void validate() const;
};

/// Certified ideal-sub-source weights and post-selected fractions.
struct DeltaReport {
    double delta_z = 1.0;   // single-pulse ideal weight, sender A, Z basis
    double delta_x = 1.0;   // single-pulse ideal weight, sender A, X basis
    double delta_bz = 1.0;  // sender B
    double delta_bx = 1.0;
    double delta2_z = 1.0;  // two-pulse products
    double delta2_x = 1.0;
    double frac_z = 1.0;    // post-selected ideal fractions (outlier-adjusted)
    double frac_x = 1.0;
    DeltaMode mode = DeltaMode::flip_mixture;
};

/// Density matrix of the erroneously prepared pure state, written in the
/// coordinates of its own basis: bit 0 gives cos(theta)|0> +
/// e^{i delta} sin(theta)|1>, bit 1 the same with the roles swapped.
DensityMatrix2 actual_state(double theta, double delta_phase, int bit);

/// (1-p) * intended + p * wrong.
DensityMatrix2 flip_mixture(const DensityMatrix2& rho_intended_bit,
                            const DensityMatrix2& rho_wrong_bit, double p);

struct Decomposition {
    double delta = 0.0;
    std::optional<DensityMatrix2> residual;  // absent when delta == 1
};

/// Largest Delta with rho - Delta*target positive semidefinite, target pure.
/// For 2x2 this is exact: det(rho - Delta*target) is linear in Delta, so
/// Delta_max = min(1, det(rho) / (tr(rho) - tr(rho*target))).
/// Delta = 0 is always feasible; no error paths.
Decomposition decompose_toward(const DensityMatrix2& rho, const DensityMatrix2& target);

/// Certified ideal weight under intentional flips with p = tan(theta):
/// cos^2(theta) * (1 - 2 tan(theta)). May be <= 0 for tan(theta) >= 1/2;
/// callers clamp downstream (no certifiable ideal sub-source).
double delta_flip(double theta);

/// Certified ideal weight in X basis under imperfect phase randomization:
/// cos^2(theta_x) - sin(theta_x) * sin(delta_x) / 2.
double delta_phase_randomized(double theta_x, double delta_x);

/// Lower bound on the share of post-selected bits from the ideal sub-source:
/// max(0, delta) / (2 - max(0, delta)). Negative delta clamps to 0 (nothing
/// certifiable).
double ideal_fraction(double delta);

/// Two-pulse ideal weight: the product of the per-side weights, clamped at 0
/// when either side certifies nothing.
double two_pulse_delta(double delta_a, double delta_b);

/// Above-threshold outlier fraction g rescales a certified fraction by
/// (1-g)/(1+g).
double outlier_adjust(double frac, double g);

struct ComplementState {
    DensityMatrix2 state;
    bool psd = true;  // flagged, not failed, when the complement dips below PSD
};

/// The operator rho_bar = I - rho, which satisfies (rho_bar + rho)/2 = I/2
/// exactly (bitwise, for diagonals in [0,1]).
ComplementState complement_state(const DensityMatrix2& rho);

/// Two-pulse weights and post-selected fractions for the relay protocol.
DeltaReport make_delta_report(const CodingErrorModel& coding, DeltaMode mode);

/// Single-pulse variant for the one-way protocol (sender = Alice).
DeltaReport make_delta_report_single(const CodingErrorModel& coding, DeltaMode mode);

}  // namespace mdiqkd
