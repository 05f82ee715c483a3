#include "mdiqkd/qubit_state.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace mdiqkd {

using cplx = DensityMatrix2::cplx;

DensityMatrix2 DensityMatrix2::pure(cplx amp0, cplx amp1) {
    DensityMatrix2 r;
    r.m[0][0] = amp0 * std::conj(amp0);
    r.m[0][1] = amp0 * std::conj(amp1);
    r.m[1][0] = amp1 * std::conj(amp0);
    r.m[1][1] = amp1 * std::conj(amp1);
    return r;
}

DensityMatrix2 DensityMatrix2::basis_state(int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("basis_state: bit must be 0 or 1");
    return bit == 0 ? pure(1.0, 0.0) : pure(0.0, 1.0);
}

DensityMatrix2 DensityMatrix2::maximally_mixed() {
    DensityMatrix2 r;
    r.m[0][0] = 0.5;
    r.m[1][1] = 0.5;
    return r;
}

double DensityMatrix2::trace() const { return m[0][0].real() + m[1][1].real(); }

double DensityMatrix2::determinant() const {
    return m[0][0].real() * m[1][1].real() - (m[0][1] * m[1][0]).real();
}

double DensityMatrix2::min_eigenvalue() const {
    const double t = trace();
    const double half_gap = std::sqrt(std::max(0.0, 0.25 * t * t - determinant()));
    return 0.5 * t - half_gap;
}

double DensityMatrix2::max_eigenvalue() const {
    const double t = trace();
    const double half_gap = std::sqrt(std::max(0.0, 0.25 * t * t - determinant()));
    return 0.5 * t + half_gap;
}

bool DensityMatrix2::is_hermitian(double tol) const {
    return std::abs(m[0][0].imag()) <= tol && std::abs(m[1][1].imag()) <= tol &&
           std::abs(m[0][1] - std::conj(m[1][0])) <= tol;
}

bool DensityMatrix2::is_psd(double tol) const { return min_eigenvalue() >= -tol; }

void DensityMatrix2::validate(double tol) const {
    if (!is_hermitian(tol)) throw std::invalid_argument("DensityMatrix2: not Hermitian");
    if (std::abs(trace() - 1.0) > tol) throw std::invalid_argument("DensityMatrix2: trace != 1");
    if (!is_psd(tol)) throw std::invalid_argument("DensityMatrix2: not positive semidefinite");
}

DensityMatrix2 operator+(const DensityMatrix2& a, const DensityMatrix2& b) {
    DensityMatrix2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
}

DensityMatrix2 operator-(const DensityMatrix2& a, const DensityMatrix2& b) {
    DensityMatrix2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
    return r;
}

DensityMatrix2 operator*(double s, const DensityMatrix2& a) {
    DensityMatrix2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = s * a.m[i][j];
    return r;
}

double CodingErrorModel::theta(Side s, bool x_basis) const {
    if (s == Side::alice) return x_basis ? theta_ax : theta_az;
    return x_basis ? theta_bx : theta_bz;
}

double CodingErrorModel::flip_p(Side s, bool x_basis) const {
    const std::optional<double>& fixed = x_basis ? flip_p_x : flip_p_z;
    if (fixed) return *fixed;
    return std::tan(theta(s, x_basis));
}

void CodingErrorModel::validate() const {
    constexpr double half_pi = 1.5707963267948966;
    for (double th : {theta_az, theta_ax, theta_bz, theta_bx}) {
        if (!(th >= 0.0 && th <= half_pi))
            throw std::invalid_argument("CodingErrorModel: threshold angle outside [0, pi/2]");
    }
    for (double g : {g_z, g_x}) {
        if (!(g >= 0.0 && g < 1.0))
            throw std::invalid_argument("CodingErrorModel: outlier fraction outside [0,1)");
    }
    if (!(delta_x_max >= 0.0 && delta_x_max <= half_pi))
        throw std::invalid_argument("CodingErrorModel: delta_x_max outside [0, pi/2]");
    for (const std::optional<double>& p : {flip_p_z, flip_p_x}) {
        if (p && !(*p >= 0.0 && *p < 0.5))
            throw std::invalid_argument("CodingErrorModel: flip probability outside [0, 1/2)");
    }
}

DensityMatrix2 actual_state(double theta, double delta_phase, int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("actual_state: bit must be 0 or 1");
    const cplx off = std::polar(std::sin(theta), delta_phase);
    const double c = std::cos(theta);
    return bit == 0 ? DensityMatrix2::pure(c, off) : DensityMatrix2::pure(off, c);
}

DensityMatrix2 flip_mixture(const DensityMatrix2& rho_intended_bit,
                            const DensityMatrix2& rho_wrong_bit, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("flip_mixture: p outside [0,1]");
    return (1.0 - p) * rho_intended_bit + p * rho_wrong_bit;
}

Decomposition decompose_toward(const DensityMatrix2& rho, const DensityMatrix2& target) {
    if (std::abs(target.determinant()) > 1e-9 || std::abs(target.trace() - 1.0) > 1e-9)
        throw std::invalid_argument("decompose_toward: target must be a pure state");

    // det(rho - d*target) = det(rho) - d * tr(adj(rho) * target) and, via
    // adj(A) = tr(A) I - A, the linear coefficient is tr(rho) - tr(rho*target).
    const double tr_rho_target = (rho.m[0][0] * target.m[0][0] + rho.m[0][1] * target.m[1][0] +
                                  rho.m[1][0] * target.m[0][1] + rho.m[1][1] * target.m[1][1])
                                     .real();
    const double q = rho.trace() - tr_rho_target;
    const double det = rho.determinant();

    double delta;
    if (q <= 1e-15) {
        delta = 1.0;  // rho already equals the target
    } else {
        delta = std::min(1.0, std::max(0.0, det / q));
    }

    Decomposition out;
    out.delta = delta;
    if (delta < 1.0 - 1e-12) {
        out.residual = (1.0 / (1.0 - delta)) * (rho - delta * target);
    } else {
        out.delta = 1.0;
    }
    return out;
}

double delta_flip(double theta) {
    const double c = std::cos(theta);
    return c * c * (1.0 - 2.0 * std::tan(theta));
}

double delta_phase_randomized(double theta_x, double delta_x) {
    const double c = std::cos(theta_x);
    return c * c - std::sin(theta_x) * std::sin(delta_x) / 2.0;
}

double ideal_fraction(double delta) {
    if (delta > 1.0 + 1e-9) throw std::invalid_argument("ideal_fraction: delta > 1");
    const double d = std::min(1.0, std::max(0.0, delta));
    return d / (2.0 - d);
}

double two_pulse_delta(double delta_a, double delta_b) {
    if (delta_a <= 0.0 || delta_b <= 0.0) return 0.0;
    return delta_a * delta_b;
}

double outlier_adjust(double frac, double g) {
    if (!(frac >= 0.0 && frac <= 1.0)) throw std::invalid_argument("outlier_adjust: frac outside [0,1]");
    if (!(g >= 0.0 && g < 1.0)) throw std::invalid_argument("outlier_adjust: g outside [0,1)");
    return frac * (1.0 - g) / (1.0 + g);
}

ComplementState complement_state(const DensityMatrix2& rho) {
    ComplementState out;
    out.state.m[0][0] = cplx(1.0 - rho.m[0][0].real(), -rho.m[0][0].imag());
    out.state.m[1][1] = cplx(1.0 - rho.m[1][1].real(), -rho.m[1][1].imag());
    out.state.m[0][1] = -rho.m[0][1];
    out.state.m[1][0] = -rho.m[1][0];
    out.psd = out.state.is_psd(1e-12);
    // Off-diagonals cancel exactly; diagonals (1-a)+a round back to 1 for
    // a in [0,1], so the half-sum with rho reconstructs I/2 bitwise.
    assert((out.state.m[0][0] + rho.m[0][0]) == cplx(1.0, 0.0) || !rho.is_hermitian(1e-9));
    return out;
}

namespace {

double side_delta(const CodingErrorModel& coding, CodingErrorModel::Side side, bool x_basis,
                  DeltaMode mode) {
    const double th = coding.theta(side, x_basis);
    if (mode == DeltaMode::phase_randomized && x_basis)
        return delta_phase_randomized(th, coding.delta_x_max);
    // Z-basis pulses keep the random-flip decomposition in both modes.
    return delta_flip(th);
}

}  // namespace

DeltaReport make_delta_report(const CodingErrorModel& coding, DeltaMode mode) {
    coding.validate();
    using Side = CodingErrorModel::Side;
    DeltaReport rep;
    rep.mode = mode;
    rep.delta_z = side_delta(coding, Side::alice, false, mode);
    rep.delta_x = side_delta(coding, Side::alice, true, mode);
    rep.delta_bz = side_delta(coding, Side::bob, false, mode);
    rep.delta_bx = side_delta(coding, Side::bob, true, mode);
    rep.delta2_z = two_pulse_delta(rep.delta_z, rep.delta_bz);
    rep.delta2_x = two_pulse_delta(rep.delta_x, rep.delta_bx);
    rep.frac_z = outlier_adjust(ideal_fraction(rep.delta2_z), coding.g_z);
    rep.frac_x = outlier_adjust(ideal_fraction(rep.delta2_x), coding.g_x);
    return rep;
}

DeltaReport make_delta_report_single(const CodingErrorModel& coding, DeltaMode mode) {
    coding.validate();
    using Side = CodingErrorModel::Side;
    DeltaReport rep;
    rep.mode = mode;
    rep.delta_z = side_delta(coding, Side::alice, false, mode);
    rep.delta_x = side_delta(coding, Side::alice, true, mode);
    rep.delta_bz = 1.0;
    rep.delta_bx = 1.0;
    rep.delta2_z = std::max(0.0, rep.delta_z);
    rep.delta2_x = std::max(0.0, rep.delta_x);
    rep.frac_z = outlier_adjust(ideal_fraction(rep.delta_z), coding.g_z);
    rep.frac_x = outlier_adjust(ideal_fraction(rep.delta_x), coding.g_x);
    return rep;
}

}  // namespace mdiqkd
