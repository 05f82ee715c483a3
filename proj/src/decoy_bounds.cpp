#include "mdiqkd/decoy_bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mdiqkd/errors.hpp"

namespace mdiqkd {

void FluctuationSpec::validate() const {
    for (double d : rel_bounds) {
        if (!(d >= 0.0 && d < 1.0))
            throw std::invalid_argument("FluctuationSpec: relative bound outside [0,1)");
    }
}

FluctuationSpec FluctuationSpec::uniform(double rel) {
    FluctuationSpec f;
    f.rel_bounds.fill(rel);
    f.validate();
    return f;
}

FluctuationSpec FluctuationSpec::from_counts(const TwoPulseObservables& obs, double n_std) {
    if (!(n_std >= 0.0)) throw std::invalid_argument("FluctuationSpec: n_std must be >= 0");
    if (!obs.N) throw std::invalid_argument("FluctuationSpec: observables carry no counts");
    FluctuationSpec f;
    for (int i = 0; i < 9; ++i) {
        const double s = obs.S[static_cast<std::size_t>(i)];
        const double n = (*obs.N)[static_cast<std::size_t>(i)];
        if (s <= 0.0 || n <= 0.0) {
            f.rel_bounds[static_cast<std::size_t>(i)] = 0.0;
            continue;
        }
        const double rel = n_std * std::sqrt((1.0 - s) / (s * n));
        f.rel_bounds[static_cast<std::size_t>(i)] = std::min(rel, 1.0 - 1e-12);
    }
    return f;
}

const char* branch_name(S11Branch b) {
    return b == S11Branch::ka_le_kb ? "Ka<=Kb" : "Ka>=Kb";
}

std::pair<double, double> vacuum_corrections(const TwoPulseObservables& obs,
                                             const PhotonNumberSource& xa,
                                             const PhotonNumberSource& xb,
                                             const PhotonNumberSource& ya,
                                             const PhotonNumberSource& yb) {
    const double a0 = xa.p(0), b0 = xb.p(0);
    const double a0p = ya.p(0), b0p = yb.p(0);
    const double s_oo = obs.yield(SourceId::o, SourceId::o);
    const double t0 = a0 * obs.yield(SourceId::o, SourceId::x) +
                      b0 * obs.yield(SourceId::x, SourceId::o) - a0 * b0 * s_oo;
    const double t0p = a0p * obs.yield(SourceId::o, SourceId::y) +
                       b0p * obs.yield(SourceId::y, SourceId::o) - a0p * b0p * s_oo;
    return {t0, t0p};
}

namespace {

// Core evaluation without the admissibility recheck, so the worst-case corner
// search can reuse it after checking once.
S11Bound s11_bound_unchecked(const TwoPulseObservables& obs, const SourceTriple& alice,
                             const SourceTriple& bob) {
    const PhotonNumberSource& xa = alice.decoy;
    const PhotonNumberSource& ya = alice.signal;
    const PhotonNumberSource& xb = bob.decoy;
    const PhotonNumberSource& yb = bob.signal;

    const double a1 = xa.p(1), a2 = xa.p(2);
    const double b1 = xb.p(1), b2 = xb.p(2);
    const double a1p = ya.p(1), a2p = ya.p(2);
    const double b1p = yb.p(1), b2p = yb.p(2);
    if (a1 <= 0.0 || a2 <= 0.0 || b1 <= 0.0 || b2 <= 0.0 || a1p <= 0.0 || a2p <= 0.0 ||
        b1p <= 0.0 || b2p <= 0.0)
        throw std::invalid_argument(
            "s11_lower_bound: one- and two-photon probabilities must be positive on both sides");

    S11Bound out;
    auto [t0, t0p] = vacuum_corrections(obs, xa, xb, ya, yb);
    out.tilde_s0 = t0;
    out.tilde_s0_prime = t0p;
    out.ka = a1p * b2p / (a1 * b2);
    out.kb = a2p * b1p / (a2 * b1);

    const double sxx = obs.yield(SourceId::x, SourceId::x) - t0;
    const double syy = obs.yield(SourceId::y, SourceId::y) - t0p;

    // Both branch values are computed; only the selected one is certified.
    const double num_a = a1p * b2p * sxx - a1 * b2 * syy;
    const double den_a = a1p * a1 * (b2p * b1 - b2 * b1p);
    const double num_b = a2p * b1p * sxx - a2 * b1 * syy;
    const double den_b = b1p * b1 * (a2p * a1 - a1p * a2);

    constexpr double kDegenerate = 1e-15;
    double value, other;
    if (out.ka <= out.kb) {
        out.branch = S11Branch::ka_le_kb;
        if (std::abs(den_a) < kDegenerate)
            throw DegenerateDenominator(
                "s11_lower_bound: branch denominator vanished; separate the decoy and signal "
                "intensities");
        value = num_a / den_a;
        other = std::abs(den_b) < kDegenerate ? std::numeric_limits<double>::quiet_NaN()
                                              : num_b / den_b;
    } else {
        out.branch = S11Branch::ka_ge_kb;
        if (std::abs(den_b) < kDegenerate)
            throw DegenerateDenominator(
                "s11_lower_bound: branch denominator vanished; separate the decoy and signal "
                "intensities");
        value = num_b / den_b;
        other = std::abs(den_a) < kDegenerate ? std::numeric_limits<double>::quiet_NaN()
                                              : num_a / den_a;
    }

    out.raw_value = value;
    out.other_branch_value = other;
    if (value < 0.0) {
        out.value = 0.0;
        out.clamped = true;
    } else if (value > 1.0) {
        out.value = 1.0;
        out.clamped = true;
    } else {
        out.value = value;
    }
    return out;
}

void require_admissible(const SourceTriple& alice, const SourceTriple& bob) {
    const DecoyConditionReport ra = check_decoy_condition(alice.decoy, alice.signal);
    if (!ra.ok) throw DecoyConditionViolation("Alice: " + ra.message());
    const DecoyConditionReport rb = check_decoy_condition(bob.decoy, bob.signal);
    if (!rb.ok) throw DecoyConditionViolation("Bob: " + rb.message());
}

}  // namespace

S11Bound s11_lower_bound(const TwoPulseObservables& obs, const SourceTriple& alice,
                         const SourceTriple& bob) {
    require_admissible(alice, bob);
    return s11_bound_unchecked(obs, alice, bob);
}

double e11x_upper_bound(const TwoPulseObservables& obs_x, double s11_x,
                        const PhotonNumberSource& xa, const PhotonNumberSource& xb) {
    if (!(s11_x > 0.0))
        throw ZeroSingleYield("e11x_upper_bound: certified single-photon-pair yield is zero");
    const double a0 = xa.p(0), a1 = xa.p(1);
    const double b0 = xb.p(0), b1 = xb.p(1);
    if (a1 <= 0.0 || b1 <= 0.0)
        throw std::invalid_argument("e11x_upper_bound: single-photon probabilities must be positive");

    const double num =
        obs_x.error(SourceId::x, SourceId::x) * obs_x.yield(SourceId::x, SourceId::x) -
        a0 * obs_x.error(SourceId::o, SourceId::x) * obs_x.yield(SourceId::o, SourceId::x) -
        b0 * obs_x.error(SourceId::x, SourceId::o) * obs_x.yield(SourceId::x, SourceId::o) +
        a0 * b0 * obs_x.error(SourceId::o, SourceId::o) * obs_x.yield(SourceId::o, SourceId::o);
    const double raw = num / (a1 * b1 * s11_x);
    return std::min(1.0, std::max(0.0, raw));
}

double s11_equal_bases(double s11_z) {
    if (!(s11_z >= 0.0 && s11_z <= 1.0))
        throw std::invalid_argument("s11_equal_bases: yield outside [0,1]");
    return s11_z;
}

namespace {

TwoPulseObservables apply_corner(const TwoPulseObservables& obs, const FluctuationSpec& fluct,
                                 int corner) {
    TwoPulseObservables p = obs;
    for (int cell = 0; cell < 9; ++cell) {
        const double sign = (corner >> cell) & 1 ? -1.0 : 1.0;
        p.S[static_cast<std::size_t>(cell)] =
            obs.S[static_cast<std::size_t>(cell)] *
            (1.0 + sign * fluct.rel_bounds[static_cast<std::size_t>(cell)]);
    }
    return p;
}

WorstCaseBound select_minimum(const std::vector<S11Bound>& bounds, const FluctuationSpec& fluct) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(bounds.size()); ++c) {
        if (bounds[static_cast<std::size_t>(c)].value < bounds[static_cast<std::size_t>(best)].value)
            best = c;
    }
    WorstCaseBound out;
    out.bound = bounds[static_cast<std::size_t>(best)];
    out.corner_index = best;
    for (int cell = 0; cell < 9; ++cell) {
        const bool zero = fluct.rel_bounds[static_cast<std::size_t>(cell)] == 0.0;
        out.corner[static_cast<std::size_t>(cell)] = (!zero && ((best >> cell) & 1)) ? -1 : +1;
    }
    return out;
}

}  // namespace

WorstCaseBound worst_case_bound(const TwoPulseObservables& obs, const SourceTriple& alice,
                                const SourceTriple& bob, const FluctuationSpec& fluct) {
    fluct.validate();
    require_admissible(alice, bob);
    std::vector<S11Bound> bounds(512);
    for (int c = 0; c < 512; ++c)
        bounds[static_cast<std::size_t>(c)] = s11_bound_unchecked(apply_corner(obs, fluct, c), alice, bob);
    return select_minimum(bounds, fluct);
}

WorstCaseBound worst_case_bound_omp(const TwoPulseObservables& obs, const SourceTriple& alice,
                                    const SourceTriple& bob, const FluctuationSpec& fluct) {
    fluct.validate();
    require_admissible(alice, bob);
    std::vector<S11Bound> bounds(512);
    // Every throw condition is independent of the corner, so evaluating the
    // first corner up front keeps exceptions out of the parallel region.
    bounds[0] = s11_bound_unchecked(apply_corner(obs, fluct, 0), alice, bob);
#pragma omp parallel for schedule(static)
    for (int c = 1; c < 512; ++c)
        bounds[static_cast<std::size_t>(c)] = s11_bound_unchecked(apply_corner(obs, fluct, c), alice, bob);
    return select_minimum(bounds, fluct);
}

}  // namespace mdiqkd
