#include "mdiqkd/key_rate.hpp"

#include <cmath>
#include <stdexcept>

#include "mdiqkd/errors.hpp"

namespace mdiqkd {

const char* to_string(ZeroReason r) {
    switch (r) {
        case ZeroReason::negative_delta: return "negative_delta";
        case ZeroReason::phase_flip_half: return "phase_flip_half";
        case ZeroReason::negative_rate: return "negative_rate";
        case ZeroReason::zero_single_yield: return "zero_single_yield";
    }
    return "?";
}

void KeyRateInputs::validate() const {
    if (!(f_ec >= 1.0 && f_ec <= 2.0))
        throw std::invalid_argument("KeyRateInputs: f_ec outside [1,2]");
    if (!(s11_z >= 0.0 && s11_z <= 1.0))
        throw std::invalid_argument("KeyRateInputs: s11_z outside [0,1]");
    if (!(e11_x >= 0.0 && e11_x <= 1.0))
        throw std::invalid_argument("KeyRateInputs: e11_x outside [0,1]");
    if (observables.basis != Basis::Z)
        throw std::invalid_argument("KeyRateInputs: observables must be the Z-basis table");
    observables.validate();
}

double binary_entropy(double e) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("binary_entropy: argument outside [0,1]");
    if (e == 0.0 || e == 1.0) return 0.0;
    return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

KeyRateReport keyrate_decoy(const KeyRateInputs& in, const SourceTriple& alice,
                            const SourceTriple& bob) {
    in.validate();
    KeyRateReport rep;
    const double a1p = alice.signal.p(1), b1p = bob.signal.p(1);
    const double syy = in.observables.yield(SourceId::y, SourceId::y);
    const double eyy = in.observables.error(SourceId::y, SourceId::y);
    rep.delta11_z = syy > 0.0 ? a1p * b1p * in.s11_z / syy : 0.0;
    if (!(in.s11_z > 0.0)) {
        rep.zeroed_reason = ZeroReason::zero_single_yield;
        return rep;
    }
    const double pf = std::min(0.5, in.e11_x);
    rep.phase_flip_used = pf;
    rep.gain = (a1p * b1p * in.s11_z) * (1.0 - binary_entropy(pf));
    rep.cost = in.f_ec * syy * binary_entropy(eyy);
    const double raw = rep.gain - rep.cost;
    if (raw < 0.0) {
        rep.zeroed_reason = ZeroReason::negative_rate;
        rep.rate = 0.0;
    } else {
        rep.rate = raw;
    }
    return rep;
}

namespace {

// Shared body of the two coding-error variants; they differ only in the
// phase-flip divisor.
KeyRateReport keyrate_with_deltas(const KeyRateInputs& in, const SourceTriple& alice,
                                  const SourceTriple& bob, double pf_divisor,
                                  bool divisor_positive) {
    KeyRateReport rep;
    const DeltaReport& d = in.delta_report;
    const double a1p = alice.signal.p(1), b1p = bob.signal.p(1);
    const double syy = in.observables.yield(SourceId::y, SourceId::y);
    const double eyy = in.observables.error(SourceId::y, SourceId::y);
    rep.delta11_z = syy > 0.0 ? a1p * b1p * in.s11_z / syy : 0.0;
    if (!(in.s11_z > 0.0)) {
        rep.zeroed_reason = ZeroReason::zero_single_yield;
        return rep;
    }
    if (!(d.frac_z > 0.0) || !(d.frac_x > 0.0) || !divisor_positive) {
        rep.zeroed_reason = ZeroReason::negative_delta;
        return rep;
    }
    const double pf = std::min(0.5, in.e11_x / pf_divisor);
    rep.phase_flip_used = pf;
    rep.gain = d.frac_z * (a1p * b1p * in.s11_z) * (1.0 - binary_entropy(pf));
    rep.cost = in.f_ec * syy * binary_entropy(eyy);
    const double raw = rep.gain - rep.cost;
    if (raw > 0.0) {
        rep.rate = raw;
    } else {
        rep.rate = 0.0;
        if (raw < 0.0)
            rep.zeroed_reason =
                pf >= 0.5 ? ZeroReason::phase_flip_half : ZeroReason::negative_rate;
    }
    return rep;
}

}  // namespace

KeyRateReport keyrate_basis_error(const KeyRateInputs& in, const SourceTriple& alice,
                                  const SourceTriple& bob) {
    in.validate();
    return keyrate_with_deltas(in, alice, bob, in.delta_report.frac_x,
                               in.delta_report.frac_x > 0.0);
}

KeyRateReport keyrate_single_basis_decoy(const KeyRateInputs& in, const SourceTriple& alice,
                                         const SourceTriple& bob) {
    in.validate();
    const DeltaReport& d = in.delta_report;
    const double z_factor = in.single_basis_plain_delta2 ? std::max(0.0, d.delta2_z) : d.frac_z;
    const double divisor = z_factor * d.frac_x;
    return keyrate_with_deltas(in, alice, bob, divisor, divisor > 0.0);
}

KeyRateReport keyrate_single_photon_source(double e_x, double detected_e, double delta1,
                                           const CodingErrorModel& coding, double f_ec,
                                           DeltaMode mode) {
    if (!(delta1 > 0.0 && delta1 <= 1.0))
        throw std::invalid_argument("keyrate_single_photon_source: delta1 outside (0,1]");
    if (!(e_x >= 0.0 && e_x <= 1.0) || !(detected_e >= 0.0 && detected_e <= 1.0))
        throw std::invalid_argument("keyrate_single_photon_source: error rate outside [0,1]");
    if (!(f_ec >= 1.0 && f_ec <= 2.0))
        throw std::invalid_argument("keyrate_single_photon_source: f_ec outside [1,2]");

    const DeltaReport d = make_delta_report_single(coding, mode);
    KeyRateReport rep;
    rep.delta11_z = delta1;
    if (!(d.frac_z > 0.0) || !(d.frac_x > 0.0)) {
        rep.zeroed_reason = ZeroReason::negative_delta;
        return rep;
    }
    const double pf = std::min(0.5, e_x / (d.frac_x * delta1));
    rep.phase_flip_used = pf;
    rep.gain = d.frac_z * delta1 * (1.0 - binary_entropy(pf));
    rep.cost = f_ec * binary_entropy(detected_e);
    const double raw = rep.gain - rep.cost;
    if (raw > 0.0) {
        rep.rate = raw;
    } else {
        rep.rate = 0.0;
        if (raw < 0.0)
            rep.zeroed_reason =
                pf >= 0.5 ? ZeroReason::phase_flip_half : ZeroReason::negative_rate;
    }
    return rep;
}

SourceKind source_kind_from_string(const std::string& s) {
    if (s == "coherent") return SourceKind::coherent;
    if (s == "thermal") return SourceKind::thermal;
    throw std::invalid_argument("unknown source kind '" + s + "' (coherent|thermal)");
}

const char* to_string(SourceKind k) {
    return k == SourceKind::coherent ? "coherent" : "thermal";
}

namespace {

PhotonNumberSource make_source(SourceKind kind, double mu, int k_max) {
    return kind == SourceKind::coherent ? coherent_source(mu, k_max)
                                        : heralded_pdc_source(mu, k_max);
}

GridPoint evaluate_grid_point(const GroundTruthChannel& channel, const DeltaReport& deltas,
                              const OptimizeSpec& spec, double mu_x, double mu_y) {
    GridPoint g;
    g.mu_x = mu_x;
    g.mu_y = mu_y;
    try {
        const SourceTriple alice = make_source_triple(make_source(spec.kind_a, mu_x, spec.k_max),
                                                      make_source(spec.kind_a, mu_y, spec.k_max));
        const SourceTriple bob = make_source_triple(make_source(spec.kind_b, mu_x, spec.k_max),
                                                    make_source(spec.kind_b, mu_y, spec.k_max));
        const TwoPulseObservables obs_z = synthesize_observables(channel, alice, bob, Basis::Z);
        const TwoPulseObservables obs_x = synthesize_observables(channel, alice, bob, Basis::X);
        const S11Bound s11_z = s11_lower_bound(obs_z, alice, bob);
        const double s11_x = spec.single_basis_decoy ? s11_equal_bases(s11_z.value)
                                                     : s11_lower_bound(obs_x, alice, bob).value;

        KeyRateInputs in;
        in.s11_z = s11_z.value;
        in.observables = obs_z;
        in.delta_report = deltas;
        in.f_ec = spec.f_ec;
        in.single_basis_decoy = spec.single_basis_decoy;
        in.single_basis_plain_delta2 = spec.single_basis_plain_delta2;
        try {
            in.e11_x = e11x_upper_bound(obs_x, s11_x, alice.decoy, bob.decoy);
        } catch (const ZeroSingleYield&) {
            g.report.zeroed_reason = ZeroReason::zero_single_yield;  // zero rate, not an error
            return g;
        }
        g.report = spec.single_basis_decoy ? keyrate_single_basis_decoy(in, alice, bob)
                                           : keyrate_basis_error(in, alice, bob);
    } catch (const std::exception& e) {
        g.report = KeyRateReport{};
        g.error = e.what();
    }
    return g;
}

bool better_point(const GridPoint& c, const GridPoint& b) {
    if (c.report.rate != b.report.rate) return c.report.rate > b.report.rate;
    if (c.mu_y != b.mu_y) return c.mu_y < b.mu_y;
    return c.mu_x < b.mu_x;
}

std::vector<GridPoint> feasible_pairs(const OptimizeSpec& spec) {
    std::vector<GridPoint> pts;
    for (double mx : spec.grid.mu_x)
        for (double my : spec.grid.mu_y)
            if (mx < my) {
                GridPoint g;
                g.mu_x = mx;
                g.mu_y = my;
                pts.push_back(g);
            }
    if (pts.empty())
        throw ConfigError("optimize_intensities: no grid pair satisfies mu_x < mu_y");
    return pts;
}

OptimizeResult pick_best(std::vector<GridPoint> pts) {
    OptimizeResult out;
    out.best = pts.front();
    for (const GridPoint& g : pts)
        if (better_point(g, out.best)) out.best = g;
    out.grid = std::move(pts);
    return out;
}

}  // namespace

OptimizeResult optimize_intensities(const GroundTruthChannel& channel,
                                    const CodingErrorModel& coding, const OptimizeSpec& spec) {
    const DeltaReport deltas = make_delta_report(coding, spec.mode);
    std::vector<GridPoint> pts = feasible_pairs(spec);
    for (GridPoint& g : pts) g = evaluate_grid_point(channel, deltas, spec, g.mu_x, g.mu_y);
    return pick_best(std::move(pts));
}

OptimizeResult optimize_intensities_omp(const GroundTruthChannel& channel,
                                        const CodingErrorModel& coding, const OptimizeSpec& spec) {
    const DeltaReport deltas = make_delta_report(coding, spec.mode);
    std::vector<GridPoint> pts = feasible_pairs(spec);
    // evaluate_grid_point never throws, so the parallel region is safe.
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(pts.size()); ++i) {
        GridPoint& g = pts[static_cast<std::size_t>(i)];
        g = evaluate_grid_point(channel, deltas, spec, g.mu_x, g.mu_y);
    }
    return pick_best(std::move(pts));
}

}  // namespace mdiqkd
