#include "mdiqkd/photon_source.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "mdiqkd/errors.hpp"

namespace mdiqkd {

namespace {

double clamped_tail(double sum) {
    // Floating-point sums can land a hair above 1; the tail is never negative.
    return sum >= 1.0 ? 0.0 : 1.0 - sum;
}

void check_tail(const std::string& label, double tail, double tail_tol) {
    if (tail > tail_tol) {
        std::ostringstream os;
        os << "source '" << label << "': truncation tail " << tail << " exceeds tolerance "
           << tail_tol << "; raise k_max";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

void PhotonNumberSource::validate(double tail_tol) const {
    if (probs.size() < 1)
        throw std::invalid_argument("source '" + label + "': empty probability vector");
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (!(probs[k] >= 0.0 && probs[k] <= 1.0))
            throw std::invalid_argument("source '" + label + "': p_" + std::to_string(k) +
                                        " outside [0,1]");
    }
    if (!(truncation_tail >= 0.0))
        throw std::invalid_argument("source '" + label + "': negative truncation tail");
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0) + truncation_tail;
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("source '" + label + "': probabilities + tail differ from 1 by " +
                                    std::to_string(total - 1.0));
    check_tail(label, truncation_tail, tail_tol);
}

PhotonNumberSource vacuum_source(int k_max) {
    if (k_max < 0) throw std::invalid_argument("vacuum_source: k_max < 0");
    PhotonNumberSource s;
    s.label = "vacuum";
    s.probs.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    s.probs[0] = 1.0;
    s.mean_photon = 0.0;
    s.truncation_tail = 0.0;
    return s;
}

PhotonNumberSource coherent_source(double mu, int k_max, double tail_tol) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("coherent_source: mu must be finite and >= 0");
    if (k_max < 2) throw std::invalid_argument("coherent_source: k_max must be >= 2");
    PhotonNumberSource s;
    s.label = "coherent(mu=" + std::to_string(mu) + ")";
    s.probs.resize(static_cast<std::size_t>(k_max) + 1);
    s.probs[0] = std::exp(-mu);
    for (int k = 1; k <= k_max; ++k)
        s.probs[static_cast<std::size_t>(k)] = s.probs[static_cast<std::size_t>(k) - 1] * mu / k;
    s.mean_photon = mu;
    s.truncation_tail = clamped_tail(std::accumulate(s.probs.begin(), s.probs.end(), 0.0));
    check_tail(s.label, s.truncation_tail, tail_tol);
    return s;
}

PhotonNumberSource heralded_pdc_source(double mu, int k_max, double tail_tol) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("heralded_pdc_source: mu must be finite and >= 0");
    if (k_max < 2) throw std::invalid_argument("heralded_pdc_source: k_max must be >= 2");
    PhotonNumberSource s;
    s.label = "thermal(mu=" + std::to_string(mu) + ")";
    s.probs.resize(static_cast<std::size_t>(k_max) + 1);
    const double ratio = mu / (1.0 + mu);
    s.probs[0] = 1.0 / (1.0 + mu);
    for (int k = 1; k <= k_max; ++k)
        s.probs[static_cast<std::size_t>(k)] = s.probs[static_cast<std::size_t>(k) - 1] * ratio;
    s.mean_photon = mu;
    s.truncation_tail = clamped_tail(std::accumulate(s.probs.begin(), s.probs.end(), 0.0));
    check_tail(s.label, s.truncation_tail, tail_tol);
    return s;
}

PhotonNumberSource custom_source(std::string label, std::vector<double> probs, double tail_tol) {
    PhotonNumberSource s;
    s.label = std::move(label);
    s.probs = std::move(probs);
    double mean = 0.0;
    for (std::size_t k = 0; k < s.probs.size(); ++k) mean += static_cast<double>(k) * s.probs[k];
    s.mean_photon = mean;
    s.truncation_tail = clamped_tail(std::accumulate(s.probs.begin(), s.probs.end(), 0.0));
    s.validate(tail_tol);
    return s;
}

std::string DecoyConditionReport::message() const {
    if (ok) return "decoy condition holds";
    std::ostringstream os;
    if (first_violation_k == 1) {
        os << "decoy condition violated: ratio at k=2 falls below ratio at k=1 (" << lhs << " < "
           << rhs << ")";
    } else {
        os << "decoy condition violated at k=" << first_violation_k
           << ": ratio falls below ratio at k=2 (" << lhs << " < " << rhs << ")";
    }
    return os.str();
}

DecoyConditionReport check_decoy_condition(const PhotonNumberSource& x,
                                           const PhotonNumberSource& y) {
    if (x.k_max() != y.k_max())
        throw std::invalid_argument("check_decoy_condition: sources must share k_max");
    if (x.k_max() < 2)
        throw std::invalid_argument("check_decoy_condition: k_max must be >= 2");
    for (int k = 1; k <= 2; ++k) {
        if (x.p(k) == 0.0 && y.p(k) > 0.0)
            throw DecoyConditionViolation(
                "decoy condition undefined: weak source has zero probability at k=" +
                std::to_string(k) + " while strong source does not");
    }

    constexpr double rel_eps = 1e-12;
    // a >= b up to relative slack, on cross products that are never negative.
    auto ge = [](double a, double b) {
        return a >= b - rel_eps * std::max(std::abs(a), std::abs(b));
    };

    DecoyConditionReport rep;
    // ratio(2) >= ratio(1):  y2 * x1 >= y1 * x2
    {
        const double lhs = y.p(2) * x.p(1);
        const double rhs = y.p(1) * x.p(2);
        if (!ge(lhs, rhs)) {
            rep.ok = false;
            rep.first_violation_k = 1;
            rep.lhs = lhs;
            rep.rhs = rhs;
            return rep;
        }
    }
    // ratio(k) >= ratio(2) for k >= 3 (k = 2 is trivially equal):
    // y_k * x2 >= y2 * x_k
    for (int k = 3; k <= x.k_max(); ++k) {
        const double lhs = y.p(k) * x.p(2);
        const double rhs = y.p(2) * x.p(k);
        if (!ge(lhs, rhs)) {
            rep.ok = false;
            rep.first_violation_k = k;
            rep.lhs = lhs;
            rep.rhs = rhs;
            return rep;
        }
    }
    return rep;
}

void SourceTriple::validate() const {
    vacuum.validate();
    decoy.validate();
    signal.validate();
    if (vacuum.k_max() != decoy.k_max() || decoy.k_max() != signal.k_max())
        throw std::invalid_argument("SourceTriple: all sources must share k_max");
    if (std::abs(vacuum.p(0) - 1.0) > 1e-12)
        throw std::invalid_argument("SourceTriple: vacuum source must have p_0 = 1");
    if (!(decoy.mean_photon < signal.mean_photon))
        throw std::invalid_argument("SourceTriple: decoy mean photon number must be below signal");
    const DecoyConditionReport rep = check_decoy_condition(decoy, signal);
    if (!rep.ok) throw DecoyConditionViolation(rep.message());
}

SourceTriple make_source_triple(PhotonNumberSource decoy, PhotonNumberSource signal) {
    SourceTriple t;
    t.vacuum = vacuum_source(decoy.k_max());
    t.decoy = std::move(decoy);
    t.signal = std::move(signal);
    t.validate();
    return t;
}

}  // namespace mdiqkd
