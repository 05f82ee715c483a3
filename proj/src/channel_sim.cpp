#include "mdiqkd/channel_sim.hpp"

#include <cmath>
#include <istream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mdiqkd {

void GroundTruthChannel::validate() const {
    const std::size_t n = static_cast<std::size_t>(k_max + 1) * static_cast<std::size_t>(k_max + 1);
    if (k_max < 0 || y_table.size() != n || e_table.size() != n)
        throw std::invalid_argument("GroundTruthChannel: table shape does not match k_max");
    for (double v : y_table)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("GroundTruthChannel: success probability outside [0,1]");
    for (double v : e_table)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("GroundTruthChannel: error probability outside [0,1]");
}

GroundTruthChannel build_channel(double eta_a, double eta_b, double dark, double misalign,
                                 int k_max) {
    if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
        throw std::invalid_argument("build_channel: transmittance outside [0,1]");
    if (!(dark >= 0.0 && dark < 1.0))
        throw std::invalid_argument("build_channel: dark-count probability outside [0,1)");
    if (!(misalign >= 0.0 && misalign <= 0.5))
        throw std::invalid_argument("build_channel: misalignment outside [0,0.5]");
    if (k_max < 2) throw std::invalid_argument("build_channel: k_max must be >= 2");

    GroundTruthChannel ch;
    ch.eta_a = eta_a;
    ch.eta_b = eta_b;
    ch.dark = dark;
    ch.misalign = misalign;
    ch.k_max = k_max;
    const std::size_t side = static_cast<std::size_t>(k_max) + 1;
    ch.y_table.resize(side * side);
    ch.e_table.resize(side * side);

    std::vector<double> det_a(side), det_b(side), sig_a(side), sig_b(side);
    for (int n = 0; n <= k_max; ++n) {
        const double miss_a = std::pow(1.0 - eta_a, n);
        const double miss_b = std::pow(1.0 - eta_b, n);
        det_a[static_cast<std::size_t>(n)] = 1.0 - (1.0 - dark) * miss_a;
        det_b[static_cast<std::size_t>(n)] = 1.0 - (1.0 - dark) * miss_b;
        sig_a[static_cast<std::size_t>(n)] = 1.0 - miss_a;  // photon-only detections
        sig_b[static_cast<std::size_t>(n)] = 1.0 - miss_b;
    }

    for (int n = 0; n <= k_max; ++n) {
        for (int m = 0; m <= k_max; ++m) {
            const double y = det_a[static_cast<std::size_t>(n)] * det_b[static_cast<std::size_t>(m)];
            ch.set_y(n, m, y);
            double e;
            if (n == 0 && m == 0) {
                e = 0.5;  // dark counts carry no bit information
            } else {
                const double sig =
                    sig_a[static_cast<std::size_t>(n)] * sig_b[static_cast<std::size_t>(m)];
                const double w_dark = y > 0.0 ? 1.0 - sig / y : 0.0;
                e = misalign + (0.5 - misalign) * w_dark;
            }
            ch.set_e(n, m, std::min(1.0, std::max(0.0, e)));
        }
    }
    ch.validate();
    return ch;
}

void apply_table_overrides_csv(GroundTruthChannel& channel, std::istream& is) {
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("n,", 0) == 0) continue;  // optional header
        std::istringstream row(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(row, f, ',')) fields.push_back(f);
        if (fields.size() != 4)
            throw std::invalid_argument("channel table CSV line " + std::to_string(line_no) +
                                        ": expected n,m,y,e");
        const int n = std::stoi(fields[0]);
        const int m = std::stoi(fields[1]);
        const double y = std::stod(fields[2]);
        const double e = std::stod(fields[3]);
        if (n < 0 || n > channel.k_max || m < 0 || m > channel.k_max)
            throw std::invalid_argument("channel table CSV line " + std::to_string(line_no) +
                                        ": (n,m) outside table");
        channel.set_y(n, m, y);
        channel.set_e(n, m, e);
    }
    channel.validate();
}

TwoPulseObservables synthesize_observables(const GroundTruthChannel& channel,
                                           const SourceTriple& alice, const SourceTriple& bob,
                                           Basis basis) {
    if (alice.k_max() > channel.k_max || bob.k_max() > channel.k_max)
        throw std::invalid_argument("synthesize_observables: source k_max exceeds channel k_max");

    TwoPulseObservables obs;
    obs.basis = basis;
    const std::array<const PhotonNumberSource*, 3> srcs_a{&alice.vacuum, &alice.decoy,
                                                          &alice.signal};
    const std::array<const PhotonNumberSource*, 3> srcs_b{&bob.vacuum, &bob.decoy, &bob.signal};

    for (int ia = 0; ia < 3; ++ia) {
        for (int ib = 0; ib < 3; ++ib) {
            const PhotonNumberSource& pa = *srcs_a[static_cast<std::size_t>(ia)];
            const PhotonNumberSource& pb = *srcs_b[static_cast<std::size_t>(ib)];
            double s = 0.0, werr = 0.0;
            for (int k = 0; k <= pa.k_max(); ++k) {
                const double wa = pa.p(k);
                if (wa == 0.0) continue;
                double row_s = 0.0, row_e = 0.0;
                for (int l = 0; l <= pb.k_max(); ++l) {
                    const double wb = pb.p(l);
                    if (wb == 0.0) continue;
                    const double y = channel.y(k, l);
                    row_s += wb * y;
                    row_e += wb * y * channel.e(k, l);
                }
                s += wa * row_s;
                werr += wa * row_e;
            }
            obs.set(static_cast<SourceId>(ia), static_cast<SourceId>(ib), s,
                    s > 0.0 ? werr / s : 0.0);
        }
    }
    return obs;
}

void SimRunConfig::validate() const {
    if (n_pairs < 1) throw std::invalid_argument("SimRunConfig: n_pairs must be >= 1");
    auto check = [](const auto& probs, const char* what) {
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument(std::string("SimRunConfig: ") + what +
                                            " probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument(std::string("SimRunConfig: ") + what +
                                        " probabilities must sum to 1");
    };
    check(probs_alpha, "source");
    check(probs_beta, "source");
    check(basis_probs, "basis");
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform in [0,1) from the engine's full 64-bit output.
double u01(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

constexpr std::uint64_t kShardSize = 1u << 16;

struct Tally {
    // Per basis and cell: pairs used, successes, errors.
    std::array<std::array<std::uint64_t, 9>, 2> used{};
    std::array<std::array<std::uint64_t, 9>, 2> succ{};
    std::array<std::array<std::uint64_t, 9>, 2> err{};

    void merge(const Tally& o) {
        for (int b = 0; b < 2; ++b) {
            for (int c = 0; c < 9; ++c) {
                used[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] +=
                    o.used[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
                succ[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] +=
                    o.succ[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
                err[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] +=
                    o.err[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
            }
        }
    }
};

struct SamplingTables {
    std::array<double, 3> cum_alpha{};
    std::array<double, 3> cum_beta{};
    double p_basis_z = 0.5;
    // Cumulative photon-number distributions per source; a draw beyond the
    // last entry means the truncated tail was hit, which never succeeds.
    std::array<std::vector<double>, 3> cum_a;
    std::array<std::vector<double>, 3> cum_b;
};

std::vector<double> cumulative(const PhotonNumberSource& s) {
    std::vector<double> cum(s.probs.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < s.probs.size(); ++k) {
        acc += s.probs[k];
        cum[k] = acc;
    }
    return cum;
}

int draw_index3(double u, const std::array<double, 3>& cum) {
    if (u < cum[0]) return 0;
    if (u < cum[1]) return 1;
    return 2;
}

// Returns -1 when the draw lands in the truncated tail; such a pulse can
// never register a success (matching the asymptotic synthesis, which gives
// the tail zero weight).
int draw_photons(double u, const std::vector<double>& cum) {
    for (std::size_t k = 0; k < cum.size(); ++k)
        if (u < cum[k]) return static_cast<int>(k);
    return -1;
}

SamplingTables make_tables(const SourceTriple& alice, const SourceTriple& bob,
                           const SimRunConfig& cfg) {
    SamplingTables t;
    t.cum_alpha[0] = cfg.probs_alpha[0];
    t.cum_alpha[1] = cfg.probs_alpha[0] + cfg.probs_alpha[1];
    t.cum_alpha[2] = 1.0;
    t.cum_beta[0] = cfg.probs_beta[0];
    t.cum_beta[1] = cfg.probs_beta[0] + cfg.probs_beta[1];
    t.cum_beta[2] = 1.0;
    t.p_basis_z = cfg.basis_probs[0];
    t.cum_a = {cumulative(alice.vacuum), cumulative(alice.decoy), cumulative(alice.signal)};
    t.cum_b = {cumulative(bob.vacuum), cumulative(bob.decoy), cumulative(bob.signal)};
    return t;
}

void run_shard(const GroundTruthChannel& channel, const SamplingTables& t, std::uint64_t seed,
               std::uint64_t n, Tally& tally) {
    std::mt19937_64 eng(seed);
    for (std::uint64_t i = 0; i < n; ++i) {
        const int ia = draw_index3(u01(eng), t.cum_alpha);
        const int ib = draw_index3(u01(eng), t.cum_beta);
        const int basis = u01(eng) < t.p_basis_z ? 0 : 1;
        const int k = draw_photons(u01(eng), t.cum_a[static_cast<std::size_t>(ia)]);
        const int l = draw_photons(u01(eng), t.cum_b[static_cast<std::size_t>(ib)]);
        const int cell = 3 * ia + ib;
        ++tally.used[static_cast<std::size_t>(basis)][static_cast<std::size_t>(cell)];
        const double y = (k >= 0 && l >= 0) ? channel.y(k, l) : 0.0;
        if (u01(eng) < y) {
            ++tally.succ[static_cast<std::size_t>(basis)][static_cast<std::size_t>(cell)];
            if (u01(eng) < channel.e(k, l))
                ++tally.err[static_cast<std::size_t>(basis)][static_cast<std::size_t>(cell)];
        }
    }
}

MonteCarloResult tally_to_result(const Tally& tally) {
    MonteCarloResult out;
    out.z.basis = Basis::Z;
    out.x.basis = Basis::X;
    out.z.N = std::array<double, 9>{};
    out.x.N = std::array<double, 9>{};
    for (int b = 0; b < 2; ++b) {
        TwoPulseObservables& obs = b == 0 ? out.z : out.x;
        for (int c = 0; c < 9; ++c) {
            const double used =
                static_cast<double>(tally.used[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)]);
            const double succ =
                static_cast<double>(tally.succ[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)]);
            const double err =
                static_cast<double>(tally.err[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)]);
            obs.S[static_cast<std::size_t>(c)] = used > 0.0 ? succ / used : 0.0;
            obs.E[static_cast<std::size_t>(c)] = succ > 0.0 ? err / succ : 0.0;
            (*obs.N)[static_cast<std::size_t>(c)] = used;
        }
    }
    return out;
}

}  // namespace

std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard_index) {
    return splitmix64(seed ^ ((shard_index + 1) * 0x9E3779B97F4A7C15ULL));
}

MonteCarloResult run_monte_carlo(const GroundTruthChannel& channel, const SourceTriple& alice,
                                 const SourceTriple& bob, const SimRunConfig& cfg) {
    cfg.validate();
    if (alice.k_max() > channel.k_max || bob.k_max() > channel.k_max)
        throw std::invalid_argument("run_monte_carlo: source k_max exceeds channel k_max");
    const SamplingTables tables = make_tables(alice, bob, cfg);
    const std::uint64_t n_shards = (cfg.n_pairs + kShardSize - 1) / kShardSize;
    Tally total;
    for (std::uint64_t s = 0; s < n_shards; ++s) {
        const std::uint64_t n =
            s + 1 == n_shards ? cfg.n_pairs - s * kShardSize : kShardSize;
        Tally shard;
        run_shard(channel, tables, shard_seed(cfg.seed, s), n, shard);
        total.merge(shard);
    }
    return tally_to_result(total);
}

MonteCarloResult run_monte_carlo_omp(const GroundTruthChannel& channel, const SourceTriple& alice,
                                     const SourceTriple& bob, const SimRunConfig& cfg) {
    cfg.validate();
    if (alice.k_max() > channel.k_max || bob.k_max() > channel.k_max)
        throw std::invalid_argument("run_monte_carlo_omp: source k_max exceeds channel k_max");
    const SamplingTables tables = make_tables(alice, bob, cfg);
    const std::uint64_t n_shards = (cfg.n_pairs + kShardSize - 1) / kShardSize;
    std::vector<Tally> shards(n_shards);
#pragma omp parallel for schedule(dynamic)
    for (long long s = 0; s < static_cast<long long>(n_shards); ++s) {
        const std::uint64_t u = static_cast<std::uint64_t>(s);
        const std::uint64_t n =
            u + 1 == n_shards ? cfg.n_pairs - u * kShardSize : kShardSize;
        run_shard(channel, tables, shard_seed(cfg.seed, u), n, shards[static_cast<std::size_t>(s)]);
    }
    // Integer tallies merge associatively; shard order is fixed regardless.
    Tally total;
    for (const Tally& t : shards) total.merge(t);
    return tally_to_result(total);
}

}  // namespace mdiqkd
