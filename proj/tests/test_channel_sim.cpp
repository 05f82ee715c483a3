#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mdiqkd/channel_sim.hpp"

using namespace mdiqkd;

TEST_CASE("build_channel: no dark counts and no misalignment means no errors") {
    const GroundTruthChannel ch = build_channel(0.2, 0.3, 0.0, 0.0, 6);
    for (int n = 1; n <= 6; ++n)
        for (int m = 1; m <= 6; ++m) CHECK(ch.e(n, m) == 0.0);
    CHECK(ch.e(0, 0) == 0.5);
    CHECK(ch.y(0, 3) == 0.0);  // a vacuum arm cannot trigger without dark counts
}

TEST_CASE("build_channel: unit transmittance saturates the yields") {
    const GroundTruthChannel ch = build_channel(1.0, 1.0, 0.0, 0.0, 5);
    for (int n = 1; n <= 5; ++n)
        for (int m = 1; m <= 5; ++m) CHECK(ch.y(n, m) == 1.0);
}

TEST_CASE("build_channel: coincidence anchor at eta = 0.1") {
    const GroundTruthChannel ch = build_channel(0.1, 0.1, 0.0, 0.0, 4);
    CHECK(ch.y(1, 1) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(ch.y(2, 1) == doctest::Approx(0.19 * 0.1).epsilon(1e-14));
}

TEST_CASE("build_channel: vacuum pairs keep the dark-count floor") {
    const double dark = 1e-4;
    const GroundTruthChannel ch = build_channel(0.1, 0.1, dark, 0.01, 4);
    CHECK(ch.y(0, 0) == doctest::Approx(dark * dark).epsilon(1e-12));
    // one-sided vacuum successes are dark-driven, so they err at one half
    CHECK(ch.e(0, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ch.e(2, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("build_channel: parameter validation") {
    CHECK_THROWS_AS(build_channel(1.2, 0.1, 0.0, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_channel(0.1, 0.1, 0.0, 0.6, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_channel(0.1, 0.1, 0.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("table overrides: entries replaced, ranges enforced") {
    GroundTruthChannel ch = build_channel(0.1, 0.1, 0.0, 0.0, 4);
    std::istringstream csv("n,m,y,e\n1,1,0.75,0.25\n# comment\n0,0,0.5,0.5\n");
    apply_table_overrides_csv(ch, csv);
    CHECK(ch.y(1, 1) == 0.75);
    CHECK(ch.e(1, 1) == 0.25);
    CHECK(ch.y(0, 0) == 0.5);

    std::istringstream bad("9,9,0.5,0.5\n");
    CHECK_THROWS_AS(apply_table_overrides_csv(ch, bad), std::invalid_argument);
    std::istringstream out_of_range("1,1,1.5,0.0\n");
    CHECK_THROWS_AS(apply_table_overrides_csv(ch, out_of_range), std::invalid_argument);
}

TEST_CASE("synthesize: vacuum pair cell equals the oracle entry") {
    const GroundTruthChannel ch = build_channel(0.2, 0.1, 1e-4, 0.02, 12);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 12), coherent_source(0.4, 12));
    const TwoPulseObservables obs = synthesize_observables(ch, alice, alice, Basis::Z);
    CHECK(obs.yield(SourceId::o, SourceId::o) == ch.y(0, 0));
    CHECK(obs.error(SourceId::o, SourceId::o) == ch.e(0, 0));
}

TEST_CASE("synthesize: decoy-pair yield matches an independent double sum") {
    const GroundTruthChannel ch = build_channel(0.1, 0.1, 1e-5, 0.01, 12);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 12), coherent_source(0.4, 12));
    const TwoPulseObservables obs = synthesize_observables(ch, alice, alice, Basis::Z);

    // Brute force with the loop nest transposed.
    const PhotonNumberSource& pa = alice.decoy;
    const PhotonNumberSource& pb = alice.signal;
    double s = 0.0, werr = 0.0;
    for (int l = 12; l >= 0; --l) {
        for (int k = 12; k >= 0; --k) {
            s += pa.p(k) * pb.p(l) * ch.y(k, l);
            werr += pa.p(k) * pb.p(l) * ch.y(k, l) * ch.e(k, l);
        }
    }
    CHECK(obs.yield(SourceId::x, SourceId::y) == doctest::Approx(s).epsilon(1e-12));
    CHECK(obs.error(SourceId::x, SourceId::y) == doctest::Approx(werr / s).epsilon(1e-12));
}

TEST_CASE("synthesize: yields respond monotonically to oracle entries") {
    GroundTruthChannel ch = build_channel(0.1, 0.1, 0.0, 0.0, 8);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 8), coherent_source(0.4, 8));
    const double before = synthesize_observables(ch, alice, alice, Basis::Z).yield(SourceId::x, SourceId::x);
    ch.set_y(2, 1, std::min(1.0, ch.y(2, 1) + 0.3));
    const double after = synthesize_observables(ch, alice, alice, Basis::Z).yield(SourceId::x, SourceId::x);
    CHECK(after > before);
}

TEST_CASE("synthesize: law of total probability over source choices") {
    const int k_max = 12;
    const GroundTruthChannel ch = build_channel(0.17, 0.08, 1e-4, 0.03, k_max);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, k_max), coherent_source(0.4, k_max));
    const SourceTriple bob = make_source_triple(coherent_source(0.05, k_max), coherent_source(0.3, k_max));
    const TwoPulseObservables obs = synthesize_observables(ch, alice, bob, Basis::Z);

    const std::array<double, 3> pa{0.5, 0.3, 0.2}, pb{0.1, 0.6, 0.3};
    double mixture_of_yields = 0.0;
    for (int ia = 0; ia < 3; ++ia)
        for (int ib = 0; ib < 3; ++ib)
            mixture_of_yields += pa[static_cast<std::size_t>(ia)] * pb[static_cast<std::size_t>(ib)] *
                                 obs.S[static_cast<std::size_t>(3 * ia + ib)];

    // Yield of the photon-number mixture of the three sources, directly.
    auto mixed = [&](const SourceTriple& t, const std::array<double, 3>& p) {
        std::vector<double> probs(static_cast<std::size_t>(k_max) + 1, 0.0);
        for (int k = 0; k <= k_max; ++k)
            probs[static_cast<std::size_t>(k)] =
                p[0] * t.vacuum.p(k) + p[1] * t.decoy.p(k) + p[2] * t.signal.p(k);
        return probs;
    };
    const std::vector<double> ma = mixed(alice, pa), mb = mixed(bob, pb);
    double direct = 0.0;
    for (int k = 0; k <= k_max; ++k)
        for (int l = 0; l <= k_max; ++l)
            direct += ma[static_cast<std::size_t>(k)] * mb[static_cast<std::size_t>(l)] * ch.y(k, l);

    CHECK(mixture_of_yields == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("synthesize: signal source's vacuum sub-column reproduces the o row") {
    const int k_max = 12;
    const GroundTruthChannel ch = build_channel(0.2, 0.15, 1e-5, 0.01, k_max);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, k_max), coherent_source(0.4, k_max));
    const TwoPulseObservables obs = synthesize_observables(ch, alice, alice, Basis::Z);

    // Sub-source (vacuum, signal) of the signal-signal pair, from the tables.
    double sub = 0.0;
    for (int l = 0; l <= k_max; ++l) sub += alice.signal.p(l) * ch.y(0, l);
    CHECK(obs.yield(SourceId::o, SourceId::y) == doctest::Approx(sub).epsilon(1e-13));
}

TEST_CASE("synthesize: identical tables for both bases") {
    const GroundTruthChannel ch = build_channel(0.1, 0.1, 1e-5, 0.02, 12);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 12), coherent_source(0.4, 12));
    const TwoPulseObservables z = synthesize_observables(ch, alice, alice, Basis::Z);
    const TwoPulseObservables x = synthesize_observables(ch, alice, alice, Basis::X);
    CHECK(z.S == x.S);
    CHECK(z.E == x.E);
    CHECK(z.basis == Basis::Z);
    CHECK(x.basis == Basis::X);
}

TEST_CASE("monte carlo: certain success means every used cell saturates") {
    GroundTruthChannel ch = build_channel(0.5, 0.5, 0.0, 0.0, 6);
    for (int n = 0; n <= 6; ++n)
        for (int m = 0; m <= 6; ++m) ch.set_y(n, m, 1.0);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 6), coherent_source(0.4, 6));
    SimRunConfig cfg;
    cfg.n_pairs = 20000;
    cfg.seed = 99;
    const MonteCarloResult res = run_monte_carlo(ch, alice, alice, cfg);
    for (int c = 0; c < 9; ++c) {
        CHECK((*res.z.N)[static_cast<std::size_t>(c)] > 0.0);
        CHECK(res.z.S[static_cast<std::size_t>(c)] == 1.0);
        CHECK(res.x.S[static_cast<std::size_t>(c)] == 1.0);
    }
}

TEST_CASE("monte carlo: deterministic given the seed") {
    const GroundTruthChannel ch = build_channel(0.1, 0.1, 1e-5, 0.02, 12);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 12), coherent_source(0.4, 12));
    SimRunConfig cfg;
    cfg.n_pairs = 100000;  // not a multiple of the shard size
    cfg.seed = 123456789;
    const MonteCarloResult a = run_monte_carlo(ch, alice, alice, cfg);
    const MonteCarloResult b = run_monte_carlo(ch, alice, alice, cfg);
    CHECK(a.z.S == b.z.S);
    CHECK(a.z.E == b.z.E);
    CHECK(*a.z.N == *b.z.N);
    CHECK(a.x.S == b.x.S);

    cfg.seed = 4;
    const MonteCarloResult c = run_monte_carlo(ch, alice, alice, cfg);
    CHECK(a.z.S != c.z.S);
}

TEST_CASE("monte carlo: omp twin tallies bit-identically") {
    const GroundTruthChannel ch = build_channel(0.1, 0.1, 1e-5, 0.02, 12);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 12), coherent_source(0.4, 12));
    SimRunConfig cfg;
    cfg.n_pairs = 300000;
    cfg.seed = 77;
    const MonteCarloResult a = run_monte_carlo(ch, alice, alice, cfg);
    const MonteCarloResult b = run_monte_carlo_omp(ch, alice, alice, cfg);
    CHECK(a.z.S == b.z.S);
    CHECK(a.z.E == b.z.E);
    CHECK(*a.z.N == *b.z.N);
    CHECK(a.x.S == b.x.S);
    CHECK(a.x.E == b.x.E);
    CHECK(*a.x.N == *b.x.N);
}

TEST_CASE("monte carlo: each cell lands within binomial error bars") {
    // dark = 0 keeps every vacuum-involving cell exactly zero; the remaining
    // cells have hundreds of expected counts, where the 6-sigma band is honest.
    const int k_max = 12;
    const GroundTruthChannel ch = build_channel(0.1, 0.1, 0.0, 0.02, k_max);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, k_max), coherent_source(0.4, k_max));
    const TwoPulseObservables asym = synthesize_observables(ch, alice, alice, Basis::Z);
    SimRunConfig cfg;
    cfg.n_pairs = 1000000;
    cfg.seed = 2025;
    const MonteCarloResult res = run_monte_carlo_omp(ch, alice, alice, cfg);
    for (const TwoPulseObservables* obs : {&res.z, &res.x}) {
        for (int c = 0; c < 9; ++c) {
            const double n = (*obs->N)[static_cast<std::size_t>(c)];
            REQUIRE(n > 0.0);
            const double s_true = asym.S[static_cast<std::size_t>(c)];
            const double se = std::sqrt(std::max(s_true * (1.0 - s_true), 1e-12) / n);
            CHECK(std::abs(obs->S[static_cast<std::size_t>(c)] - s_true) <= 6.0 * se);
        }
    }
}

TEST_CASE("monte carlo: relative deviation shrinks with sample size") {
    const int k_max = 12;
    const GroundTruthChannel ch = build_channel(0.1, 0.1, 1e-5, 0.02, k_max);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, k_max), coherent_source(0.4, k_max));
    const TwoPulseObservables asym = synthesize_observables(ch, alice, alice, Basis::Z);

    auto rms_over_seeds = [&](std::uint64_t n_pairs) {
        double acc = 0.0;
        int cells = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            SimRunConfig cfg;
            cfg.n_pairs = n_pairs;
            cfg.seed = seed;
            const MonteCarloResult res = run_monte_carlo_omp(ch, alice, alice, cfg);
            for (int c = 0; c < 9; ++c) {
                const double s_true = asym.S[static_cast<std::size_t>(c)];
                if (s_true < 1e-6) continue;  // dark-dominated cells are all noise
                const double rel = (res.z.S[static_cast<std::size_t>(c)] - s_true) / s_true;
                acc += rel * rel;
                ++cells;
            }
        }
        return std::sqrt(acc / cells);
    };

    const double coarse = rms_over_seeds(100000);
    const double fine = rms_over_seeds(4000000);
    CHECK(fine < coarse / 3.0);  // expect ~ 1/sqrt(40)
}

TEST_CASE("sim config validation") {
    SimRunConfig cfg;
    cfg.n_pairs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_pairs = 10;
    cfg.probs_alpha = {0.5, 0.4, 0.2};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("shard seeds differ and are stable") {
    CHECK(shard_seed(1, 0) != shard_seed(1, 1));
    CHECK(shard_seed(1, 0) != shard_seed(2, 0));
    CHECK(shard_seed(42, 7) == shard_seed(42, 7));
}
