// Wall-clock comparison of the serial reference kernels against their OpenMP
// twins. The twins must tally bit-identically, so this is purely a speed
// check; correctness lives in the test suites.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mdiqkd/channel_sim.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/key_rate.hpp"

using namespace mdiqkd;

namespace {

template <typename F>
double time_ms(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double omp_ms) {
    std::printf("%-24s serial %9.1f ms   omp %9.1f ms   speedup %.2fx\n", name, serial_ms, omp_ms,
                serial_ms / omp_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both columns run serially\n");
#endif

    const GroundTruthChannel channel = build_channel(0.1, 0.1, 1e-6, 0.01, 40);
    const SourceTriple alice = make_source_triple(coherent_source(0.1, 40), coherent_source(0.4, 40));
    const SourceTriple bob = alice;

    {
        SimRunConfig cfg;
        cfg.n_pairs = 20'000'000;
        cfg.seed = 7;
        MonteCarloResult a, b;
        const double ts = time_ms([&] { a = run_monte_carlo(channel, alice, bob, cfg); });
        const double tp = time_ms([&] { b = run_monte_carlo_omp(channel, alice, bob, cfg); });
        if (a.z.S != b.z.S || a.x.S != b.x.S) {
            std::printf("monte carlo tallies diverged between serial and omp\n");
            return 1;
        }
        report("run_monte_carlo", ts, tp);
    }

    {
        const TwoPulseObservables obs = synthesize_observables(channel, alice, bob, Basis::Z);
        const FluctuationSpec fluct = FluctuationSpec::uniform(0.01);
        WorstCaseBound a, b;
        const double ts = time_ms([&] {
            for (int i = 0; i < 200; ++i) a = worst_case_bound(obs, alice, bob, fluct);
        });
        const double tp = time_ms([&] {
            for (int i = 0; i < 200; ++i) b = worst_case_bound_omp(obs, alice, bob, fluct);
        });
        if (a.bound.value != b.bound.value || a.corner_index != b.corner_index) {
            std::printf("worst-case corners diverged between serial and omp\n");
            return 1;
        }
        report("worst_case_bound x200", ts, tp);
    }

    {
        OptimizeSpec spec;
        for (int i = 1; i <= 20; ++i) spec.grid.mu_x.push_back(0.01 * i);
        for (int i = 0; i < 20; ++i) spec.grid.mu_y.push_back(0.10 + 0.035 * i);
        spec.k_max = 40;
        CodingErrorModel coding;
        coding.theta_az = coding.theta_ax = coding.theta_bz = coding.theta_bx = 0.01;
        OptimizeResult a, b;
        const double ts = time_ms([&] { a = optimize_intensities(channel, coding, spec); });
        const double tp = time_ms([&] { b = optimize_intensities_omp(channel, coding, spec); });
        if (a.best.mu_x != b.best.mu_x || a.best.mu_y != b.best.mu_y ||
            a.best.report.rate != b.best.report.rate) {
            std::printf("optimizer winners diverged between serial and omp\n");
            return 1;
        }
        report("optimize 20x20", ts, tp);
    }

    return 0;
}
