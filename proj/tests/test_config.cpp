#include <doctest.h>

#include <sstream>

#include "mdiqkd/config.hpp"
#include "mdiqkd/errors.hpp"
#include "mdiqkd/observables.hpp"

using namespace mdiqkd;

namespace {

const char* kMinimal = R"(
[alice.x]
type = coherent
mu = 0.1
[alice.y]
type = coherent
mu = 0.4
[channel]
eta_a = 0.1
eta_b = 0.1
k_max = 20
)";

}  // namespace

TEST_CASE("config: minimal text and defaults") {
    const RunConfig cfg = RunConfig::from_text(kMinimal);
    CHECK(cfg.alice_x.mu == 0.1);
    CHECK(cfg.bob_x.mu == 0.1);  // mirrored
    CHECK(cfg.f_ec == 1.16);
    CHECK(cfg.mode == "asymptotic");
    CHECK(cfg.k_max == 20);
    CHECK_FALSE(cfg.has_fluctuation);
    CHECK_NOTHROW(cfg.alice_sources().validate());
}

TEST_CASE("config: effective text round-trips exactly") {
    const RunConfig cfg = RunConfig::from_text(kMinimal);
    const std::string echo = cfg.effective_text();
    const RunConfig again = RunConfig::from_text(echo);
    CHECK(again.effective_text() == echo);
}

TEST_CASE("config: richer round-trip with every section") {
    const std::string text = std::string(kMinimal) + R"(
[bob.x]
type = thermal
mu = 0.08
[bob.y]
type = thermal
mu = 0.31
[coding]
theta_az = 0.01
theta_ax = 0.012
g_x = 0.001
delta_x_max = 0.05
[fluctuation]
rel = 0.01
[run]
mode = montecarlo
seed = 77
n_pairs = 12345
phase_randomized = true
p_alice = 0.5,0.25,0.25
[scan]
distance_km = 0:50:100
[optimize]
mu_x = 0.05,0.1
mu_y = 0.3,0.4
)";
    const RunConfig cfg = RunConfig::from_text(text);
    CHECK(cfg.bob_x.type == "thermal");
    CHECK(cfg.scan_distance_km.size() == 3);
    CHECK(cfg.seed == 77);
    CHECK(cfg.phase_randomized);
    CHECK(cfg.delta_mode() == DeltaMode::phase_randomized);
    const std::string echo = cfg.effective_text();
    CHECK(RunConfig::from_text(echo).effective_text() == echo);
}

TEST_CASE("config: errors carry key and line diagnostics") {
    try {
        RunConfig::from_text("[alice.x]\nmu = pony\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("alice.x.mu") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }

    CHECK_THROWS_AS(RunConfig::from_text("[alice.x]\nmu = 0.1\nmu = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("[alice.x]\nnot_a_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("stray = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("[run]\nmode = sideways\n"), ConfigError);
}

TEST_CASE("config: custom sources") {
    const char* text = R"(
[alice.x]
type = custom
probs = 0.905,0.09,0.005
[alice.y]
type = coherent
mu = 0.4
[channel]
k_max = 20
)";
    const RunConfig cfg = RunConfig::from_text(text);
    CHECK(cfg.alice_x.type == "custom");
    const SourceTriple t = cfg.alice_sources();
    CHECK(t.decoy.p(0) == 0.905);
    CHECK(t.decoy.p(5) == 0.0);  // padded to k_max

    CHECK_THROWS_AS(RunConfig::from_text("[alice.x]\ntype = custom\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("[alice.x]\ntype = coherent\nprobs = 0.5,0.5\n"),
                    ConfigError);
}

TEST_CASE("config: decoy-condition violations keep their type") {
    const char* swapped = R"(
[alice.x]
type = coherent
mu = 0.4
[alice.y]
type = coherent
mu = 0.1
[channel]
k_max = 20
)";
    CHECK_THROWS_AS(RunConfig::from_text(swapped), std::invalid_argument);  // mean ordering
}

TEST_CASE("config: probability vectors must normalize") {
    const std::string text = std::string(kMinimal) + "[run]\np_alice = 0.5,0.4,0.2\n";
    CHECK_THROWS_AS(RunConfig::from_text(text), ConfigError);
}

TEST_CASE("config: fluctuation section needs some width source") {
    const std::string text = std::string(kMinimal) + "[fluctuation]\nn_std = 5\n";
    CHECK_THROWS_AS(RunConfig::from_text(text), ConfigError);

    const std::string ok = std::string(kMinimal) + "[fluctuation]\nrel_cells = 0,0,0,0,0.01,0,0,0,0\n";
    const RunConfig cfg = RunConfig::from_text(ok);
    CHECK(cfg.has_fluctuation);
    CHECK(cfg.fluct_cells[4] == 0.01);
}

TEST_CASE("config: grid ranges expand inclusively") {
    const std::string text = std::string(kMinimal) + "[optimize]\nmu_x = 0.1:0.1:0.3\nmu_y = 0.5\n";
    const RunConfig cfg = RunConfig::from_text(text);
    REQUIRE(cfg.opt_mu_x.size() == 3);
    CHECK(cfg.opt_mu_x[2] == doctest::Approx(0.3));
    CHECK(cfg.opt_mu_y == std::vector<double>{0.5});
}

TEST_CASE("config: scan accepts one grid kind at a time") {
    const std::string text =
        std::string(kMinimal) + "[scan]\ndistance_km = 0:10:50\neta = 0.1,0.2\n";
    CHECK_THROWS_AS(RunConfig::from_text(text), ConfigError);
}

TEST_CASE("config: missing file") {
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/path.ini"), ConfigError);
}

TEST_CASE("csv comment block extraction feeds the parser") {
    const RunConfig cfg = RunConfig::from_text(kMinimal);
    std::ostringstream csv;
    write_observables_csv(csv, {TwoPulseObservables{}}, cfg.effective_text());
    std::istringstream in(csv.str());
    const std::string block = read_csv_comment_block(in);
    const RunConfig again = RunConfig::from_text(block);
    CHECK(again.effective_text() == cfg.effective_text());
}
