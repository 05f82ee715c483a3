#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mdiqkd/config.hpp"
#include "mdiqkd/decoy_bounds.hpp"
#include "mdiqkd/key_rate.hpp"
#include "mdiqkd/observables.hpp"

namespace mdiqkd {

/// simulate: observables for both bases, asymptotic or Monte Carlo per the
/// config mode. The echo is the effective-parameter text embedded as the CSV
/// comment header.
struct SimulateResult {
    std::vector<TwoPulseObservables> tables;  // Z then X
    std::string echo;
};
SimulateResult run_simulate(const RunConfig& cfg);

/// keyrate: the full bound-and-rate pipeline over ingested observables.
struct KeyrateOutcome {
    S11Bound s11_z;
    bool worst_case_used = false;
    int worst_corner_index = 0;
    double s11_x = 0.0;
    double e11_x = 0.0;
    DeltaReport deltas;
    KeyRateReport report;
};
KeyrateOutcome run_keyrate_pipeline(const RunConfig& cfg,
                                    const std::vector<TwoPulseObservables>& tables);

/// scan: keyrate pipeline over a transmittance grid (directly, or derived
/// from fiber length via eta = 10^(-db_per_km * L / 10) per arm). Rows that
/// fail keep their error note; the scan continues.
struct ScanRow {
    double x = 0.0;    // grid coordinate (km or transmittance)
    double eta = 0.0;  // per-arm transmittance actually used
    KeyrateOutcome outcome;
    std::string error;
};
struct ScanResult {
    std::string x_kind;  // "distance_km" or "eta"
    std::vector<ScanRow> rows;
};
ScanResult run_scan(const RunConfig& cfg);

OptimizeResult run_optimize(const RunConfig& cfg);

// CSV emission. Every writer uses 17-significant-digit floats and fixed row
// order, so identical inputs give identical bytes.
void write_keyrate_csv_header(std::ostream& os);
void write_keyrate_csv_row(std::ostream& os, const RunConfig& cfg, const KeyrateOutcome& out);
std::string keyrate_human_report(const RunConfig& cfg, const KeyrateOutcome& out);
void write_scan_csv(std::ostream& os, const ScanResult& scan, const std::string& echo);
void write_optimize_csv(std::ostream& os, const OptimizeResult& result, const std::string& echo);

}  // namespace mdiqkd
