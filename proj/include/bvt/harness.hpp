#pragma once
/// @file harness.hpp
/// @brief Run configuration, check records and reports, the named suites,
/// and CSV / portable-pixmap output.

#include <string>
#include <vector>

#include "bvt/catalog.hpp"
#include "bvt/fv.hpp"
#include "bvt/traces.hpp"

namespace bvt {

// ============================================================================
// Configuration
// ============================================================================

struct RunConfig {
    std::string suite = "wellposed";
    Variant variant = Variant::Outward;
    int k_max = 6;
    int level = 6;
    double T = 1.0;
    double cfl = 0.4;
    double tol = 1e-3;  ///< residual tolerance relative to ‖φ‖_{C¹}
    std::string out_dir;  ///< empty: no files written
    bool write_csv = true;
    bool write_ppm = true;

    void validate() const;  ///< throws ConfigError
};

/// Applies one key=value setting (keys: suite, variant, kmax, level, T, cfl,
/// tol, out, csv, ppm). Throws ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key=value file ('#' starts a comment, blank lines ignored).
RunConfig load_config(const std::string& path, RunConfig base = {});

const std::vector<std::string>& suite_names();

// ============================================================================
// Reports
// ============================================================================

struct CheckRecord {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    Verdict verdict = Verdict::Fail;
    bool expect_witness = false;  ///< a WITNESS verdict is the expected outcome
    double runtime_s = 0.0;
    std::string detail;

    bool ok() const { return verdict == Verdict::Pass || (verdict == Verdict::Witness && expect_witness); }
};

struct Report {
    std::string suite;
    RunConfig config;
    std::vector<CheckRecord> checks;
    double runtime_s = 0.0;

    bool pass() const;
    std::string to_json() const;
    std::string to_text() const;
};

// ============================================================================
// Checks (one per acceptance property; each returns one or more records)
// ============================================================================

std::vector<CheckRecord> check_divergence_exactness(const RunConfig& cfg);
std::vector<CheckRecord> check_boundary_traces(const RunConfig& cfg);
std::vector<CheckRecord> check_outward_witness(const RunConfig& cfg);
std::vector<CheckRecord> check_inward_witness(const RunConfig& cfg);
std::vector<CheckRecord> check_corollary_traces(const RunConfig& cfg);
std::vector<CheckRecord> check_trace_renormalization(const RunConfig& cfg);
std::vector<CheckRecord> check_strong_traces(const RunConfig& cfg);
std::vector<CheckRecord> check_wellposed_fv(const RunConfig& cfg);
std::vector<CheckRecord> check_gronwall_witness(const RunConfig& cfg);
std::vector<CheckRecord> check_mixing(const RunConfig& cfg);
std::vector<CheckRecord> check_flow_map(const RunConfig& cfg);

/// Runs the named suite (wellposed, nonuniqueness_inward, nonuniqueness_outward,
/// corollary, traces, mixing). Writes CSVs, heatmaps and report.json into
/// cfg.out_dir when set. Throws ConfigError for an unknown suite.
Report run_suite(const RunConfig& cfg);

// ============================================================================
// Output
// ============================================================================

/// Columns t,y1,y2,value,source_tag,orientation.
void write_trace_csv(const TraceProfile& p, const std::string& path);
/// Columns t,r,y1,y2,u.
void write_snapshot_csv(const CellScalarField& u, const std::string& path);
/// Columns step,t,mass,l1,l2,boundary_flux.
void write_log_csv(const Trajectory& traj, const std::string& path);
void write_text(const std::string& text, const std::string& path);

/// Portable pixmap (P6) of a rows x cols value array, each value drawn as a
/// scale x scale block. Colour map: 0 white, positive values blend to blue
/// (full at vmax), negative values blend to black (full at vmin).
void emit_heatmap(const std::vector<double>& values, int rows, int cols, double vmin, double vmax,
                  const std::string& path, int scale = 4);
/// Lateral slice j of a cell field.
void emit_heatmap(const CellScalarField& u, int j, const std::string& path, int scale = 4);
/// Time cell `it` of a trace profile.
void emit_heatmap(const TraceProfile& p, int it, const std::string& path, int scale = 4);

/// n x n samples of a lateral function over [0, side)^2 (row = y1 index).
std::vector<double> lateral_samples(int n, double side, const std::function<double(double, double)>& fn);

}  // namespace bvt
