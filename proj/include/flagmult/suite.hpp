#pragma once

#include <array>
#include <string>
#include <vector>

#include "flagmult/analysis.hpp"
#include "flagmult/multiop.hpp"

namespace flagmult {

// Flat text configuration: `key = value` lines, optional `[section]` headers,
// dotted keys (`grid.n = 128`), `#` comments. Lists are comma separated and
// numbers may be written as fractions (`4/3`).
struct ExperimentConfig {
    unsigned seed = 1;

    int grid_n = 256;
    double L1 = 1.0, L2 = 1.0;

    double epsilon = 0.125, sharpness = 1.0;
    int gap = GAP_DESK;

    PlanKind plan = PlanKind::Separable;
    int rank_cap = 512;
    double plan_tol = 1e-10;

    std::string scan_symbol = "library";  // library | constant
    int scan_shift = 0;
    ExponentTuple plain = ExponentTuple::holder(4, 4, 4, 4.0 / 3.0);
    ExponentTuple mixed = ExponentTuple::mixed_tuple(4, 3, 6, 6, 3, 4.0 / 3.0);
    ExponentTuple holder = ExponentTuple::holder(3, 3, 3, 1);
    TestFamilySpec family = [] {
        TestFamilySpec f;
        f.translations = 2;
        return f;
    }();

    std::string weight = "none";  // none | power
    double weight_a1 = 0.5, weight_a2 = 0.5, weight_x1 = 0.3, weight_x2 = 0.7;

    std::vector<int> endpoint_resolutions{64, 128, 256, 512};
    int endpoint_shift = 1;
    double endpoint_a = 1.0;

    std::array<double, 2> alpha{1, 1}, beta{1, 1};
    int leibniz_gap = GAP_DESK;
    ExponentTuple leibniz_exponents = ExponentTuple::holder(3, 3, 3, 1);
    int leibniz_kmax = 20;

    std::string out_dir = "flagmult_out";
    double tolerance_scale = 1.0;

    GeneratorSet generators() const;
    OperatorPlan operator_plan() const;
};

// ConfigError (line, column) on syntax or unknown keys; HolderError /
// InvalidExponent when an exponent tuple is inconsistent.
ExperimentConfig parse_config(const std::string& text, const ExperimentConfig& base = {});
ExperimentConfig load_config(const std::string& path);

struct Metric {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string relation = "<=";  // value relation tolerance: "<=", "<", ">", ">="
    bool pass = false;
};

struct CheckResult {
    std::string name;
    std::vector<Metric> metrics;
    std::string note;
    bool pass = false;
    double runtime = 0.0;  // seconds; not part of the JSON reports
};

// named checks, one per acceptance property
std::vector<std::string> check_names();
// the subset run by `verify`
std::vector<std::string> verify_checks();
CheckResult run_check(const std::string& name, const ExperimentConfig& cfg);

// JSON documents (deterministic: fixed key order, no timings)
std::string verify_json(const ExperimentConfig& cfg, const std::vector<CheckResult>& results);
std::string format17(double v);

// scan runs from the configuration: plain, mixed and (if configured) weighted
struct ScanRun {
    std::string label;
    ExponentTuple ex;
    bool weighted = false;
    ScanReport report;
};
std::vector<ScanRun> run_scans(const ExperimentConfig& cfg);
std::string scan_csv(const std::vector<ScanRun>& runs);
std::string scan_json(const ExperimentConfig& cfg, const std::vector<ScanRun>& runs);

GrowthReport run_endpoint(const ExperimentConfig& cfg);
std::string endpoint_csv(const GrowthReport& r);
std::string endpoint_json(const ExperimentConfig& cfg, const GrowthReport& r);

LeibnizResult run_leibniz(const ExperimentConfig& cfg);
std::string leibniz_csv(const LeibnizResult& r);
std::string leibniz_json(const ExperimentConfig& cfg, const LeibnizResult& r);

struct ReportRow {
    std::string source, check, metric, status;
    double value = 0.0, tolerance = 0.0;
};
// rows from the JSON documents written by the other subcommands
std::vector<ReportRow> merge_reports(const std::vector<std::string>& json_texts,
                                     const std::vector<std::string>& sources);
std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_text(const std::vector<ReportRow>& rows);

}  // namespace flagmult
