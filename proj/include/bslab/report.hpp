#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bslab/certificate.hpp"
#include "bslab/hunt.hpp"

namespace bslab {

constexpr int report_schema_version = 1;
const char* tool_version();

// Everything needed to rerun a command. Echoed into the report.
struct RunConfig {
    std::string subcommand; // lab, s1d, e3d, h3, dirac
    std::string potential;  // family name or CSV path
    std::map<std::string, std::string> params; // raw key=value pairs
    double extent = 0.0;    // L or R; 0 picks the module default
    int grid_n = 0;         // 0 picks the module default
    Rect search;
    bool has_search = false;
    std::string zgrid;      // key=value list, empty for defaults
    std::uint64_t seed = 0;
    std::string out;        // empty or "-" writes JSON to stdout
    std::string format = "json";
    int trials = 1;
    int dim_max = 12;
    bool fixed_clock = false;
};

struct CheckOutcome {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

// Tabular data for plotting, written as its own CSV in a bundle.
struct Curve {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

enum class RunStatus { pass, check_failed, usage_error, numerical_failure };
std::string to_string(RunStatus s);
int exit_code(RunStatus s);

struct Report {
    int schema_version = report_schema_version;
    std::string version;
    RunConfig config;
    std::vector<EnclosureCertificate> certificates;
    std::vector<SpectralReport> spectra;
    std::vector<CheckOutcome> checks;
    std::vector<Curve> curves;
    std::vector<std::pair<std::string, double>> metrics; // named scalars, in insertion order
    RunStatus status = RunStatus::pass;
    std::string message;
    std::string started; // UTC, fixed in fixed-clock mode
    double elapsed_s = 0.0;

    // status from the checks: any failure is check_failed
    void settle();
};

Report run_lab(int trials, int dim_max, std::uint64_t seed, const RunConfig& cfg = {});
Report run_model(const RunConfig& cfg);
// Dispatch on cfg.subcommand. Library errors end up in the status, not thrown.
Report run_command(const RunConfig& cfg);

nlohmann::ordered_json to_json(const Report& r);
Report report_from_json(const nlohmann::ordered_json& j);

// json: one document at cfg.out (stdout when empty or "-").
// csv-bundle: directory cfg.out with report.json, eigenvalues.csv,
// certificates.csv, checks.csv and one CSV per curve.
// Returns the files written; UsageError when the path is not writable.
std::vector<std::string> emit_report(const Report& r, const std::string& out, const std::string& format);

// "a+bi", "bi", "a" and plain decimals
cplx parse_complex(const std::string& s);
std::map<std::string, std::string> parse_params(const std::string& s);
Rect parse_rect(const std::string& s);

// BSLAB_LOG_LEVEL: error, warn, info (default), debug
void init_logging();

} // namespace bslab
