/**
 * Named experiments behind the command-line tool: parameter schemas with
 * defaults, config-file/flag resolution, and deterministic runners that emit
 * report.json, timings.json, and CSV artifacts.
 *
 * Exit-code contract: 0 when every named check passes, 2 when any check
 * fails (a report is still written), 1 for usage/config errors.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "intervene/report.hpp"

namespace intervene::cli {

/// Bad invocation or malformed configuration (maps to exit code 1).
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fully resolved run configuration (defaults <- config file <- flags).
struct ExperimentConfig {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> parameters;  // schema order
    std::uint64_t seed = 1;
    std::string output_dir;
};

struct ExperimentDef {
    std::string name;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> defaults;  // key -> default value
    void (*run)(const ExperimentConfig&, report::ReportBuilder&);
};

const std::vector<ExperimentDef>& registry();
const ExperimentDef* find_experiment(const std::string& name);  // nullptr if unknown

/// Parse a flat `key = value` config file. `[section]` lines are cosmetic
/// grouping, `#`/`;` start comments. Throws usage_error with file:line
/// diagnostics on malformed lines or duplicate keys.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

/// Merge defaults, config-file entries, and --param flags (flags win) against
/// the experiment's schema; unknown or non-numeric values are usage errors.
/// The special keys `experiment`, `seed`, `output_dir` are honored in the
/// file; the seed/output flags override them.
ExperimentConfig resolve_config(const std::string& experiment,
                                const std::vector<std::pair<std::string, std::string>>& file_entries,
                                const std::vector<std::pair<std::string, std::string>>& flag_params,
                                std::optional<std::uint64_t> seed_flag,
                                std::optional<std::string> out_flag);

/// Default output directory: $INTERVENE_OUT_DIR if set, else "intervene-out",
/// with the experiment name appended.
std::string default_output_dir(const std::string& experiment);

/// Run and write report.json/timings.json/artifacts; returns 0 or 2. Any
/// domain error is recorded as a failed check in the report.
int run_experiment(const ExperimentConfig& cfg);

// Typed access to resolved parameters (throws usage_error on bad values).
double param_double(const ExperimentConfig& cfg, const std::string& key);
std::int64_t param_int(const ExperimentConfig& cfg, const std::string& key);
std::vector<double> param_list(const ExperimentConfig& cfg, const std::string& key);

std::string version_string();

}  // namespace intervene::cli
