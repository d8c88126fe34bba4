/**
 * Deterministic report emission: a minimal ordered JSON value type with
 * fixed 17-significant-digit float formatting, and a report builder that
 * collects results (with provenance), named pass/fail checks, informational
 * findings, artifact names, and wall-clock timings.
 *
 * Byte-stability contract: report.json depends only on (config, seed,
 * library version); timings go to a separate timings.json referenced by
 * name from the report.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace intervene::report {

/// Insertion-ordered JSON value. Doubles print as %.17g; non-finite doubles
/// are serialized as the quoted strings "Infinity", "-Infinity", "NaN".
class Json {
  public:
    static Json object();
    static Json array();
    static Json number(double v);
    static Json integer(std::int64_t v);
    static Json boolean(bool v);
    static Json string(std::string v);

    /// Object member append (keeps insertion order); returns *this.
    Json& set(std::string key, Json value);
    /// Array element append; returns *this.
    Json& push(Json value);

    void write(std::ostream& os, int indent = 0) const;
    std::string dump() const;

  private:
    enum class Kind { Object, Array, Number, Integer, Boolean, String };
    Kind kind_ = Kind::Object;
    double num_ = 0.0;
    std::int64_t int_ = 0;
    bool bool_ = false;
    std::string str_;
    std::vector<Json> elements_;
    std::vector<std::pair<std::string, Json>> members_;
};

/// Format one double exactly as the JSON layer does (17 significant digits).
std::string format_double(double v);

struct ResultEntry {
    std::string name;
    double value = 0.0;
    std::string provenance;  // analytic | grid | monte-carlo | fock | covariance
};

struct CheckEntry {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Informational verdict on a claimed relationship; never affects exit codes.
struct Finding {
    std::string name;
    bool agrees = false;
    double measured = 0.0;
    std::string detail;
};

struct Timing {
    std::string name;
    double seconds = 0.0;
};

class ReportBuilder {
  public:
    ReportBuilder(std::string experiment,
                  std::vector<std::pair<std::string, std::string>> parameters,
                  std::uint64_t seed, std::string output_dir, std::string version);

    void add_result(std::string name, double value, std::string provenance);
    void add_check(std::string name, bool passed, std::string detail);
    void add_finding(std::string name, bool agrees, double measured, std::string detail);
    void add_artifact(std::string filename);
    void add_timing(std::string name, double seconds);
    /// Attach an extra structured section to the report (e.g. a z-score table).
    void add_section(std::string name, Json value);

    bool all_passed() const;
    const std::vector<CheckEntry>& checks() const { return checks_; }

    Json report_json() const;   // deterministic; timings excluded
    Json timings_json() const;  // wall-clock data, separate file
    /// Write report.json and timings.json into `dir` (created if needed).
    void write(const std::filesystem::path& dir) const;

  private:
    std::string experiment_;
    std::vector<std::pair<std::string, std::string>> parameters_;
    std::uint64_t seed_ = 0;
    std::string output_dir_;
    std::string version_;
    std::vector<ResultEntry> results_;
    std::vector<CheckEntry> checks_;
    std::vector<Finding> findings_;
    std::vector<std::string> artifacts_;
    std::vector<Timing> timings_;
    std::vector<std::pair<std::string, Json>> sections_;
};

}  // namespace intervene::report
