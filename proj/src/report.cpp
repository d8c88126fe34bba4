#include "intervene/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace intervene::report {

std::string format_double(double v) {
    if (std::isnan(v)) return "\"NaN\"";
    if (std::isinf(v)) return v > 0 ? "\"Infinity\"" : "\"-Infinity\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void write_escaped(std::ostream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
        switch (c) {
            case '"': os << "\\\""; break;
            case '\\': os << "\\\\"; break;
            case '\b': os << "\\b"; break;
            case '\f': os << "\\f"; break;
            case '\n': os << "\\n"; break;
            case '\r': os << "\\r"; break;
            case '\t': os << "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    os << buf;
                } else {
                    os << c;
                }
        }
    }
    os << '"';
}

void pad(std::ostream& os, int n) {
    for (int i = 0; i < n; ++i) os << ' ';
}

}  // namespace

Json Json::object() { return Json{}; }

Json Json::array() {
    Json j;
    j.kind_ = Kind::Array;
    return j;
}

Json Json::number(double v) {
    Json j;
    j.kind_ = Kind::Number;
    j.num_ = v;
    return j;
}

Json Json::integer(std::int64_t v) {
    Json j;
    j.kind_ = Kind::Integer;
    j.int_ = v;
    return j;
}

Json Json::boolean(bool v) {
    Json j;
    j.kind_ = Kind::Boolean;
    j.bool_ = v;
    return j;
}

Json Json::string(std::string v) {
    Json j;
    j.kind_ = Kind::String;
    j.str_ = std::move(v);
    return j;
}

Json& Json::set(std::string key, Json value) {
    if (kind_ != Kind::Object) throw std::logic_error("Json::set on a non-object");
    members_.emplace_back(std::move(key), std::move(value));
    return *this;
}

Json& Json::push(Json value) {
    if (kind_ != Kind::Array) throw std::logic_error("Json::push on a non-array");
    elements_.push_back(std::move(value));
    return *this;
}

void Json::write(std::ostream& os, int indent) const {
    switch (kind_) {
        case Kind::Number: os << format_double(num_); return;
        case Kind::Integer: os << int_; return;
        case Kind::Boolean: os << (bool_ ? "true" : "false"); return;
        case Kind::String: write_escaped(os, str_); return;
        case Kind::Array: {
            if (elements_.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < elements_.size(); ++i) {
                pad(os, indent + 2);
                elements_[i].write(os, indent + 2);
                os << (i + 1 < elements_.size() ? ",\n" : "\n");
            }
            pad(os, indent);
            os << ']';
            return;
        }
        case Kind::Object: {
            if (members_.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            for (std::size_t i = 0; i < members_.size(); ++i) {
                pad(os, indent + 2);
                write_escaped(os, members_[i].first);
                os << ": ";
                members_[i].second.write(os, indent + 2);
                os << (i + 1 < members_.size() ? ",\n" : "\n");
            }
            pad(os, indent);
            os << '}';
            return;
        }
    }
}

std::string Json::dump() const {
    std::ostringstream os;
    write(os);
    os << '\n';
    return os.str();
}

ReportBuilder::ReportBuilder(std::string experiment,
                             std::vector<std::pair<std::string, std::string>> parameters,
                             std::uint64_t seed, std::string output_dir, std::string version)
    : experiment_(std::move(experiment)),
      parameters_(std::move(parameters)),
      seed_(seed),
      output_dir_(std::move(output_dir)),
      version_(std::move(version)) {}

void ReportBuilder::add_result(std::string name, double value, std::string provenance) {
    results_.push_back({std::move(name), value, std::move(provenance)});
}

void ReportBuilder::add_check(std::string name, bool passed, std::string detail) {
    checks_.push_back({std::move(name), passed, std::move(detail)});
}

void ReportBuilder::add_finding(std::string name, bool agrees, double measured,
                                std::string detail) {
    findings_.push_back({std::move(name), agrees, measured, std::move(detail)});
}

void ReportBuilder::add_artifact(std::string filename) {
    artifacts_.push_back(std::move(filename));
}

void ReportBuilder::add_timing(std::string name, double seconds) {
    timings_.push_back({std::move(name), seconds});
}

void ReportBuilder::add_section(std::string name, Json value) {
    sections_.emplace_back(std::move(name), std::move(value));
}

bool ReportBuilder::all_passed() const {
    for (const CheckEntry& c : checks_)
        if (!c.passed) return false;
    return true;
}

Json ReportBuilder::report_json() const {
    Json config = Json::object();
    config.set("experiment", Json::string(experiment_));
    Json params = Json::object();
    for (const auto& [k, v] : parameters_) params.set(k, Json::string(v));
    config.set("parameters", std::move(params));
    config.set("seed", Json::integer(static_cast<std::int64_t>(seed_)));
    config.set("output_dir", Json::string(output_dir_));

    Json results = Json::array();
    for (const ResultEntry& r : results_) {
        Json e = Json::object();
        e.set("name", Json::string(r.name));
        e.set("value", Json::number(r.value));
        e.set("provenance", Json::string(r.provenance));
        results.push(std::move(e));
    }
    Json checks = Json::array();
    for (const CheckEntry& c : checks_) {
        Json e = Json::object();
        e.set("name", Json::string(c.name));
        e.set("passed", Json::boolean(c.passed));
        e.set("detail", Json::string(c.detail));
        checks.push(std::move(e));
    }
    Json findings = Json::array();
    for (const Finding& f : findings_) {
        Json e = Json::object();
        e.set("name", Json::string(f.name));
        e.set("agrees", Json::boolean(f.agrees));
        e.set("measured", Json::number(f.measured));
        e.set("detail", Json::string(f.detail));
        findings.push(std::move(e));
    }
    Json artifacts = Json::array();
    for (const std::string& a : artifacts_) artifacts.push(Json::string(a));

    Json root = Json::object();
    root.set("config", std::move(config));
    root.set("version", Json::string(version_));
    root.set("results", std::move(results));
    root.set("checks", std::move(checks));
    root.set("all_checks_passed", Json::boolean(all_passed()));
    root.set("findings", std::move(findings));
    for (const auto& [name, value] : sections_) root.set(name, Json(value));
    root.set("artifacts", std::move(artifacts));
    root.set("timings_file", Json::string("timings.json"));
    return root;
}

Json ReportBuilder::timings_json() const {
    Json stages = Json::array();
    for (const Timing& t : timings_) {
        Json e = Json::object();
        e.set("name", Json::string(t.name));
        e.set("seconds", Json::number(t.seconds));
        stages.push(std::move(e));
    }
    Json root = Json::object();
    root.set("experiment", Json::string(experiment_));
    root.set("stages", std::move(stages));
    return root;
}

void ReportBuilder::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "report.json", std::ios::binary);
        if (!os) throw std::runtime_error("cannot open report.json for writing in " + dir.string());
        os << report_json().dump();
    }
    {
        std::ofstream os(dir / "timings.json", std::ios::binary);
        if (!os) throw std::runtime_error("cannot open timings.json for writing in " + dir.string());
        os << timings_json().dump();
    }
}

}  // namespace intervene::report
