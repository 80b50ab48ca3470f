#include "regcheck/checks.hpp"

#include <cmath>

namespace regcheck {

namespace {

CheckRow make(std::string name, double value, const char* relation, double threshold, bool ok) {
    return {std::move(name), value, relation, threshold, std::isfinite(value) && ok};
}

}  // namespace

nlohmann::json CheckRow::to_json() const {
    nlohmann::json j{{"name", name}, {"relation", relation}, {"threshold", threshold}, {"passed", passed}};
    // JSON has no inf or nan; keep the row and record the value as text.
    if (std::isfinite(value))
        j["value"] = value;
    else
        j["value"] = std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    return j;
}

CheckRow check_below(std::string name, double value, double threshold) {
    return make(std::move(name), value, "<", threshold, value < threshold);
}
CheckRow check_at_most(std::string name, double value, double threshold) {
    return make(std::move(name), value, "<=", threshold, value <= threshold);
}
CheckRow check_above(std::string name, double value, double threshold) {
    return make(std::move(name), value, ">", threshold, value > threshold);
}
CheckRow check_at_least(std::string name, double value, double threshold) {
    return make(std::move(name), value, ">=", threshold, value >= threshold);
}
CheckRow check_equal(std::string name, double value, double expected) {
    return make(std::move(name), value, "==", expected, value == expected);
}
CheckRow check_true(std::string name, bool condition) {
    return make(std::move(name), condition ? 1.0 : 0.0, "==", 1.0, condition);
}

double relative_change(double a, double b) { return b != 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a); }

bool SuiteReport::passed() const {
    if (!error.empty()) return false;
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

void SuiteReport::merge(const SuiteReport& part) {
    for (auto row : part.checks) {
        row.name = part.suite + "." + row.name;
        checks.push_back(std::move(row));
    }
    details[part.suite] = part.details;
    if (!part.error.empty()) error += (error.empty() ? "" : "; ") + part.suite + ": " + part.error;
}

nlohmann::json SuiteReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : checks) rows.push_back(c.to_json());
    return {{"suite", suite}, {"passed", passed()}, {"checks", rows}, {"details", details}, {"error", error}};
}

}  // namespace regcheck
