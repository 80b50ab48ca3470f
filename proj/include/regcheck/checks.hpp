#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace regcheck {

/// One asserted tolerance: `value relation threshold`. Non-finite values fail.
struct CheckRow {
    std::string name;
    double value = 0.0;
    std::string relation;  // "<", "<=", ">", ">=", "=="
    double threshold = 0.0;
    bool passed = false;

    nlohmann::json to_json() const;
};

CheckRow check_below(std::string name, double value, double threshold);
CheckRow check_at_most(std::string name, double value, double threshold);
CheckRow check_above(std::string name, double value, double threshold);
CheckRow check_at_least(std::string name, double value, double threshold);
CheckRow check_equal(std::string name, double value, double expected);
/// A boolean condition, stored as value 1 or 0 against threshold 1.
CheckRow check_true(std::string name, bool condition);

/// |a - b| / |b|, or |a| when b is zero.
double relative_change(double a, double b);

/// Checks of one suite plus free-form measured quantities.
struct SuiteReport {
    std::string suite;
    std::vector<CheckRow> checks;
    nlohmann::json details = nlohmann::json::object();
    /// Set when the suite threw; the suite then fails.
    std::string error;

    bool passed() const;
    void add(CheckRow row) { checks.push_back(std::move(row)); }
    /// Append the rows of another report, prefixing each name with its suite.
    void merge(const SuiteReport& part);
    nlohmann::json to_json() const;
};

}  // namespace regcheck
