#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "regcheck/lemmas.hpp"
#include "regcheck/suites.hpp"

namespace regcheck {

/// Parse or validation failure in a scenario file; line and column are 1-based
/// (0 when the problem is not tied to a position).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& origin, int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// How the `manufacture` command builds a steady state before lifting its defect into forces.
struct ManufactureRecipe {
    SystemKind kind = SystemKind::mhd;
    double taylor_green_amp = 1e-3;
    /// Director of sel_aux and harmonic_map: helix (cos x3, sin x3, 0)
    /// or constant (1, 0, 0).
    std::string v_profile = "helix";
    /// Multiplies the director; anything but 1 violates |V| = 1 and is rejected.
    double v_scale = 1.0;
    /// When set (mhd only), u and b have coefficients decaying like e^{-a|k|}.
    std::optional<double> gevrey_decay;
    double gevrey_amplitude = 0.05;
    double closure_tol = 1e-9;

    void validate() const;
    nlohmann::json to_json() const;
};

/// Horizon and quadrature of the `solve` and `steady-check` commands.
struct SolveSettings {
    double T = 0.1;
    int n_times = 64;
    int max_iters = 50;
    double tol = 1e-10;
    double residual_tol = 1e-9;
    double drift_tol = 1e-6;

    PicardConfig picard(double p) const;
    nlohmann::json to_json() const;
};

struct Scenario {
    std::string name = "default";
    std::vector<std::string> suites;
    std::uint64_t seed = 1;
    std::string out = "out";
    int n = 32;
    double length = 2 * 3.14159265358979323846;
    double p = 6.0;  // Morrey exponent shared by every suite

    LemmaConfig lemmas;
    PicardSuiteConfig picard;
    BootstrapSuiteConfig bootstrap;
    GevreySuiteConfig gevrey;
    ManufactureRecipe manufacture;
    SolveSettings solve;

    Grid grid() const;
    /// Copy the shared settings (p, seed) into the suite configurations.
    void propagate();
    void validate() const;
    nlohmann::json to_json() const;
};

/// Names accepted in `suites`, in execution order.
const std::vector<std::string>& known_suites();

/// Parse "[section]" headers and "key = value" lines; '#' starts a comment.
/// Unknown sections or keys, repeated keys and malformed values are errors.
Scenario parse_scenario(std::string_view text, const std::string& origin = "<config>");
Scenario load_scenario(const std::filesystem::path& path);

/// Every accepted key with its default value and a one-line description, as
/// a commented scenario file.
std::string config_reference();

/// Build the recipe's steady state with manufactured forces. Throws
/// std::invalid_argument for recipes that break an invariant of the system.
SystemState generate_manufactured(const Grid& grid, const ManufactureRecipe& recipe, std::uint64_t seed);

using Artifacts = std::map<std::string, std::string>;

/// One unit of work of a run: it produces a suite report and may add files.
struct Task {
    std::string name;
    std::function<SuiteReport(Artifacts&)> run;
};

/// Tasks of the suites selected in the scenario, in the order of known_suites().
std::vector<Task> suite_tasks(const Scenario& scenario);

struct RunOutcome {
    nlohmann::json report;  // deterministic for a fixed scenario and seed
    nlohmann::json timing;  // wall-clock seconds per task, kept apart from the report
    Artifacts artifacts;    // extra files (CSV extracts) by name
    bool passed = true;
    bool errored = false;   // some task threw
};

/// Run the tasks in order. A task that throws yields a failed report with the
/// message recorded; the remaining tasks still run.
RunOutcome run_tasks(const Scenario& scenario, const std::string& command, const std::vector<Task>& tasks,
                     const std::function<void(const std::string&)>& log = {});

/// Subcommands that run tasks: run, check-lemmas, solve, steady-check,
/// bootstrap, gevrey, manufacture.
const std::vector<std::string>& known_commands();

/// Tasks of one subcommand. solve and steady-check use the state in
/// `state_dir` when given and the manufacture recipe otherwise; manufacture
/// writes its state under out_dir/state.
std::vector<Task> command_tasks(const Scenario& scenario, const std::string& command,
                                const std::optional<std::filesystem::path>& state_dir,
                                const std::filesystem::path& out_dir);

/// report.json, timing.json, checks.csv and the artifacts, in `dir`.
void write_outcome(const RunOutcome& outcome, const std::filesystem::path& dir);

/// Flat CSV of every check row of a report: suite,name,value,relation,threshold,passed.
std::string checks_csv(const nlohmann::json& report);

}  // namespace regcheck
