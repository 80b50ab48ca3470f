// Command-line driver: parses a scenario, runs the tasks of one subcommand,
// writes report.json, timing.json and CSV extracts, and maps the outcome to
// the exit status (0 all checks passed, 1 a check failed, 2 configuration or
// runtime error).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "regcheck/scenario.hpp"

namespace fs = std::filesystem;
using namespace regcheck;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kError = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::string state;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config, "scenario file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out, "output directory (overrides [scenario] out)");
    cmd->add_option("--seed", opt.seed, "seed (overrides [scenario] seed)");
    cmd->add_option("--grid", opt.grid, "points per axis (overrides [grid] n)");
    cmd->add_flag("--quiet", opt.quiet, "print nothing but errors");
}

Scenario scenario_from(const Options& opt) {
    Scenario s;
    if (!opt.config.empty()) s = load_scenario(opt.config);
    if (opt.seed) s.seed = *opt.seed;
    if (opt.grid) s.n = *opt.grid;
    s.propagate();
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(opt.config.empty() ? "<command line>" : opt.config, 0, 0, e.what());
    }
    return s;
}

int run_command(const std::string& command, const Options& opt) {
    const Scenario scenario = scenario_from(opt);
    const fs::path out = opt.out.empty() ? fs::path(scenario.out) : fs::path(opt.out);
    std::optional<fs::path> state;
    if (!opt.state.empty()) state = opt.state;

    const auto tasks = command_tasks(scenario, command, state, out);
    const auto log = [&](const std::string& line) {
        if (!opt.quiet) std::cerr << line << '\n';
    };
    const auto outcome = run_tasks(scenario, command, tasks, log);
    write_outcome(outcome, out);

    if (!opt.quiet) {
        for (const auto& name : outcome.report["summary"]["failed"]) std::cout << "failed: " << name.get<std::string>() << '\n';
        for (const auto& e : outcome.report["summary"]["errors"]) std::cout << "error: " << e.get<std::string>() << '\n';
        std::cout << (outcome.passed ? "PASS" : "FAIL") << "  " << outcome.report["summary"]["checks"].get<int>()
                  << " checks in " << tasks.size() << " task(s); report in " << (out / "report.json").string() << '\n';
    }
    if (outcome.errored) return kError;
    return outcome.passed ? kPass : kFail;
}

// Summary of an existing report: one line per check, then the verdict.
int show_report(const std::string& where, bool quiet) {
    fs::path path = where;
    if (fs::is_directory(path)) path /= "report.json";
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    const auto report = nlohmann::json::parse(is);
    if (!quiet) {
        std::cout << "scenario " << report.at("scenario").at("name").get<std::string>() << ", command "
                  << report.at("command").get<std::string>() << ", seed " << report.at("seed") << '\n';
        for (const auto& s : report.at("suites")) {
            std::cout << '\n' << s.at("suite").get<std::string>() << (s.at("passed").get<bool>() ? "  PASS" : "  FAIL") << '\n';
            if (!s.at("error").get<std::string>().empty()) std::cout << "  error: " << s.at("error").get<std::string>() << '\n';
            for (const auto& c : s.at("checks")) {
                const auto& v = c.at("value");
                std::printf("  %-4s %-48s %14s %-2s %s\n", c.at("passed").get<bool>() ? "ok" : "FAIL",
                            c.at("name").get<std::string>().c_str(),
                            (v.is_string() ? v.get<std::string>() : v.dump()).c_str(),
                            c.at("relation").get<std::string>().c_str(), c.at("threshold").dump().c_str());
            }
        }
        std::cout << '\n' << (report.at("passed").get<bool>() ? "PASS" : "FAIL") << '\n';
    }
    return report.at("passed").get<bool>() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regcheck: numerical checks of regularity estimates for SEL, MHD and Navier-Stokes systems"};
    app.require_subcommand(1);

    Options opt;
    int status = kPass;
    const std::pair<const char*, const char*> commands[] = {
        {"run", "run the suites listed in [scenario] suites"},
        {"check-lemmas", "operator identities and the lemma fits"},
        {"solve", "Picard solve of a manufactured or stored state"},
        {"steady-check", "drift of a steady state under the evolution"},
        {"bootstrap", "derivative bootstrap and pressure reconstruction"},
        {"gevrey", "Gevrey-weighted solve and radius recovery"},
        {"manufacture", "write a steady state with manufactured forces"},
    };
    for (const auto& [name, help] : commands) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(cmd, opt);
        if (std::string(name) == "solve" || std::string(name) == "steady-check")
            cmd->add_option("--state", opt.state, "state directory written by manufacture")->check(CLI::ExistingDirectory);
        cmd->callback([&opt, &status, command = std::string(name)] { status = run_command(command, opt); });
    }

    std::string report_path;
    bool report_quiet = false;
    auto* report = app.add_subcommand("report", "summarize a report.json (or the directory holding it)");
    report->add_option("path", report_path, "report file or output directory")->required();
    report->add_flag("--quiet", report_quiet, "only set the exit status");
    report->callback([&] { status = show_report(report_path, report_quiet); });

    app.add_subcommand("keys", "print every scenario key with its default")->callback([] {
        std::cout << config_reference();
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return status;
}
