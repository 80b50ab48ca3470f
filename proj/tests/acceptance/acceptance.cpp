// Acceptance run: executes the shipped scenarios through the same code path as
// the command-line tool and prints one PASS/FAIL line per criterion. Exit
// status is nonzero when any criterion fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "regcheck/scenario.hpp"

namespace fs = std::filesystem;
using namespace regcheck;
using json = nlohmann::json;

namespace {

const fs::path kScenarios = REGCHECK_SCENARIO_DIR;

struct Run {
    RunOutcome outcome;
    std::string bytes;  // report.json as written
};

Run run(const std::string& scenario_file, const std::string& command, const fs::path& out) {
    const auto s = load_scenario(kScenarios / scenario_file);
    fs::remove_all(out);
    Run r{run_tasks(s, command, command_tasks(s, command, std::nullopt, out),
                    [](const std::string& line) { std::cerr << "  " << line << '\n'; }),
          {}};
    write_outcome(r.outcome, out);
    std::ifstream is(out / "report.json", std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    r.bytes = ss.str();
    return r;
}

const json& suite(const Run& r, const std::string& name) {
    for (const auto& s : r.outcome.report.at("suites"))
        if (s.at("suite") == name) return s;
    throw std::runtime_error("no suite " + name + " in report");
}

// Rows whose name satisfies `select`. A suite error or an empty selection fails.
struct Verdict {
    bool passed = true;
    std::vector<std::string> notes;
};

Verdict rows(const json& s, const std::function<bool(const std::string&)>& select) {
    Verdict v;
    if (!s.at("error").get<std::string>().empty()) {
        v.passed = false;
        v.notes.push_back("error: " + s.at("error").get<std::string>());
    }
    int used = 0;
    for (const auto& c : s.at("checks")) {
        const auto name = c.at("name").get<std::string>();
        if (!select(name)) continue;
        ++used;
        const auto& val = c.at("value");
        const std::string shown = val.is_string() ? val.get<std::string>() : val.dump();
        if (!c.at("passed").get<bool>()) {
            v.passed = false;
            v.notes.push_back(name + "=" + shown + " (need " + c.at("relation").get<std::string>() + " " +
                              c.at("threshold").dump() + ")");
        }
    }
    if (used == 0) {
        v.passed = false;
        v.notes.push_back("no rows selected");
    }
    if (v.notes.empty()) v.notes.push_back(std::to_string(used) + " rows");
    return v;
}

bool starts(const std::string& s, std::initializer_list<const char*> prefixes) {
    for (const char* p : prefixes)
        if (s.rfind(p, 0) == 0) return true;
    return false;
}

bool contains(const std::string& s, std::initializer_list<const char*> parts) {
    for (const char* p : parts)
        if (s.find(p) != std::string::npos) return true;
    return false;
}

int failures = 0;

void report(int id, const std::string& title, const Verdict& v) {
    std::string notes;
    for (const auto& n : v.notes) notes += (notes.empty() ? "" : "; ") + n;
    std::printf("%s criterion %2d: %s [%s]\n", v.passed ? "PASS" : "FAIL", id, title.c_str(), notes.c_str());
    std::fflush(stdout);
    if (!v.passed) ++failures;
}

}  // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "regcheck_acceptance";
    try {
        std::cerr << "lemmas-default\n";
        const auto lemmas = run("lemmas-default.cfg", "check-lemmas", work / "lemmas_a");
        const auto& ls = suite(lemmas, "lemma_suite");
        report(1, "operator algebra within 1e-12", rows(ls, [](auto& n) { return starts(n, {"operator_algebra."}); }));
        report(2, "interpolation constant stable from n=32 to n=64",
               rows(ls, [](auto& n) { return starts(n, {"interpolation."}); }));
        report(3, "smoothing ratio bounded, max/median < 10", rows(ls, [](auto& n) { return starts(n, {"smoothing."}); }));
        report(4, "Holder constant stable under 10x pairs, exponent 1 - 3/p",
               rows(ls, [](auto& n) { return starts(n, {"holder."}); }));
        report(5, "Oseen constant stable under t -> 4t and n=64 -> 128",
               rows(ls, [](auto& n) { return starts(n, {"oseen."}); }));

        std::cerr << "picard\n";
        const auto picard = run("picard.cfg", "run", work / "picard");
        const auto& ps = suite(picard, "picard_suite");
        report(6, "Picard contraction at T0/2 and amplitude sweep linearity",
               rows(ps, [](auto& n) { return starts(n, {"contraction.", "sweep."}); }));
        report(7, "steady sel_aux and mhd states drift < 1e-6",
               rows(ps, [](auto& n) { return starts(n, {"invariance."}); }));

        std::cerr << "bootstrap\n";
        const auto boot = run("bootstrap.cfg", "run", work / "bootstrap_a");
        const auto& bs = suite(boot, "bootstrap_suite");
        const auto pressure_row = [](const std::string& n) {
            return contains(n, {"pressure_oracle", "momentum_curl", "momentum_defect"});
        };
        report(8, "derivative bootstrap to order k+2, Morrey and Holder norms finite",
               rows(bs, [&](auto& n) { return !pressure_row(n); }));
        report(9, "pressure against the Riesz oracle, curl-free momentum defect", rows(bs, pressure_row));

        std::cerr << "gevrey\n";
        const auto gev = run("gevrey.cfg", "run", work / "gevrey");
        const auto& gs = suite(gev, "gevrey_suite");
        report(10, "Gevrey weighted solve, radius >= 0.8 b1, radius recovery within 5%",
               rows(gs, [](auto& n) { return starts(n, {"radius.", "beta", "b1", "forces.", "solve."}); }));

        std::cerr << "determinism reruns\n";
        Verdict det;
        const auto compare = [&](const std::string& label, const Run& a, const Run& b) {
            if (a.bytes.empty() || a.bytes != b.bytes) {
                det.passed = false;
                det.notes.push_back(label + " differs");
            } else {
                det.notes.push_back(label + " identical (" + std::to_string(a.bytes.size()) + " bytes)");
            }
        };
        compare("lemmas-default", lemmas, run("lemmas-default.cfg", "check-lemmas", work / "lemmas_b"));
        compare("bootstrap", boot, run("bootstrap.cfg", "run", work / "bootstrap_b"));
        compare("manufacture-gevrey", run("manufacture-gevrey.cfg", "manufacture", work / "man_a"),
                run("manufacture-gevrey.cfg", "manufacture", work / "man_b"));
        report(11, "same scenario and seed give byte-identical reports", det);
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance run aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
