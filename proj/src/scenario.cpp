#include "regcheck/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "regcheck/bootstrap.hpp"
#include "regcheck/gevrey.hpp"
#include "regcheck/operators.hpp"
#include "regcheck/snapshot.hpp"

namespace regcheck {

ConfigError::ConfigError(const std::string& origin, int line, int column, const std::string& message)
    : std::runtime_error(line > 0 ? origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message
                                  : origin + ": " + message),
      line_(line),
      column_(column) {}

namespace {

// A rejected value; the parser attaches the position.
struct BadValue : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw BadValue("expected a finite number, got '" + std::string(s) + "'");
    return v;
}

long long to_integer(std::string_view s) {
    s = trim(s);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw BadValue("expected an integer, got '" + std::string(s) + "'");
    return v;
}

int to_int(std::string_view s) {
    const long long v = to_integer(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw BadValue("integer out of range: " + std::string(trim(s)));
    return static_cast<int>(v);
}

std::uint64_t to_seed(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw BadValue("expected a non-negative integer, got '" + std::string(s) + "'");
    return v;
}

bool to_bool(std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw BadValue("expected true or false, got '" + std::string(s) + "'");
}

// "6.283", "pi", "2pi", "2*pi".
double to_length(std::string_view s) {
    s = trim(s);
    if (s.ends_with("pi")) {
        auto factor = trim(s.substr(0, s.size() - 2));
        if (factor.ends_with('*')) factor = trim(factor.substr(0, factor.size() - 1));
        return (factor.empty() ? 1.0 : to_double(factor)) * std::numbers::pi;
    }
    return to_double(s);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    s = trim(s);
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        if (item.empty()) throw BadValue("empty item in list '" + std::string(s) + "'");
        out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> to_doubles(std::string_view s) {
    std::vector<double> out;
    for (auto item : split_list(s)) out.push_back(to_double(item));
    return out;
}

SystemKind to_kind(std::string_view s) {
    try {
        return parse_kind(trim(s));
    } catch (const std::invalid_argument&) {
        throw BadValue("unknown system kind '" + std::string(trim(s)) + "' (sel_aux, mhd, ns_stationary, harmonic_map)");
    }
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

std::string fmt(double v) { return nlohmann::json(v).dump(); }

std::string fmt(const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(fmt(x));
    return join(parts);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------
// Key registry

struct KeySpec {
    std::string section;
    std::string key;
    std::string doc;
    std::function<void(Scenario&, std::string_view)> set;
    std::function<std::string(const Scenario&)> get;
};

#define RC_NUM(SEC, GROUP, FIELD, DOC)                                                                      \
    KeySpec {                                                                                               \
        SEC, #FIELD, DOC, [](Scenario& s, std::string_view v) { s.GROUP.FIELD = to_double(v); },            \
            [](const Scenario& s) { return fmt(s.GROUP.FIELD); }                                            \
    }
#define RC_INT(SEC, GROUP, FIELD, DOC)                                                                      \
    KeySpec {                                                                                               \
        SEC, #FIELD, DOC, [](Scenario& s, std::string_view v) { s.GROUP.FIELD = to_int(v); },               \
            [](const Scenario& s) { return std::to_string(s.GROUP.FIELD); }                                 \
    }
#define RC_SIZE(SEC, GROUP, FIELD, DOC)                                                                     \
    KeySpec {                                                                                               \
        SEC, #FIELD, DOC,                                                                                   \
            [](Scenario& s, std::string_view v) {                                                           \
                const long long x = to_integer(v);                                                          \
                if (x < 0) throw BadValue("must be non-negative");                                          \
                s.GROUP.FIELD = static_cast<std::size_t>(x);                                                \
            },                                                                                              \
            [](const Scenario& s) { return std::to_string(s.GROUP.FIELD); }                                 \
    }
#define RC_LIST(SEC, GROUP, FIELD, DOC)                                                                     \
    KeySpec {                                                                                               \
        SEC, #FIELD, DOC, [](Scenario& s, std::string_view v) { s.GROUP.FIELD = to_doubles(v); },           \
            [](const Scenario& s) { return fmt(s.GROUP.FIELD); }                                            \
    }

const std::vector<KeySpec>& registry() {
    static const std::vector<KeySpec> keys = [] {
        std::vector<KeySpec> k;
        // [scenario]
        k.push_back({"scenario", "name", "label copied into the report",
                     [](Scenario& s, std::string_view v) {
                         if (trim(v).empty()) throw BadValue("name must not be empty");
                         s.name = std::string(trim(v));
                     },
                     [](const Scenario& s) { return s.name; }});
        k.push_back({"scenario", "kind", "system of the manufacture, solve and steady-check commands",
                     [](Scenario& s, std::string_view v) { s.manufacture.kind = to_kind(v); },
                     [](const Scenario& s) { return std::string(kind_name(s.manufacture.kind)); }});
        k.push_back({"scenario", "suites",
                     "comma-separated subset of lemma_suite, picard_suite, bootstrap_suite, gevrey_suite (may be empty)",
                     [](Scenario& s, std::string_view v) {
                         std::vector<std::string> out;
                         for (auto item : split_list(v)) {
                             const std::string name(item);
                             const auto& known = known_suites();
                             if (std::find(known.begin(), known.end(), name) == known.end())
                                 throw BadValue("unknown suite '" + name + "' (" + join(known) + ")");
                             if (std::find(out.begin(), out.end(), name) != out.end())
                                 throw BadValue("suite '" + name + "' listed twice");
                             out.push_back(name);
                         }
                         s.suites = std::move(out);
                     },
                     [](const Scenario& s) { return join(s.suites); }});
        k.push_back({"scenario", "seed", "seed of every random ensemble",
                     [](Scenario& s, std::string_view v) { s.seed = to_seed(v); },
                     [](const Scenario& s) { return std::to_string(s.seed); }});
        k.push_back({"scenario", "out", "output directory (relative to the working directory)",
                     [](Scenario& s, std::string_view v) {
                         if (trim(v).empty()) throw BadValue("out must not be empty");
                         s.out = std::string(trim(v));
                     },
                     [](const Scenario& s) { return s.out; }});
        // [grid]
        k.push_back({"grid", "n", "points per axis of the picard, bootstrap, gevrey and manufacture grids",
                     [](Scenario& s, std::string_view v) { s.n = to_int(v); },
                     [](const Scenario& s) { return std::to_string(s.n); }});
        k.push_back({"grid", "length", "box side; accepts a number or a multiple of pi such as 2pi",
                     [](Scenario& s, std::string_view v) { s.length = to_length(v); },
                     [](const Scenario& s) { return fmt(s.length); }});
        // [norms]
        k.push_back({"norms", "p", "Morrey exponent p > 3 used by every suite",
                     [](Scenario& s, std::string_view v) { s.p = to_double(v); },
                     [](const Scenario& s) { return fmt(s.p); }});

        // [lemmas]
        k.push_back(RC_INT("lemmas", lemmas, interpolation_fields, "random fields of the interpolation fit"));
        k.push_back(RC_LIST("lemmas", lemmas, sigmas, "interpolation exponents sigma > 1"));
        k.push_back(RC_INT("lemmas", lemmas, n_coarse, "coarse grid of the interpolation refinement"));
        k.push_back(RC_INT("lemmas", lemmas, n_fine, "fine grid of the interpolation refinement"));
        k.push_back(RC_NUM("lemmas", lemmas, interpolation_refine_tol, "allowed relative change of C, coarse to fine"));
        k.push_back(RC_INT("lemmas", lemmas, smoothing_fields, "random fields of the smoothing ensemble"));
        k.push_back(RC_NUM("lemmas", lemmas, t_lo, "smallest dyadic time of the smoothing check"));
        k.push_back(RC_NUM("lemmas", lemmas, t_hi, "largest dyadic time of the smoothing check"));
        k.push_back(RC_NUM("lemmas", lemmas, smoothing_spread_tol, "bound on max/median of the smoothing ratios"));
        k.push_back(RC_INT("lemmas", lemmas, holder_fields, "random fields of the Holder fit"));
        k.push_back(RC_SIZE("lemmas", lemmas, holder_pairs, "point pairs per field, base sampling"));
        k.push_back(RC_INT("lemmas", lemmas, holder_pair_factor, "multiplier of the pair count for the stability rerun"));
        k.push_back(RC_NUM("lemmas", lemmas, holder_tol, "allowed relative change of the Holder constant"));
        k.push_back(RC_NUM("lemmas", lemmas, oseen_length, "box side of the kernel check"));
        k.push_back(RC_INT("lemmas", lemmas, oseen_n, "grid of the kernel check"));
        k.push_back(RC_INT("lemmas", lemmas, oseen_n_fine, "refined grid of the kernel check"));
        k.push_back(RC_NUM("lemmas", lemmas, oseen_t, "time of the kernel check"));
        k.push_back(RC_NUM("lemmas", lemmas, oseen_time_tol, "allowed change of c from t to 4t"));
        k.push_back(RC_NUM("lemmas", lemmas, oseen_refine_tol, "allowed change of c under grid refinement"));
        k.push_back({"lemmas", "oseen_refine", "run the refined kernel grid",
                     [](Scenario& s, std::string_view v) { s.lemmas.oseen_refine = to_bool(v); },
                     [](const Scenario& s) { return fmt_bool(s.lemmas.oseen_refine); }});
        k.push_back(RC_INT("lemmas", lemmas, algebra_fields, "random fields of the operator identities"));
        k.push_back(RC_INT("lemmas", lemmas, algebra_n, "grid of the operator identities"));
        k.push_back(RC_NUM("lemmas", lemmas, algebra_tol, "tolerance of the operator identities"));

        // [picard]
        k.push_back(RC_NUM("picard", picard, amplitude, "Taylor-Green amplitude of the contraction run"));
        k.push_back(RC_NUM("picard", picard, t_max, "upper end of the existence-time bisection"));
        k.push_back(RC_INT("picard", picard, n_times, "time intervals on [0, T]"));
        k.push_back(RC_INT("picard", picard, max_iters, "iteration cap"));
        k.push_back(RC_NUM("picard", picard, tol, "stop when the increment falls below this"));
        k.push_back(RC_INT("picard", picard, ensemble, "random trajectories of the bilinear-constant fit"));
        k.push_back(RC_LIST("picard", picard, sweep, "amplitudes of the ratio sweep"));
        k.push_back(RC_INT("picard", picard, iteration_limit, "asserted bound on the iteration count"));
        k.push_back(RC_NUM("picard", picard, residual_tol, "asserted bound on the final residual"));
        k.push_back(RC_NUM("picard", picard, ratio_tol, "asserted bound on the contraction ratio"));
        k.push_back(RC_NUM("picard", picard, sweep_r2_tol, "asserted lower bound on the sweep R^2"));
        k.push_back(RC_INT("picard", picard, sel_n, "grid of the sel_aux invariance run"));
        k.push_back(RC_NUM("picard", picard, sel_amplitude, "velocity amplitude of the sel_aux steady state"));
        k.push_back(RC_NUM("picard", picard, mhd_steady_amplitude, "amplitude of the mhd steady state"));
        k.push_back(RC_NUM("picard", picard, steady_T, "horizon of the invariance runs"));
        k.push_back(RC_NUM("picard", picard, drift_tol, "asserted bound on the relative steady drift"));

        // [bootstrap]
        k.push_back({"bootstrap", "kinds", "systems checked, comma-separated",
                     [](Scenario& s, std::string_view v) {
                         std::vector<SystemKind> kinds;
                         for (auto item : split_list(v)) kinds.push_back(to_kind(item));
                         s.bootstrap.kinds = std::move(kinds);
                     },
                     [](const Scenario& s) {
                         std::vector<std::string> names;
                         for (auto kk : s.bootstrap.kinds) names.emplace_back(kind_name(kk));
                         return join(names);
                     }});
        k.push_back(RC_NUM("bootstrap", bootstrap, amplitude, "amplitude of the manufactured states"));
        k.push_back(RC_INT("bootstrap", bootstrap, k, "derivatives are checked through order k + 2"));
        k.push_back(RC_NUM("bootstrap", bootstrap, residual_tol, "asserted bound on the derivative residuals"));
        k.push_back(RC_SIZE("bootstrap", bootstrap, holder_pairs, "point pairs of the derivative Holder check"));
        k.push_back(RC_NUM("bootstrap", bootstrap, pressure_tol, "pressure against the Riesz oracle"));
        k.push_back(RC_NUM("bootstrap", bootstrap, curl_tol, "curl of the momentum defect"));

        // [gevrey]
        k.push_back(RC_NUM("gevrey", gevrey, b, "decay rate b of the weight"));
        k.push_back(RC_NUM("gevrey", gevrey, T0, "reference time T0 of beta = 2b/(3 sqrt T0)"));
        k.push_back(RC_NUM("gevrey", gevrey, decay, "strip width of the manufactured steady state"));
        k.push_back(RC_NUM("gevrey", gevrey, amplitude, "H^1 size of each field of that state"));
        k.push_back(RC_INT("gevrey", gevrey, n_times, "time intervals of the weighted solve"));
        k.push_back(RC_INT("gevrey", gevrey, ensemble, "random trajectories of the weighted bilinear fit"));
        k.push_back(RC_NUM("gevrey", gevrey, residual_tol, "asserted bound on the weighted residual"));
        k.push_back(RC_NUM("gevrey", gevrey, drift_tol, "asserted bound on the drift from the steady state"));
        k.push_back(RC_NUM("gevrey", gevrey, radius_tol, "relative tolerance of the radius recovery"));
        k.push_back(RC_NUM("gevrey", gevrey, b1_slack, "final radius must reach this fraction of b1"));
        k.push_back(RC_LIST("gevrey", gevrey, probe_widths, "widths b of the unforced ladder"));
        k.push_back(RC_NUM("gevrey", gevrey, probe_amplitude, "H^1 size of the unforced data"));
        k.push_back(RC_NUM("gevrey", gevrey, bilinear_tol, "allowed change of the weighted constant under refinement"));
        k.push_back(RC_NUM("gevrey", gevrey, product_spread_tol, "bound on max/median of the product ratios"));

        // [manufacture]
        k.push_back(RC_NUM("manufacture", manufacture, taylor_green_amp, "velocity amplitude, in (0, 1]"));
        k.push_back({"manufacture", "v_profile", "director: helix (cos x3, sin x3, 0) or constant (1, 0, 0)",
                     [](Scenario& s, std::string_view v) { s.manufacture.v_profile = std::string(trim(v)); },
                     [](const Scenario& s) { return s.manufacture.v_profile; }});
        k.push_back(RC_NUM("manufacture", manufacture, v_scale, "factor on the director; only 1 keeps |V| = 1"));
        k.push_back({"manufacture", "gevrey_decay",
                     "mhd only: strip width a of e^{-a|k|} fields; 'none' uses Taylor-Green and ABC",
                     [](Scenario& s, std::string_view v) {
                         if (trim(v) == "none") s.manufacture.gevrey_decay.reset();
                         else s.manufacture.gevrey_decay = to_double(v);
                     },
                     [](const Scenario& s) {
                         return s.manufacture.gevrey_decay ? fmt(*s.manufacture.gevrey_decay) : std::string("none");
                     }});
        k.push_back(RC_NUM("manufacture", manufacture, gevrey_amplitude, "H^1 size of the decaying fields, in (0, 1]"));
        k.push_back(RC_NUM("manufacture", manufacture, closure_tol, "asserted bound on the stationary residual"));

        // [solve]
        k.push_back(RC_NUM("solve", solve, T, "horizon"));
        k.push_back(RC_INT("solve", solve, n_times, "time intervals on [0, T]"));
        k.push_back(RC_INT("solve", solve, max_iters, "iteration cap"));
        k.push_back(RC_NUM("solve", solve, tol, "stop when the increment falls below this"));
        k.push_back(RC_NUM("solve", solve, residual_tol, "asserted bound on the final residual"));
        k.push_back(RC_NUM("solve", solve, drift_tol, "steady-check: asserted bound on the relative drift"));
        return k;
    }();
    return keys;
}

#undef RC_NUM
#undef RC_INT
#undef RC_SIZE
#undef RC_LIST

const KeySpec* find_key(std::string_view section, std::string_view name) {
    for (const auto& k : registry())
        if (k.section == section && k.key == name) return &k;
    return nullptr;
}

bool known_section(std::string_view section) {
    return std::any_of(registry().begin(), registry().end(), [&](const KeySpec& k) { return k.section == section; });
}

// ---------------------------------------------------------------------------
// Manufactured states

SpectralField sampled_vector(const Grid& grid, const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f) {
    const int n = grid.n();
    const double h = grid.spacing();
    std::vector<double> values(3 * grid.physical_size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                const auto v = f({i * h, j * h, l * h});
                const std::size_t idx = grid.physical_index(i, j, l);
                for (int c = 0; c < 3; ++c) values[c * grid.physical_size() + idx] = v[c];
            }
    return SpectralField::from_physical(grid, Rank::vector, values);
}

SpectralField director(const Grid& grid, const std::string& profile) {
    if (profile == "helix") return helix_director(grid);
    if (profile == "constant") return sampled_vector(grid, [](const auto&) { return std::array<double, 3>{1.0, 0.0, 0.0}; });
    throw std::invalid_argument("unknown v_profile '" + profile + "' (helix, constant)");
}

double unit_defect(const SpectralField& v) {
    double worst = 0.0;
    for (double m : magnitude(v)) worst = std::max(worst, std::abs(m - 1.0));
    return worst;
}

}  // namespace

// ---------------------------------------------------------------------------

void ManufactureRecipe::validate() const {
    if (!(taylor_green_amp > 0.0 && taylor_green_amp <= 1.0))
        throw std::invalid_argument("manufacture.taylor_green_amp must lie in (0, 1]");
    if (!(gevrey_amplitude > 0.0 && gevrey_amplitude <= 1.0))
        throw std::invalid_argument("manufacture.gevrey_amplitude must lie in (0, 1]");
    if (v_profile != "helix" && v_profile != "constant")
        throw std::invalid_argument("manufacture.v_profile must be helix or constant");
    if (!(v_scale > 0.0)) throw std::invalid_argument("manufacture.v_scale must be positive");
    if (gevrey_decay) {
        if (kind != SystemKind::mhd) throw std::invalid_argument("manufacture.gevrey_decay only applies to mhd");
        if (!(*gevrey_decay > 0.0)) throw std::invalid_argument("manufacture.gevrey_decay must be positive");
    }
    if (!(closure_tol > 0.0)) throw std::invalid_argument("manufacture.closure_tol must be positive");
}

nlohmann::json ManufactureRecipe::to_json() const {
    return {{"kind", kind_name(kind)},
            {"taylor_green_amp", taylor_green_amp},
            {"v_profile", v_profile},
            {"v_scale", v_scale},
            {"gevrey_decay", gevrey_decay ? nlohmann::json(*gevrey_decay) : nlohmann::json(nullptr)},
            {"gevrey_amplitude", gevrey_amplitude},
            {"closure_tol", closure_tol}};
}

PicardConfig SolveSettings::picard(double p) const {
    PicardConfig c;
    c.T = T;
    c.n_times = n_times;
    c.max_iters = max_iters;
    c.tol = tol;
    c.p = p;
    return c;
}

nlohmann::json SolveSettings::to_json() const {
    return {{"T", T},       {"n_times", n_times},           {"max_iters", max_iters},
            {"tol", tol},   {"residual_tol", residual_tol}, {"drift_tol", drift_tol}};
}

Grid Scenario::grid() const { return Grid(n, length); }

void Scenario::propagate() {
    lemmas.p = p;
    lemmas.seed = seed;
    picard.p = p;
    bootstrap.p = p;
}

void Scenario::validate() const {
    if (n < 8 || n % 2) throw std::invalid_argument("grid.n must be even and at least 8");
    if (!(length > 0.0)) throw std::invalid_argument("grid.length must be positive");
    if (!(p > 3.0)) throw std::invalid_argument("norms.p must exceed 3");
    lemmas.validate();
    picard.validate();
    bootstrap.validate();
    gevrey.validate();
    manufacture.validate();
    solve.picard(p).validate();
}

nlohmann::json Scenario::to_json() const {
    // The output directory is left out so that reports do not depend on where they are written.
    return {{"name", name},
            {"kind", kind_name(manufacture.kind)},
            {"suites", suites},
            {"seed", seed},
            {"grid", {{"n", n}, {"length", length}}},
            {"p", p},
            {"lemmas", lemmas.to_json()},
            {"picard", picard.to_json()},
            {"bootstrap", bootstrap.to_json()},
            {"gevrey", gevrey.to_json()},
            {"manufacture", manufacture.to_json()},
            {"solve", solve.to_json()}};
}

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> names{"lemma_suite", "picard_suite", "bootstrap_suite", "gevrey_suite"};
    return names;
}

Scenario parse_scenario(std::string_view text, const std::string& origin) {
    Scenario s;
    std::string section;
    std::set<std::pair<std::string, std::string>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
        ++line_no;
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        const auto hash = raw.find_first_of("#;");
        const std::string_view line = raw.substr(0, hash);
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        const int indent = static_cast<int>(line.find_first_not_of(" \t\r")) + 1;

        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(origin, line_no, indent, "unterminated section header");
            const std::string name(trim(body.substr(1, body.size() - 2)));
            if (!known_section(name)) throw ConfigError(origin, line_no, indent + 1, "unknown section [" + name + "]");
            section = name;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(origin, line_no, indent, "expected 'key = value'");
        const std::string name(trim(line.substr(0, eq)));
        if (name.empty()) throw ConfigError(origin, line_no, indent, "missing key before '='");
        if (section.empty()) throw ConfigError(origin, line_no, indent, "key '" + name + "' appears before any section");
        const KeySpec* spec = find_key(section, name);
        if (!spec) throw ConfigError(origin, line_no, indent, "unknown key '" + name + "' in [" + section + "]");
        if (!seen.insert({section, name}).second)
            throw ConfigError(origin, line_no, indent, "key '" + name + "' repeated in [" + section + "]");

        const std::string_view value = line.substr(eq + 1);
        const auto first = value.find_first_not_of(" \t\r");
        const int value_col = static_cast<int>(eq + 2 + (first == std::string_view::npos ? 0 : first));
        try {
            spec->set(s, value);
        } catch (const BadValue& e) {
            throw ConfigError(origin, line_no, value_col, section + "." + name + ": " + e.what());
        }
    }
    s.propagate();
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin, 0, 0, e.what());
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path.string(), 0, 0, "cannot open file");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

std::string config_reference() {
    const Scenario defaults = [] {
        Scenario s;
        s.propagate();
        return s;
    }();
    std::ostringstream os;
    std::string section;
    for (const auto& k : registry()) {
        if (k.section != section) {
            if (!section.empty()) os << '\n';
            section = k.section;
            os << '[' << section << "]\n";
        }
        const std::string value = k.get(defaults);
        os << "# " << k.doc << '\n' << k.key << " =" << (value.empty() ? "" : " " + value) << '\n';
    }
    return os.str();
}

SystemState generate_manufactured(const Grid& grid, const ManufactureRecipe& recipe, std::uint64_t seed) {
    recipe.validate();
    SystemState target;
    if (recipe.kind == SystemKind::mhd && recipe.gevrey_decay) {
        target = gevrey_steady_target(grid, *recipe.gevrey_decay, recipe.gevrey_amplitude, seed);
    } else {
        target = steady_target(recipe.kind, grid, recipe.taylor_green_amp);
        const auto v = recipe.v_scale * director(grid, recipe.v_profile);
        if (recipe.kind == SystemKind::sel_aux) {
            target.fields[1] = gradient(v);
            target.frozen = v;
        } else if (recipe.kind == SystemKind::harmonic_map) {
            target.fields[0] = v;
        }
    }
    // A tighter unit tolerance than the default: the profiles are exact identities.
    target.validate(1e-10, 1e-14);
    return with_manufactured_forcing(target);
}

std::vector<Task> suite_tasks(const Scenario& scenario) {
    std::vector<Task> tasks;
    const Grid grid = scenario.grid();
    for (const auto& name : known_suites()) {
        if (std::find(scenario.suites.begin(), scenario.suites.end(), name) == scenario.suites.end()) continue;
        if (name == "lemma_suite") {
            tasks.push_back({name, [cfg = scenario.lemmas](Artifacts&) { return lemma_suite(cfg); }});
        } else if (name == "picard_suite") {
            tasks.push_back({name, [grid, cfg = scenario.picard, seed = scenario.seed](Artifacts& art) {
                                 auto rep = picard_suite(grid, cfg, seed);
                                 std::ostringstream trace, sweep;
                                 trace.precision(17);
                                 sweep.precision(17);
                                 trace << "iter,et_norm,increment,ratio\n";
                                 for (const auto& r : rep.details["contraction"]["iterations"])
                                     trace << r["iter"].get<int>() << ',' << r["et_norm"].get<double>() << ','
                                           << r["increment"].get<double>() << ',' << r["ratio"].get<double>() << '\n';
                                 sweep << "amplitude,ratio\n";
                                 const auto& sw = rep.details["sweep"];
                                 for (std::size_t i = 0; i < sw["amplitudes"].size(); ++i)
                                     sweep << sw["amplitudes"][i].get<double>() << ',' << sw["ratios"][i].get<double>()
                                           << '\n';
                                 art["trace.csv"] = trace.str();
                                 art["sweep.csv"] = sweep.str();
                                 return rep;
                             }});
        } else if (name == "bootstrap_suite") {
            tasks.push_back({name, [grid, cfg = scenario.bootstrap, seed = scenario.seed](Artifacts&) {
                                 return bootstrap_suite(grid, cfg, seed);
                             }});
        } else if (name == "gevrey_suite") {
            tasks.push_back({name, [grid, cfg = scenario.gevrey, seed = scenario.seed](Artifacts& art) {
                                 auto rep = gevrey_suite(grid, cfg, seed);
                                 std::ostringstream radius;
                                 radius.precision(17);
                                 radius << "field,shell,k,log_amplitude,used\n";
                                 for (const auto& [field, fit] : rep.details["final_radius"].items())
                                     for (std::size_t i = 0; i < fit["shells"].size(); ++i)
                                         radius << field << ',' << fit["shells"][i].get<int>() << ','
                                                << fit["shell_k"][i].get<double>() << ','
                                                << fit["log_amplitude"][i].get<double>() << ','
                                                << (fit["used"][i].get<bool>() ? 1 : 0) << '\n';
                                 art["radius.csv"] = radius.str();
                                 return rep;
                             }});
        }
    }
    return tasks;
}

RunOutcome run_tasks(const Scenario& scenario, const std::string& command, const std::vector<Task>& tasks,
                     const std::function<void(const std::string&)>& log) {
    using clock = std::chrono::steady_clock;
    RunOutcome out;
    nlohmann::json suites = nlohmann::json::array();
    nlohmann::json timing = nlohmann::json::object();
    nlohmann::json failed = nlohmann::json::array();
    nlohmann::json errors = nlohmann::json::array();
    std::size_t n_checks = 0;
    const auto start = clock::now();
    for (const auto& task : tasks) {
        if (log) log("running " + task.name);
        const auto t0 = clock::now();
        SuiteReport rep;
        try {
            rep = task.run(out.artifacts);
        } catch (const std::exception& e) {
            rep = SuiteReport{};
            rep.error = e.what();
        }
        rep.suite = task.name;
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        timing[task.name] = secs;
        n_checks += rep.checks.size();
        for (const auto& c : rep.checks)
            if (!c.passed) failed.push_back(task.name + "/" + c.name);
        if (!rep.error.empty()) {
            errors.push_back(task.name + ": " + rep.error);
            out.errored = true;
        }
        if (!rep.passed()) out.passed = false;
        if (log) {
            std::ostringstream os;
            os.precision(3);
            os << task.name << ": " << (rep.passed() ? "PASS" : "FAIL") << " (" << rep.checks.size() << " checks, "
               << secs << " s)";
            log(os.str());
        }
        suites.push_back(rep.to_json());
    }
    timing["total"] = std::chrono::duration<double>(clock::now() - start).count();
    out.report = {{"tool", "regcheck"},
                  {"scenario", scenario.to_json()},
                  {"command", command},
                  {"seed", scenario.seed},
                  {"grid", {{"n", scenario.n}, {"length", scenario.length}}},
                  {"suites", suites},
                  {"passed", out.passed},
                  {"summary",
                   {{"suites", tasks.size()}, {"checks", n_checks}, {"failed", failed}, {"errors", errors}}}};
    out.timing = std::move(timing);
    return out;
}

std::string checks_csv(const nlohmann::json& report) {
    std::ostringstream os;
    os << "suite,name,value,relation,threshold,passed\n";
    for (const auto& s : report.at("suites"))
        for (const auto& c : s.at("checks")) {
            const auto& v = c.at("value");
            os << s.at("suite").get<std::string>() << ',' << c.at("name").get<std::string>() << ','
               << (v.is_string() ? v.get<std::string>() : v.dump()) << ',' << c.at("relation").get<std::string>() << ','
               << c.at("threshold").dump() << ',' << (c.at("passed").get<bool>() ? 1 : 0) << '\n';
        }
    return os.str();
}

void write_outcome(const RunOutcome& outcome, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto put = [&](const std::filesystem::path& name, const std::string& content) {
        const auto path = dir / name;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << content;
        if (!os) throw std::runtime_error("write failed for " + path.string());
    };
    put("report.json", outcome.report.dump(2) + "\n");
    put("timing.json", outcome.timing.dump(2) + "\n");
    put("checks.csv", checks_csv(outcome.report));
    for (const auto& [name, content] : outcome.artifacts) put(name, content);
}

// ---------------------------------------------------------------------------
// Commands

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> names{"run",   "check-lemmas", "solve",      "steady-check",
                                                "bootstrap", "gevrey",   "manufacture"};
    return names;
}

std::vector<Task> command_tasks(const Scenario& scenario, const std::string& command,
                                const std::optional<std::filesystem::path>& state_dir,
                                const std::filesystem::path& out_dir) {
    const auto only = [&](const std::string& suite) {
        Scenario s = scenario;
        s.suites = {suite};
        return suite_tasks(s);
    };
    if (command == "run") return suite_tasks(scenario);
    if (command == "check-lemmas") return only("lemma_suite");
    if (command == "bootstrap") return only("bootstrap_suite");
    if (command == "gevrey") return only("gevrey_suite");

    const Grid grid = scenario.grid();
    const auto load = [grid, scenario, state_dir]() {
        if (state_dir) {
            auto s = read_state(*state_dir);
            s.validate();
            return s;
        }
        return generate_manufactured(grid, scenario.manufacture, scenario.seed);
    };
    if (command == "solve") {
        return {{"solve", [load, scenario](Artifacts& art) {
                     const auto data = load();
                     const auto res = picard_solve(data, scenario.solve.picard(scenario.p));
                     SuiteReport rep;
                     rep.details["kind"] = kind_name(data.kind);
                     rep.details["config"] = scenario.solve.to_json();
                     rep.details["trace"] = res.trace.to_json();
                     rep.add(check_true("converged", res.trace.converged));
                     rep.add(check_below("residual", res.trace.residual, scenario.solve.residual_tol));
                     art["trace.csv"] = res.trace.to_csv();
                     return rep;
                 }}};
    }
    if (command == "steady-check") {
        return {{"steady-check", [load, scenario](Artifacts& art) {
                     const auto steady = load();
                     const auto inv = steady_invariance_check(steady, scenario.solve.picard(scenario.p));
                     const auto closure = stationary_residual(steady);
                     SuiteReport rep;
                     rep.details["kind"] = kind_name(steady.kind);
                     rep.details["config"] = scenario.solve.to_json();
                     rep.details["closure"] = closure.to_json();
                     rep.details["invariance"] = inv.to_json();
                     rep.add(check_below("closure", closure.max_l2(), scenario.manufacture.closure_tol));
                     rep.add(check_true("converged", inv.trace.converged));
                     rep.add(check_below("drift", inv.drift, scenario.solve.drift_tol));
                     art["trace.csv"] = inv.trace.to_csv();
                     return rep;
                 }}};
    }
    if (command == "manufacture") {
        return {{"manufacture", [grid, scenario, out_dir](Artifacts& art) {
                     const auto& recipe = scenario.manufacture;
                     const auto state = generate_manufactured(grid, recipe, scenario.seed);
                     const auto closure = stationary_residual(state);
                     SuiteReport rep;
                     rep.details["recipe"] = recipe.to_json();
                     rep.details["closure"] = closure.to_json();
                     rep.add(check_below("closure", closure.max_l2(), recipe.closure_tol));
                     const SpectralField* v = state.kind == SystemKind::harmonic_map ? &state.fields[0]
                                              : state.frozen                         ? &*state.frozen
                                                                                     : nullptr;
                     if (v) rep.add(check_at_most("unit_length", unit_defect(*v), 1e-14));
                     if (recipe.gevrey_decay) {
                         nlohmann::json fits = nlohmann::json::object();
                         std::ostringstream radius;
                         radius << "field,shell,k,log_amplitude,used\n";
                         const auto names = field_names(state.kind);
                         for (std::size_t f = 0; f < state.fields.size(); ++f) {
                             const auto fit = analyticity_radius_fit(state.fields[f]);
                             fits[names[f]] = fit.to_json();
                             rep.add(check_below("radius_" + names[f], relative_change(fit.a, *recipe.gevrey_decay), 0.05));
                             std::istringstream rows(fit.to_csv());
                             std::string row;
                             std::getline(rows, row);  // header
                             while (std::getline(rows, row))
                                 if (!row.starts_with('#')) radius << names[f] << ',' << row << '\n';
                         }
                         rep.details["radius"] = fits;
                         art["radius.csv"] = radius.str();
                     }
                     write_state(out_dir / "state", state,
                                 {{"recipe", recipe.to_json()}, {"seed", scenario.seed},
                                  {"closure_residual", closure.max_l2()}});
                     return rep;
                 }}};
    }
    throw std::invalid_argument("unknown command '" + command + "'");
}

}  // namespace regcheck
