#include "regcheck/suites.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

namespace regcheck {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

nlohmann::json kind_list(const std::vector<SystemKind>& kinds) {
    nlohmann::json j = nlohmann::json::array();
    for (auto k : kinds) j.push_back(kind_name(k));
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Picard

void PicardSuiteConfig::validate() const {
    require_positive(amplitude, "picard.amplitude");
    require_positive(t_max, "picard.t_max");
    require_positive(steady_T, "picard.steady_T");
    if (ensemble < 1) throw std::invalid_argument("picard.ensemble must be >= 1");
    if (sweep.size() < 3) throw std::invalid_argument("picard.sweep needs at least three amplitudes");
    if (sel_n < 8 || sel_n % 2) throw std::invalid_argument("picard.sel_n must be even and >= 8");
    picard(t_max).validate();
}

nlohmann::json PicardSuiteConfig::to_json() const {
    return {{"amplitude", amplitude},
            {"t_max", t_max},
            {"n_times", n_times},
            {"max_iters", max_iters},
            {"tol", tol},
            {"p", p},
            {"ensemble", ensemble},
            {"sweep", sweep},
            {"iteration_limit", iteration_limit},
            {"residual_tol", residual_tol},
            {"ratio_tol", ratio_tol},
            {"sweep_r2_tol", sweep_r2_tol},
            {"sel_n", sel_n},
            {"sel_amplitude", sel_amplitude},
            {"mhd_steady_amplitude", mhd_steady_amplitude},
            {"steady_T", steady_T},
            {"drift_tol", drift_tol}};
}

PicardConfig PicardSuiteConfig::picard(double T) const {
    PicardConfig c;
    c.T = T;
    c.n_times = n_times;
    c.max_iters = max_iters;
    c.tol = tol;
    c.p = p;
    return c;
}

SuiteReport picard_suite(const Grid& grid, const PicardSuiteConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "picard_suite";

    // Contraction at half the estimated existence time.
    const auto data = with_manufactured_forcing(steady_target(SystemKind::mhd, grid, cfg.amplitude));
    const auto est = estimate_horizon(data, cfg.picard(cfg.t_max), cfg.t_max, cfg.ensemble, seed);
    const double T = est.existence.T0 / 2.0;
    const auto solved = picard_solve(data, cfg.picard(T));
    rep.details["horizon"] = est.to_json();
    rep.details["T"] = T;
    rep.details["contraction"] = solved.trace.to_json();
    rep.add(check_true("contraction.converged", solved.trace.converged));
    rep.add(check_at_most("contraction.iterations", static_cast<double>(solved.trace.rows.size()), cfg.iteration_limit));
    rep.add(check_below("contraction.residual", solved.trace.residual, cfg.residual_tol));
    rep.add(check_below("contraction.ratio", solved.trace.max_ratio(), cfg.ratio_tol));

    const auto sweep = amplitude_sweep(SystemKind::mhd, grid, cfg.sweep, cfg.picard(T));
    rep.details["sweep"] = sweep.to_json();
    rep.add(check_above("sweep.r_squared", sweep.r_squared, cfg.sweep_r2_tol));

    // Steady states are fixed points of the evolution.
    const Grid sel_grid(cfg.sel_n, grid.length());
    const auto sel = steady_invariance_check(
        with_manufactured_forcing(steady_target(SystemKind::sel_aux, sel_grid, cfg.sel_amplitude)), cfg.picard(cfg.steady_T));
    const auto mhd = steady_invariance_check(
        with_manufactured_forcing(steady_target(SystemKind::mhd, grid, cfg.mhd_steady_amplitude)), cfg.picard(cfg.steady_T));
    rep.details["invariance"] = {{"sel_aux", sel.to_json()}, {"mhd", mhd.to_json()}};
    rep.add(check_true("invariance.sel_aux.converged", sel.trace.converged));
    rep.add(check_below("invariance.sel_aux.drift", sel.drift, cfg.drift_tol));
    rep.add(check_true("invariance.mhd.converged", mhd.trace.converged));
    rep.add(check_below("invariance.mhd.drift", mhd.drift, cfg.drift_tol));
    rep.details["config"] = cfg.to_json();
    return rep;
}

// ---------------------------------------------------------------------------
// Bootstrap

void BootstrapSuiteConfig::validate() const {
    if (kinds.empty()) throw std::invalid_argument("bootstrap.kinds must not be empty");
    for (auto k : kinds)
        if (k == SystemKind::harmonic_map) throw std::invalid_argument("bootstrap.kinds: harmonic_map has no flow to check");
    require_positive(amplitude, "bootstrap.amplitude");
    BootstrapConfig b;
    b.k = k;
    b.validate();
}

nlohmann::json BootstrapSuiteConfig::to_json() const {
    return {{"kinds", kind_list(kinds)},
            {"amplitude", amplitude},
            {"k", k},
            {"p", p},
            {"residual_tol", residual_tol},
            {"holder_pairs", holder_pairs},
            {"pressure_tol", pressure_tol},
            {"curl_tol", curl_tol}};
}

SuiteReport bootstrap_suite(const Grid& grid, const BootstrapSuiteConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "bootstrap_suite";
    BootstrapConfig bc;
    bc.k = cfg.k;
    bc.p = cfg.p;
    bc.residual_tol = cfg.residual_tol;
    bc.holder_pairs = cfg.holder_pairs;
    bc.seed = seed;
    for (auto kind : cfg.kinds) {
        const std::string name = kind_name(kind);
        const auto state = with_manufactured_forcing(steady_target(kind, grid, cfg.amplitude));
        const auto b = derivative_bootstrap_check(state, bc);
        rep.details[name] = b.to_json();

        double worst = 0.0;
        bool morrey_finite = true, resolved = true;
        for (const auto& o : b.orders) {
            worst = std::max(worst, o.max_residual_l2);
            resolved = resolved && !o.under_resolved;
            for (const auto& f : o.fields)
                for (double m : f.morrey) morrey_finite = morrey_finite && std::isfinite(m);
        }
        const bool holder_finite =
            std::all_of(b.holder_constants.begin(), b.holder_constants.end(), [](double c) { return std::isfinite(c); });
        rep.add(check_true(name + ".passed", b.passed));
        rep.add(check_equal(name + ".top_order", b.orders.empty() ? 0.0 : b.orders.back().order, cfg.k + 2));
        rep.add(check_true(name + ".resolved", resolved));
        rep.add(check_below(name + ".max_residual", worst, cfg.residual_tol));
        rep.add(check_below(name + ".stationary_residual", b.stationary.max_l2(), cfg.residual_tol));
        rep.add(check_true(name + ".morrey_finite", morrey_finite));
        rep.add(check_equal(name + ".holder_orders", static_cast<double>(b.holder_constants.size()), cfg.k + 2));
        rep.add(check_true(name + ".holder_finite", holder_finite));
        if (b.pressure) {
            rep.add(check_below(name + ".pressure_oracle", b.pressure->oracle_defect, cfg.pressure_tol));
            rep.add(check_below(name + ".momentum_curl", b.pressure->curl_defect_l2, cfg.curl_tol));
            rep.add(check_below(name + ".momentum_defect", b.pressure->momentum_defect_l2, cfg.curl_tol));
        }
    }
    rep.details["config"] = cfg.to_json();
    return rep;
}

// ---------------------------------------------------------------------------
// Gevrey

void GevreySuiteConfig::validate() const {
    require_positive(decay, "gevrey.decay");
    require_positive(amplitude, "gevrey.amplitude");
    require_positive(probe_amplitude, "gevrey.probe_amplitude");
    if (ensemble < 1) throw std::invalid_argument("gevrey.ensemble must be >= 1");
    for (double w : probe_widths) require_positive(w, "gevrey.probe_widths entries");
    run(b).validate();
}

nlohmann::json GevreySuiteConfig::to_json() const {
    return {{"b", b},
            {"T0", T0},
            {"decay", decay},
            {"amplitude", amplitude},
            {"n_times", n_times},
            {"ensemble", ensemble},
            {"residual_tol", residual_tol},
            {"drift_tol", drift_tol},
            {"radius_tol", radius_tol},
            {"b1_slack", b1_slack},
            {"probe_widths", probe_widths},
            {"probe_amplitude", probe_amplitude},
            {"bilinear_tol", bilinear_tol},
            {"product_spread_tol", product_spread_tol}};
}

GevreyRunConfig GevreySuiteConfig::run(double width) const {
    GevreyRunConfig r;
    r.b = width;
    r.T0 = T0;
    r.T1 = T0;
    r.picard.n_times = n_times;
    return r;
}

SuiteReport gevrey_suite(const Grid& grid, const GevreySuiteConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "gevrey_suite";

    // Decay rates of constructed fields, before and after an exact shift.
    const auto scalar = gevrey_decay_field(grid, Rank::scalar, cfg.decay, 1.0, seed);
    const auto vec = gevrey_decay_field(grid, Rank::vector, cfg.decay, 1.0, seed + 1, true);
    const auto fit_s = analyticity_radius_fit(scalar);
    const auto fit_v = analyticity_radius_fit(vec);
    const double shift = 0.4 * cfg.decay;
    const auto fit_shift = analyticity_radius_fit(gevrey_smooth(scalar, shift));
    rep.details["radius"] = {{"scalar", fit_s.to_json()}, {"vector", fit_v.to_json()}, {"shifted", fit_shift.to_json()}};
    rep.add(check_below("radius.scalar", relative_change(fit_s.a, cfg.decay), cfg.radius_tol));
    rep.add(check_below("radius.vector", relative_change(fit_v.a, cfg.decay), cfg.radius_tol));
    rep.add(check_below("radius.shifted", relative_change(fit_shift.a, cfg.decay - shift), cfg.radius_tol));

    // Weighted solve from a manufactured steady state with Gevrey forces.
    const auto data = with_manufactured_forcing(gevrey_steady_target(grid, cfg.decay, cfg.amplitude, seed));
    auto run = cfg.run(cfg.b);
    const auto horizon = gevrey_horizon(data, run, cfg.ensemble, seed);
    run.T1 = horizon.T1;
    const auto solve = gevrey_weighted_solve(data, run);
    rep.details["horizon"] = horizon.to_json();
    rep.details["solve"] = solve.to_json();
    rep.add(check_equal("beta", run.beta(), 2.0 * cfg.b / (3.0 * std::sqrt(cfg.T0))));
    rep.add(check_equal("b1", run.b1(), run.beta() * run.T1 / 2.0));
    rep.add(check_true("forces.chain_ordered", solve.forces && solve.forces->monotone));
    rep.add(check_below("forces.bound_reproduced",
                        solve.forces ? relative_change(solve.forces->bound_direct, solve.forces->bound) : INFINITY, 0.1));
    rep.add(check_true("solve.converged", solve.trace.converged));
    rep.add(check_below("solve.residual", solve.trace.residual, cfg.residual_tol));
    rep.add(check_below("solve.drift", solve.drift_from_data, cfg.drift_tol));
    rep.add(check_true("solve.gevrey_norm_b1_finite", std::isfinite(solve.gevrey_norm_b1)));
    const auto& final_state = solve.trajectory.states.back();
    const char* names[] = {"u", "b"};
    nlohmann::json final_fits = nlohmann::json::object();
    for (std::size_t f = 0; f < final_state.size(); ++f) {
        const auto fit = analyticity_radius_fit(final_state[f]);
        final_fits[names[f]] = fit.to_json();
        rep.add(check_at_least(std::string("solve.radius_") + names[f], fit.a, cfg.b1_slack * run.b1()));
    }
    rep.details["final_radius"] = final_fits;

    // Constants of the weighted estimates.
    auto coarse_cfg = run.picard_for(run.T1);
    coarse_cfg.n_times = std::max(2, cfg.n_times / 2);
    auto fine_cfg = coarse_cfg;
    fine_cfg.n_times = coarse_cfg.n_times * 2;
    const auto coarse = fit_weighted_bilinear(grid, run.beta(), coarse_cfg, cfg.ensemble, 1.0, seed + 2);
    const auto fine = fit_weighted_bilinear(grid, run.beta(), fine_cfg, cfg.ensemble, 1.0, seed + 2);
    rep.details["bilinear"] = {{"coarse", coarse.to_json()}, {"fine", fine.to_json()}};
    rep.add(check_below("bilinear.refinement_change", relative_change(fine.c_fit, coarse.c_fit), cfg.bilinear_tol));
    const auto product = weighted_product_bound(grid, run.b1(), 20, 4, seed + 3);
    rep.details["product"] = product.to_json();
    rep.add(check_below("product.max_over_median", product.median > 0.0 ? product.c_fit / product.median : INFINITY,
                        cfg.product_spread_tol));

    // Unforced data: every width on the ladder admits a horizon and a converged solve.
    Rng rng(seed + 4);
    auto unforced = SystemState::zero(SystemKind::mhd, grid);
    for (auto& f : unforced.fields) {
        f = leray_project(random_band_limited(grid, Rank::vector, 3, rng));
        f *= cfg.probe_amplitude / sobolev_norm(f, 1.0);
    }
    nlohmann::json probe = nlohmann::json::array();
    for (double w : cfg.probe_widths) {
        auto pr = cfg.run(w);
        const auto h = gevrey_horizon(unforced, pr, cfg.ensemble, seed);
        pr.T1 = h.T1;
        const auto out = gevrey_weighted_solve(unforced, pr);
        probe.push_back({{"b", w}, {"horizon", h.to_json()}, {"converged", out.trace.converged},
                         {"residual", out.trace.residual}});
        rep.add(check_true("probe.b=" + nlohmann::json(w).dump() + ".converged", out.trace.converged));
    }
    rep.details["probe"] = probe;
    rep.details["config"] = cfg.to_json();
    return rep;
}

}  // namespace regcheck
