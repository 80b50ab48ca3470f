#include "regcheck/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

namespace regcheck {

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

Grid periodic_grid(int n) { return Grid(n, 2 * std::numbers::pi); }

// Field e of an ensemble. Band limits cycle through 2..6 so the draws differ
// in smoothness as well as shape; odd members are vector fields.
SpectralField ensemble_member(const Grid& g, std::uint64_t seed, int e) {
    Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(e));
    const Rank rank = e % 2 ? Rank::vector : Rank::scalar;
    return random_band_limited(g, rank, 2 + e % 5, rng);
}

// Worst relative defect of an identity over an ensemble, scaled by the input size.
double relative_defect(const SpectralField& lhs, const SpectralField& rhs, double scale) {
    return (lhs - rhs).max_abs_coefficient() / std::max(scale, 1e-300);
}

}  // namespace

void LemmaConfig::validate() const {
    if (!(p > 3.0)) throw std::invalid_argument("LemmaConfig: p must exceed 3");
    if (interpolation_fields < 0 || smoothing_fields < 0 || holder_fields < 0 || algebra_fields < 0)
        throw std::invalid_argument("LemmaConfig: ensemble sizes must be non-negative");
    for (double s : sigmas)
        if (!(s > 1.0)) throw std::invalid_argument("LemmaConfig: every sigma must exceed 1");
    for (int n : {n_coarse, n_fine})
        if (n < 16 || n % 16 != 0) throw std::invalid_argument("LemmaConfig: interpolation grids must be multiples of 16");
    if (!(t_lo > 0.0) || !(t_hi >= t_lo)) throw std::invalid_argument("LemmaConfig: need 0 < t_lo <= t_hi");
    if (holder_pairs < 1 || holder_pair_factor < 2) throw std::invalid_argument("LemmaConfig: bad Holder sampling");
    if (!(oseen_length > 0.0) || oseen_n < 8 || oseen_n_fine < oseen_n || !(oseen_t > 0.0))
        throw std::invalid_argument("LemmaConfig: bad Oseen settings");
    if (algebra_n < 8) throw std::invalid_argument("LemmaConfig: algebra grid too small");
}

nlohmann::json LemmaConfig::to_json() const {
    return {{"p", p},
            {"seed", seed},
            {"interpolation_fields", interpolation_fields},
            {"sigmas", sigmas},
            {"n_coarse", n_coarse},
            {"n_fine", n_fine},
            {"interpolation_refine_tol", interpolation_refine_tol},
            {"smoothing_fields", smoothing_fields},
            {"t_lo", t_lo},
            {"t_hi", t_hi},
            {"smoothing_spread_tol", smoothing_spread_tol},
            {"holder_fields", holder_fields},
            {"holder_pairs", holder_pairs},
            {"holder_pair_factor", holder_pair_factor},
            {"holder_tol", holder_tol},
            {"oseen_length", oseen_length},
            {"oseen_n", oseen_n},
            {"oseen_n_fine", oseen_n_fine},
            {"oseen_t", oseen_t},
            {"oseen_time_tol", oseen_time_tol},
            {"oseen_refine_tol", oseen_refine_tol},
            {"oseen_refine", oseen_refine},
            {"algebra_fields", algebra_fields},
            {"algebra_n", algebra_n},
            {"algebra_tol", algebra_tol}};
}

BallSampling matched_sampling(const Grid& grid) {
    if (grid.n() % 16 != 0) throw std::invalid_argument("matched_sampling: n must be a multiple of 16");
    const double L = grid.length();
    return BallSampling{grid.n() / 16, {L / 16, L / 8, L / 4, L / 2}};
}

SuiteReport interpolation_suite(const LemmaConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "interpolation";
    nlohmann::json per_grid = nlohmann::json::object();
    std::vector<double> constants;
    for (int n : {cfg.n_coarse, cfg.n_fine}) {
        const Grid g = periodic_grid(n);
        const auto bs = matched_sampling(g);
        std::vector<double> per_sigma(cfg.sigmas.size(), 0.0);
        for (int e = 0; e < cfg.interpolation_fields; ++e) {
            const auto f = ensemble_member(g, cfg.seed, e);
            const double base = morrey_norm(f, {2.0, cfg.p}, bs);
            const double sup = linf_norm(f);
            for (std::size_t i = 0; i < cfg.sigmas.size(); ++i) {
                const double s = cfg.sigmas[i];
                const double lhs = morrey_norm(f, {2.0 * s, cfg.p * s}, bs);
                const double rhs = std::pow(base, 1.0 / s) * std::pow(sup, 1.0 - 1.0 / s);
                if (rhs > 0.0) per_sigma[i] = std::max(per_sigma[i], lhs / rhs);
            }
        }
        constants.push_back(max_of(per_sigma));
        per_grid[std::to_string(n)] = {{"fitted_constant", constants.back()}, {"per_sigma", per_sigma}};
    }
    rep.details = {{"fields", cfg.interpolation_fields}, {"sigmas", cfg.sigmas}, {"grids", per_grid}};
    rep.add(check_above("fitted_constant_positive", constants[0], 0.0));
    rep.add(check_below("refinement_change", relative_change(constants[1], constants[0]), cfg.interpolation_refine_tol));
    return rep;
}

SuiteReport smoothing_suite(const LemmaConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "smoothing";
    const Grid g = periodic_grid(cfg.n_coarse);
    const auto bs = BallSampling::dyadic(g);
    const auto ladder = dyadic_times(cfg.t_lo, cfg.t_hi);
    std::vector<double> ratios;
    for (int e = 0; e < cfg.smoothing_fields; ++e) {
        const auto f = ensemble_member(g, cfg.seed + 1, e);
        const double m = morrey_norm(f, {2.0, cfg.p}, bs);
        if (m > 0.0) ratios.push_back(besov_decay_norm(f, cfg.p, ladder) / m);
    }
    const double c = max_of(ratios);
    const double med = ratios.empty() ? 0.0 : median_of(ratios);
    rep.details = {{"fields", cfg.smoothing_fields}, {"times", ladder}, {"fitted_constant", c}, {"median", med}};
    rep.add(check_above("fitted_constant_positive", c, 0.0));
    rep.add(check_below("max_over_median", med > 0.0 ? c / med : INFINITY, cfg.smoothing_spread_tol));
    return rep;
}

SuiteReport holder_suite(const LemmaConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "holder";
    const Grid g = periodic_grid(cfg.n_coarse);
    const auto bs = BallSampling::dyadic(g);
    double c_few = 0.0, c_many = 0.0, exponent = 0.0;
    for (int e = 0; e < cfg.holder_fields; ++e) {
        Rng rng(cfg.seed * 7919ULL + static_cast<std::uint64_t>(e));
        const auto f = random_band_limited(g, Rank::scalar, 3, rng);
        const auto few = holder_seminorm_check(f, cfg.p, cfg.holder_pairs, cfg.seed + e, bs);
        const auto many = holder_seminorm_check(f, cfg.p, cfg.holder_pairs * cfg.holder_pair_factor, cfg.seed + e, bs);
        c_few = std::max(c_few, few.fitted_c);
        c_many = std::max(c_many, many.fitted_c);
        exponent = few.exponent;
    }
    rep.details = {{"fields", cfg.holder_fields},
                   {"pairs", cfg.holder_pairs},
                   {"pairs_refined", cfg.holder_pairs * cfg.holder_pair_factor},
                   {"fitted_constant", c_few},
                   {"fitted_constant_refined", c_many},
                   {"exponent", exponent}};
    rep.add(check_above("fitted_constant_positive", c_few, 0.0));
    rep.add(check_below("pair_refinement_change", relative_change(c_many, c_few), cfg.holder_tol));
    rep.add(check_equal("exponent", exponent, 1.0 - 3.0 / cfg.p));
    return rep;
}

SuiteReport oseen_suite(const LemmaConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "oseen";
    const Grid box(cfg.oseen_n, cfg.oseen_length);
    const auto at_t = oseen_kernel_bound_check(box, cfg.oseen_t, 0);
    const auto at_4t = oseen_kernel_bound_check(box, 4 * cfg.oseen_t, 0);
    rep.details = {{"length", cfg.oseen_length},
                   {"n", cfg.oseen_n},
                   {"t", cfg.oseen_t},
                   {"c_t", at_t.fitted_c},
                   {"c_4t", at_4t.fitted_c},
                   {"argmax_radius_t", at_t.argmax_radius},
                   {"origin_value_t", at_t.origin_value}};
    rep.add(check_true("resolved", !at_t.under_resolved && !at_4t.under_resolved));
    rep.add(check_below("time_change", relative_change(at_4t.fitted_c, at_t.fitted_c), cfg.oseen_time_tol));
    if (cfg.oseen_refine) {
        const auto fine = oseen_kernel_bound_check(Grid(cfg.oseen_n_fine, cfg.oseen_length), cfg.oseen_t, 0);
        rep.details["n_fine"] = cfg.oseen_n_fine;
        rep.details["c_t_fine"] = fine.fitted_c;
        rep.add(check_below("grid_change", relative_change(fine.fitted_c, at_t.fitted_c), cfg.oseen_refine_tol));
    }
    return rep;
}

SuiteReport operator_algebra_suite(const LemmaConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.suite = "operator_algebra";
    const Grid g = periodic_grid(cfg.algebra_n);
    double idem = 0.0, div_free = 0.0, riesz_sum = 0.0, heat = 0.0, gevrey = 0.0;
    for (int e = 0; e < cfg.algebra_fields; ++e) {
        Rng rng(cfg.seed * 104729ULL + static_cast<std::uint64_t>(e));
        const auto v = random_band_limited(g, Rank::vector, 6, rng);
        const auto s = random_band_limited(g, Rank::scalar, 6, rng);
        const double vs = v.max_abs_coefficient(), ss = s.max_abs_coefficient();

        const auto pv = leray_project(v);
        idem = std::max(idem, relative_defect(leray_project(pv), pv, vs));
        div_free = std::max(div_free, divergence(pv).max_abs_coefficient() / gradient(pv).max_abs_coefficient());

        SpectralField sum(g, Rank::scalar);
        for (int i = 0; i < 3; ++i) sum += riesz(riesz(s, i), i);
        riesz_sum = std::max(riesz_sum, relative_defect(sum, -s, ss));

        heat = std::max(heat, relative_defect(heat_semigroup(heat_semigroup(s, 0.1), 0.2), heat_semigroup(s, 0.3), ss));
        const auto joint = gevrey_smooth(s, 0.5);
        gevrey = std::max(gevrey, relative_defect(gevrey_smooth(gevrey_smooth(s, 0.2), 0.3), joint,
                                                  joint.max_abs_coefficient()));
    }
    rep.details = {{"fields", cfg.algebra_fields}, {"n", cfg.algebra_n}};
    rep.add(check_below("leray_idempotent", idem, cfg.algebra_tol));
    rep.add(check_below("divergence_of_projection", div_free, cfg.algebra_tol));
    rep.add(check_below("riesz_square_sum", riesz_sum, cfg.algebra_tol));
    rep.add(check_below("heat_composition", heat, cfg.algebra_tol));
    rep.add(check_below("gevrey_additivity", gevrey, cfg.algebra_tol));
    return rep;
}

SuiteReport lemma_suite(const LemmaConfig& cfg) {
    SuiteReport all;
    all.suite = "lemma_suite";
    for (auto* run : {&operator_algebra_suite, &interpolation_suite, &smoothing_suite, &holder_suite, &oseen_suite}) {
        try {
            all.merge(run(cfg));
        } catch (const std::exception& ex) {
            all.error += std::string(all.error.empty() ? "" : "; ") + ex.what();
        }
    }
    all.details["config"] = cfg.to_json();
    return all;
}

}  // namespace regcheck
