#include "regcheck/gevrey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

namespace regcheck {

namespace {

using Parts = std::vector<SpectralField>;

constexpr double kExpLimit = 700.0;

// sum over the full lattice of weight(|k|) |c_k|^2 for several fields at once.
// Overflowing weights on nonzero coefficients are refused like gevrey_smooth does.
template <class Weight>
double weighted_sum(std::span<const SpectralField> fields, Weight&& log_weight) {
    if (fields.empty()) return 0.0;
    const Grid& g = fields[0].grid();
    double sum = 0.0;
    for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int i3) {
        double c2 = 0.0;
        for (const auto& f : fields)
            for (int c = 0; c < f.component_count(); ++c) c2 += std::norm(f.component(c)[idx]);
        if (c2 == 0.0) return;
        const double lw = log_weight(norm_of(k));
        if (lw == -std::numeric_limits<double>::infinity()) return;
        if (lw > 2 * kExpLimit)
            throw IllPosedRequest("weighted norm overflows on a nonzero coefficient");
        sum += hermitian_weight(g, i3) * std::exp(lw) * c2;
    });
    if (!std::isfinite(sum)) throw IllPosedRequest("weighted norm is not finite");
    return sum;
}

// e^{-w sqrt(-Lap)}; the inverse of gevrey_smooth, which only takes w >= 0.
SpectralField damp(const SpectralField& f, double w) {
    SpectralField out = f;
    for_each_mode(f.grid(), [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const double m = std::exp(-w * norm_of(k));
        for (int c = 0; c < out.component_count(); ++c) out.component(c)[idx] *= m;
    });
    return out;
}

double log_h1_weight(double k, double w) { return k == 0.0 ? -std::numeric_limits<double>::infinity() : 2 * std::log(k) + 2 * w * k; }

double joint_h1_weighted(std::span<const SpectralField> parts, double w) {
    return std::sqrt(weighted_sum(parts, [w](double k) { return log_h1_weight(k, w); }));
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Parts random_mhd_pair(const Grid& grid, int max_mode, Rng& rng) {
    Parts x;
    for (int f = 0; f < 2; ++f) x.push_back(leray_project(random_band_limited(grid, Rank::vector, max_mode, rng)));
    return x;
}

}  // namespace

double GevreyRunConfig::beta() const { return 2.0 * b / (3.0 * std::sqrt(T0)); }

double GevreyRunConfig::b1() const { return beta() * T1 / 2.0; }

PicardConfig GevreyRunConfig::picard_for(double T) const {
    PicardConfig p = picard;
    p.T = T;
    return p;
}

void GevreyRunConfig::validate() const {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("GevreyRunConfig: b must be positive");
    if (!(T0 > 0.0) || !std::isfinite(T0)) throw std::invalid_argument("GevreyRunConfig: T0 must be positive");
    if (!(T1 > 0.0) || T1 > T0) throw std::invalid_argument("GevreyRunConfig: need 0 < T1 <= T0");
    picard_for(T1).validate();
}

nlohmann::json GevreyRunConfig::to_json() const {
    return {{"b", b}, {"T0", T0}, {"T1", T1}, {"beta", beta()}, {"b1", b1()}, {"picard", picard_for(T1).to_json()}};
}

TimeTerms gevrey_terms(double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("gevrey_terms: beta must be non-negative");
    return [beta](double t, std::span<const SpectralField> parts) {
        return std::vector<double>{joint_h1_weighted(parts, beta * std::sqrt(t))};
    };
}

nlohmann::json ForceChain::to_json() const {
    return {{"direct", direct},
            {"spectral", spectral},
            {"potentials", potentials},
            {"exponential", exponential},
            {"bound", bound},
            {"bound_direct", bound_direct},
            {"rewrite_defect", rewrite_defect},
            {"monotone", monotone},
            {"c4", c4}};
}

PreparedForces prepare_forces(const SpectralField& F, const SpectralField& G, const GevreyRunConfig& cfg,
                              bool store_trajectory) {
    cfg.validate();
    require_rank(F, Rank::tensor, "prepare_forces: F");
    require_rank(G, Rank::tensor, "prepare_forces: G");
    require_same_grid(F, G, "prepare_forces");
    const double beta = cfg.beta();
    const Parts div0{divergence(F), divergence(G)};
    const Parts potentials{F, G};
    const double scale = std::max(div0[0].max_abs_coefficient(), div0[1].max_abs_coefficient());

    PreparedForces out;
    ForceChain& ch = out.chain;
    ch.c4 = 256.0 * std::exp(-4.0);
    for (double t : cfg.picard_for(cfg.T0).times()) {
        const double w = beta * std::sqrt(t);
        Parts lifted, rewritten;
        for (const auto& f : div0) {
            lifted.push_back(gevrey_smooth(f, beta, t, GevreyMode::sqrt_t));
            rewritten.push_back(damp(lifted.back(), w));
        }
        double direct = 0.0;
        for (const auto& f : lifted) direct += std::pow(sobolev_norm(f, 1.0), 2);
        ch.direct = std::max(ch.direct, direct);
        ch.spectral = std::max(ch.spectral, weighted_sum(div0, [w](double k) { return log_h1_weight(k, w); }));
        if (scale > 0.0)
            for (std::size_t i = 0; i < div0.size(); ++i)
                ch.rewrite_defect =
                    std::max(ch.rewrite_defect, (rewritten[i] - div0[i]).max_abs_coefficient() / scale);
        if (store_trajectory) out.forces.push(t, std::move(rewritten));
    }

    const double wT0 = beta * std::sqrt(cfg.T0);
    ch.potentials = weighted_sum(potentials, [wT0](double k) {
        return k == 0.0 ? -std::numeric_limits<double>::infinity() : 4 * std::log(k) + 2 * wT0 * k;
    });
    const double c = ch.c4 / std::pow(wT0, 4);
    ch.exponential = c * weighted_sum(potentials, [wT0](double k) { return 3 * wT0 * k; });
    ch.bound = c * weighted_sum(potentials, [b = cfg.b](double k) { return 2 * b * k; });
    ch.bound_direct = c * (std::pow(gevrey_norm(F, {0.0, cfg.b}), 2) + std::pow(gevrey_norm(G, {0.0, cfg.b}), 2));

    const auto le = [](double a, double b) { return a <= b * (1 + 1e-12) + 1e-300; };
    ch.monotone = le(ch.direct, ch.spectral) && le(ch.spectral, ch.potentials) && le(ch.potentials, ch.exponential);
    for (double v : {ch.direct, ch.spectral, ch.potentials, ch.exponential, ch.bound, ch.bound_direct})
        if (!std::isfinite(v)) throw IllPosedRequest("prepare_forces: force outside G^0_b at this resolution");
    return out;
}

nlohmann::json RadiusFit::to_json() const {
    return {{"shells", shells},
            {"shell_k", shell_k},
            {"log_amplitude", log_amplitude},
            {"used", used},
            {"a", a},
            {"slope", -a},
            {"intercept", intercept},
            {"r_squared", r_squared},
            {"k_lo", k_lo},
            {"k_hi", k_hi},
            {"shells_used", shells_used},
            {"exponential", exponential}};
}

std::string RadiusFit::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "shell,k,log_amplitude,used\n";
    for (std::size_t i = 0; i < shells.size(); ++i)
        os << shells[i] << ',' << shell_k[i] << ',' << log_amplitude[i] << ',' << (used[i] ? 1 : 0) << '\n';
    os << "# a," << a << "\n# intercept," << intercept << "\n# r_squared," << r_squared << "\n# k_lo," << k_lo
       << "\n# k_hi," << k_hi << '\n';
    return os.str();
}

RadiusFit analyticity_radius_fit(const SpectralField& f) {
    const Grid& g = f.grid();
    const double k0 = g.fundamental();
    const int top = (2 * g.dealias_cutoff()) / 3;
    std::vector<double> amp(top + 1, 0.0), kat(top + 1, 0.0);
    double peak = 0.0;
    for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int) {
        double c2 = 0.0;
        for (int c = 0; c < f.component_count(); ++c) c2 += std::norm(f.component(c)[idx]);
        const double a = std::sqrt(c2);
        const double kn = norm_of(k);
        if (kn > 0.0) peak = std::max(peak, a);
        const long s = std::lround(kn / k0);
        if (s < 1 || s > top) return;
        // Ties go to the smaller |k| so the result does not depend on visiting order.
        if (a > amp[s] || (a == amp[s] && a > 0.0 && kn < kat[s])) {
            amp[s] = a;
            kat[s] = kn;
        }
    });

    RadiusFit fit;
    std::vector<double> xs, ys;
    for (int s = 1; s <= top; ++s) {
        if (amp[s] == 0.0) continue;
        const bool use = amp[s] > 1e-13 * peak;
        fit.shells.push_back(s);
        fit.shell_k.push_back(kat[s]);
        fit.log_amplitude.push_back(std::log(amp[s]));
        fit.used.push_back(use);
        if (use) {
            xs.push_back(kat[s]);
            ys.push_back(std::log(amp[s]));
        }
    }
    fit.shells_used = static_cast<int>(xs.size());
    if (fit.shells_used < 4)
        throw std::domain_error("analyticity_radius_fit: fewer than 4 usable shells (" +
                                std::to_string(fit.shells_used) + ")");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    fit.a = -slope;
    fit.intercept = my - slope * mx;
    fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.k_lo = *std::min_element(xs.begin(), xs.end());
    fit.k_hi = *std::max_element(xs.begin(), xs.end());
    fit.exponential = fit.r_squared >= 0.9;
    return fit;
}

SpectralField gevrey_decay_field(const Grid& grid, Rank rank, double a, double amp, std::uint64_t seed,
                                 bool solenoidal) {
    if (!(a >= 0.0)) throw std::invalid_argument("gevrey_decay_field: a must be non-negative");
    if (solenoidal && rank != Rank::vector) throw std::invalid_argument("gevrey_decay_field: solenoidal needs a vector");
    Rng rng(seed);
    SpectralField f = random_grid_field(grid, rank, rng);
    if (solenoidal) f = leray_project(f);
    // Rescale each mode as a whole (a real factor per mode keeps the Hermitian
    // symmetry) so that its magnitude is exactly amp e^{-a|k|}.
    for_each_mode(grid, [&](std::size_t idx, const std::array<double, 3>& k, int) {
        double c2 = 0.0;
        for (int c = 0; c < f.component_count(); ++c) c2 += std::norm(f.component(c)[idx]);
        const double scale = c2 > 0.0 ? amp * std::exp(-a * norm_of(k)) / std::sqrt(c2) : 0.0;
        for (int c = 0; c < f.component_count(); ++c) f.component(c)[idx] *= scale;
    });
    f.dealias();
    f.remove_mean();
    return f;
}

SystemState gevrey_steady_target(const Grid& grid, double a, double amp, std::uint64_t seed) {
    if (!(amp >= 0.0)) throw std::invalid_argument("gevrey_steady_target: amp must be non-negative");
    auto s = SystemState::zero(SystemKind::mhd, grid);
    for (int f = 0; f < 2; ++f) {
        auto v = gevrey_decay_field(grid, Rank::vector, a, 1.0, seed + static_cast<std::uint64_t>(f), true);
        const double h1 = sobolev_norm(v, 1.0);
        if (h1 > 0.0) v *= amp / h1;
        s.fields[f] = std::move(v);
    }
    return s;
}

nlohmann::json GevreySolve::to_json() const {
    nlohmann::json j{{"config", config.to_json()},
                     {"trace", trace.to_json()},
                     {"drift_from_data", drift_from_data},
                     {"gevrey_norm_b1", gevrey_norm_b1}};
    if (forces) j["forces"] = forces->to_json();
    return j;
}

GevreySolve gevrey_weighted_solve(const SystemState& data, const GevreyRunConfig& cfg) {
    cfg.validate();
    if (data.kind != SystemKind::mhd) throw std::invalid_argument("gevrey_weighted_solve: needs an mhd state");
    data.validate();
    const Grid& g = data.grid();
    GevreySolve out;
    out.config = cfg;
    if (data.forcing_f || data.forcing_g) {
        const SpectralField zero(g, Rank::tensor);
        out.forces = prepare_forces(data.forcing_f ? *data.forcing_f : zero, data.forcing_g ? *data.forcing_g : zero,
                                    cfg, false)
                         .chain;
    }
    const auto terms = gevrey_terms(cfg.beta());
    const auto pcfg = cfg.picard_for(cfg.T1);
    auto solved = picard_solve(data, pcfg, terms);
    out.trace = std::move(solved.trace);
    out.trajectory = std::move(solved.trajectory);

    Trajectory constant;
    for (double t : out.trajectory.times) constant.push(t, data.fields);
    const double base = trajectory_norm(constant, terms);
    const double dist = trajectory_distance(out.trajectory, constant, terms);
    out.drift_from_data = base > 0.0 ? dist / base : dist;

    double sq = 0.0;
    for (const auto& f : out.trajectory.states.back()) sq += std::pow(gevrey_norm(f, {1.0, cfg.b1()}), 2);
    out.gevrey_norm_b1 = std::sqrt(sq);
    return out;
}

BilinearFit fit_weighted_bilinear(const Grid& grid, double beta, const PicardConfig& cfg, int ensemble,
                                  double amplitude, std::uint64_t seed) {
    cfg.validate();
    if (ensemble < 1) throw std::invalid_argument("fit_weighted_bilinear: ensemble must be >= 1");
    if (!(amplitude > 0.0)) throw std::invalid_argument("fit_weighted_bilinear: amplitude must be positive");
    const auto terms = gevrey_terms(beta);
    const SystemState context = SystemState::zero(SystemKind::mhd, grid);
    Rng rng(seed);
    BilinearFit fit;
    fit.T = cfg.T;
    fit.n_times = cfg.n_times;
    for (int e = 0; e < ensemble; ++e) {
        auto x0 = random_mhd_pair(grid, 4, rng);
        const double h1 = joint_h1_weighted(x0, 0.0);
        for (auto& f : x0) f *= amplitude / h1;
        Trajectory x;
        for (double t : cfg.times()) {
            Parts s;
            for (const auto& f : x0) s.push_back(heat_semigroup(f, t));
            x.push(t, std::move(s));
        }
        const double nx = trajectory_norm(x, terms);
        const auto bx = duhamel_nonlinear(x, context, cfg);
        const double c = trajectory_norm(bx, terms) / (std::pow(cfg.T, 0.25) * nx * nx);
        fit.samples.push_back(c);
        fit.c_fit = std::max(fit.c_fit, c);
    }
    return fit;
}

nlohmann::json GevreyHorizon::to_json() const {
    return {{"T1", T1},       {"beta", beta},       {"b1", b1},
            {"c_bilinear", c_bilinear}, {"linear_norm", linear_norm}, {"clamped", clamped}};
}

GevreyHorizon gevrey_horizon(const SystemState& data, const GevreyRunConfig& cfg, int ensemble, std::uint64_t seed) {
    GevreyRunConfig base = cfg;
    base.T1 = cfg.T0;
    base.validate();
    if (data.kind != SystemKind::mhd) throw std::invalid_argument("gevrey_horizon: needs an mhd state");
    const double beta = base.beta();
    const auto terms = gevrey_terms(beta);
    GevreyHorizon h;
    h.beta = beta;
    h.c_bilinear = fit_weighted_bilinear(data.grid(), beta, base.picard_for(cfg.T0), ensemble, 1.0, seed).c_fit;
    const auto lin_norm = [&](double T) { return trajectory_norm(duhamel_linear(data, base.picard_for(T)), terms); };
    const auto holds = [&](double T, double& ln) {
        ln = lin_norm(T);
        return 4.0 * h.c_bilinear * std::pow(T, 0.25) * ln < 1.0;
    };
    double ln = 0.0;
    if (holds(cfg.T0, ln)) {
        h.T1 = cfg.T0;
        h.clamped = true;
        h.linear_norm = ln;
    } else {
        double lo = 0.0, hi = cfg.T0, lo_norm = 0.0;
        while (hi - lo > 1e-3 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (holds(mid, ln)) {
                lo = mid;
                lo_norm = ln;
            } else {
                hi = mid;
            }
        }
        if (!(lo > 0.0)) throw std::runtime_error("gevrey_horizon: smallness condition fails on every horizon");
        h.T1 = lo;
        h.linear_norm = lo_norm;
    }
    h.b1 = beta * h.T1 / 2.0;
    return h;
}

nlohmann::json ProductBound::to_json() const {
    return {{"w", w}, {"ratios", ratios}, {"c_fit", c_fit}, {"median", median}};
}

ProductBound weighted_product_bound(const Grid& grid, double w, int ensemble, int max_mode, std::uint64_t seed) {
    if (!(w >= 0.0)) throw std::invalid_argument("weighted_product_bound: w must be non-negative");
    if (ensemble < 1) throw std::invalid_argument("weighted_product_bound: ensemble must be >= 1");
    Rng rng(seed);
    ProductBound pb;
    pb.w = w;
    for (int e = 0; e < ensemble; ++e) {
        const auto u = random_band_limited(grid, Rank::scalar, max_mode, rng);
        const auto v = random_band_limited(grid, Rank::scalar, max_mode, rng);
        const double num = gevrey_norm(pointwise_product(u, v), {0.5, w});
        const double den = gevrey_norm(u, {1.0, w}) * gevrey_norm(v, {1.0, w});
        pb.ratios.push_back(num / den);
    }
    pb.c_fit = *std::max_element(pb.ratios.begin(), pb.ratios.end());
    pb.median = median_of(pb.ratios);
    return pb;
}

}  // namespace regcheck
