#include "regcheck/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "regcheck/operators.hpp"

namespace regcheck {

namespace {

double l2(const SpectralField& f) { return std::sqrt(f.energy()); }

SpectralField zero_mean(SpectralField f) {
    f.remove_mean();
    return f;
}

// Physical samples of the truncated derivatives d^gamma f for every |gamma| up to a maximum order.
class DerivativeCache {
public:
    DerivativeCache(const SpectralField& f, int max_order) : grid_(f.grid()), components_(f.component_count()) {
        SpectralField t = f;
        t.dealias();
        for (int m = 0; m <= max_order; ++m)
            for (const auto& g : MultiIndex::of_order(m)) samples_.emplace(g.exponents, derivative(t, g).to_physical());
    }

    std::span<const double> operator()(const MultiIndex& g, int c) const {
        const auto& v = samples_.at(g.exponents);
        const std::size_t n = grid_.physical_size();
        return {v.data() + c * n, n};
    }
    int components() const { return components_; }

private:
    Grid grid_;
    int components_;
    std::map<std::array<int, 3>, std::vector<double>> samples_;
};

SpectralField to_field(const Grid& grid, Rank rank, const std::vector<double>& samples) {
    auto f = SpectralField::from_physical(grid, rank, samples);
    f.dealias();
    return f;
}

// d^alpha (a (x) b), (a (x) b)_ij = a_i b_j.
SpectralField leibniz_outer(const Grid& grid, const DerivativeCache& a, const DerivativeCache& b,
                            const MultiIndex& alpha) {
    const std::size_t n = grid.physical_size();
    std::vector<double> out(9 * n, 0.0);
    for (const auto& beta : MultiIndex::below(alpha)) {
        const double w = binomial(alpha, beta);
        const auto rest = alpha - beta;
        for (int i = 0; i < 3; ++i) {
            const auto ai = a(beta, i);
            for (int j = 0; j < 3; ++j) {
                const auto bj = b(rest, j);
                double* o = out.data() + tensor_component(i, j) * n;
                for (std::size_t x = 0; x < n; ++x) o[x] += w * ai[x] * bj[x];
            }
        }
    }
    return to_field(grid, Rank::tensor, out);
}

// d^alpha (A . B), (A . B)_ij = sum_k A_ik B_jk.
SpectralField leibniz_rows(const Grid& grid, const DerivativeCache& a, const DerivativeCache& b,
                           const MultiIndex& alpha) {
    const std::size_t n = grid.physical_size();
    std::vector<double> out(9 * n, 0.0);
    for (const auto& beta : MultiIndex::below(alpha)) {
        const double w = binomial(alpha, beta);
        const auto rest = alpha - beta;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double* o = out.data() + tensor_component(i, j) * n;
                for (int k = 0; k < 3; ++k) {
                    const auto aik = a(beta, tensor_component(i, k));
                    const auto bjk = b(rest, tensor_component(j, k));
                    for (std::size_t x = 0; x < n; ++x) o[x] += w * aik[x] * bjk[x];
                }
            }
    }
    return to_field(grid, Rank::tensor, out);
}

// d^alpha (|A|^2 v) by expanding d^beta |A|^2 once more.
SpectralField leibniz_cubic(const Grid& grid, const DerivativeCache& a, const DerivativeCache& v,
                            const MultiIndex& alpha) {
    const std::size_t n = grid.physical_size();
    std::vector<double> out(3 * n, 0.0), sq(n);
    for (const auto& beta : MultiIndex::below(alpha)) {
        std::fill(sq.begin(), sq.end(), 0.0);
        for (const auto& gamma : MultiIndex::below(beta)) {
            const double w = binomial(beta, gamma);
            const auto rest = beta - gamma;
            for (int c = 0; c < 9; ++c) {
                const auto p = a(gamma, c), q = a(rest, c);
                for (std::size_t x = 0; x < n; ++x) sq[x] += w * p[x] * q[x];
            }
        }
        const double w = binomial(alpha, beta);
        const auto rest = alpha - beta;
        for (int l = 0; l < 3; ++l) {
            const auto vl = v(rest, l);
            double* o = out.data() + l * n;
            for (std::size_t x = 0; x < n; ++x) o[x] += w * sq[x] * vl[x];
        }
    }
    return to_field(grid, Rank::vector, out);
}

const SpectralField& director(const SystemState& s) {
    return s.kind == SystemKind::sel_aux ? *s.frozen : s.fields.at(0);
}

// Unknowns of the stationary system whose derivatives are bootstrapped.
std::vector<std::pair<std::string, const SpectralField*>> stationary_unknowns(const SystemState& s) {
    switch (s.kind) {
        case SystemKind::sel_aux: return {{"u", &s.fields[0]}, {"V", &*s.frozen}};
        case SystemKind::mhd: return {{"u", &s.fields[0]}, {"b", &s.fields[1]}};
        case SystemKind::ns_stationary: return {{"u", &s.fields[0]}};
        case SystemKind::harmonic_map: return {{"V", &s.fields[0]}};
    }
    return {};
}

bool has_momentum(SystemKind k) { return k != SystemKind::harmonic_map; }

void require_state(const SystemState& s) {
    if (s.kind == SystemKind::sel_aux && !s.frozen)
        throw std::invalid_argument("sel_aux needs the frozen director V");
    s.validate();
}

// Spectral energy of modes with max |m_i| above two thirds of the dealiasing cutoff, and the total.
std::pair<double, double> tail_energy(const SpectralField& f) {
    const Grid& g = f.grid();
    const double cut = 2.0 * g.dealias_cutoff() / 3.0;
    const double k0 = g.fundamental();
    double tail = 0.0, total = 0.0;
    for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int i3) {
        const double m = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])}) / k0;
        const double w = hermitian_weight(g, i3);
        double e = 0.0;
        for (int c = 0; c < f.component_count(); ++c) e += std::norm(f.component(c)[idx]);
        total += w * e;
        if (m > cut) tail += w * e;
    });
    return {tail, total};
}

}  // namespace

double StationaryResidual::max_l2() const {
    double m = 0.0;
    for (const auto& e : equations) m = std::max(m, e.l2);
    return m;
}

double StationaryResidual::max_h1() const {
    double m = 0.0;
    for (const auto& e : equations) m = std::max(m, e.h1);
    return m;
}

nlohmann::json StationaryResidual::to_json() const {
    auto j = nlohmann::json::array();
    for (const auto& e : equations)
        j.push_back({{"equation", e.equation}, {"l2", e.l2}, {"h1", e.h1}, {"force_l2", e.force_l2},
                     {"scale_l2", e.scale_l2}});
    return j;
}

SpectralField integral_residual_field(const SystemState& state, int equation) {
    require_state(state);
    const auto& f = state.fields;
    auto div_force = [](const std::optional<SpectralField>& t) -> std::optional<SpectralField> {
        if (!t) return std::nullopt;
        return divergence(*t);
    };
    if (equation == 0 && has_momentum(state.kind)) {
        SpectralField r = zero_mean(f[0]) + inv_laplacian(leray_divergence(momentum_stress(state)));
        if (state.forcing_f) r -= inv_laplacian(leray_divergence(*state.forcing_f));
        return r;
    }
    switch (state.kind) {
        case SystemKind::sel_aux: {
            const auto& v = *state.frozen;
            if (equation == 1) {
                SpectralField rhs = squared_norm_times(gradient(v), v) - divergence(outer(v, f[0]));
                if (auto g = div_force(state.forcing_g)) rhs += *g;
                return zero_mean(v) - inv_laplacian(rhs);
            }
            if (equation == 2) return f[1] - gradient(v);
            break;
        }
        case SystemKind::mhd:
            if (equation == 1) {
                SpectralField rhs = divergence(outer(f[0], f[1])) - divergence(outer(f[1], f[0]));
                if (auto g = div_force(state.forcing_g)) rhs += *g;
                return zero_mean(f[1]) - inv_laplacian(rhs);
            }
            break;
        case SystemKind::harmonic_map:
            if (equation == 0) {
                SpectralField rhs = squared_norm_times(gradient(f[0]), f[0]);
                if (auto g = div_force(state.forcing_g)) rhs += *g;
                return zero_mean(f[0]) - inv_laplacian(rhs);
            }
            break;
        case SystemKind::ns_stationary: break;
    }
    throw std::out_of_range("integral_residual_field: no equation " + std::to_string(equation) + " for " +
                            kind_name(state.kind));
}

StationaryResidual stationary_residual(const SystemState& state) {
    require_state(state);
    StationaryResidual out;
    auto add = [&](const std::string& name, int eq, const SpectralField& x, const std::optional<SpectralField>& force,
                   bool projected) {
        EquationResidual e;
        e.equation = name;
        const auto r = integral_residual_field(state, eq);
        e.l2 = l2(r);
        e.h1 = sobolev_norm(r, 1.0);
        e.scale_l2 = l2(x);
        if (force) e.force_l2 = l2(inv_laplacian(projected ? leray_divergence(*force) : divergence(*force)));
        out.equations.push_back(e);
    };
    switch (state.kind) {
        case SystemKind::sel_aux:
            add("u", 0, state.fields[0], state.forcing_f, true);
            add("V", 1, *state.frozen, state.forcing_g, false);
            add("Vt", 2, state.fields[1], std::nullopt, false);
            break;
        case SystemKind::mhd:
            add("u", 0, state.fields[0], state.forcing_f, true);
            add("b", 1, state.fields[1], state.forcing_g, false);
            break;
        case SystemKind::ns_stationary: add("u", 0, state.fields[0], state.forcing_f, true); break;
        case SystemKind::harmonic_map: add("V", 0, state.fields[0], state.forcing_g, false); break;
    }
    return out;
}

SpectralField riesz_pressure_oracle(const SystemState& state) {
    SpectralField n = momentum_stress(state);
    if (state.forcing_f) n -= *state.forcing_f;
    SpectralField p(state.grid(), Rank::scalar);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p += riesz(riesz(n.scalar_component(tensor_component(i, j)), j), i);
    return p;
}

nlohmann::json PressureReport::to_json() const {
    return {{"oracle_defect", oracle_defect},
            {"oracle_abs_defect", oracle_abs_defect},
            {"momentum_defect_l2", momentum_defect_l2},
            {"curl_defect_l2", curl_defect_l2},
            {"pressure_l2", pressure_l2}};
}

PressureReport pressure_check(const SystemState& state) {
    require_state(state);
    if (!has_momentum(state.kind)) throw std::invalid_argument("pressure_check: harmonic_map has no pressure");
    PressureReport rep;
    const auto p = momentum_pressure(state);
    const auto oracle = riesz_pressure_oracle(state);
    rep.oracle_abs_defect = (p - oracle).max_abs_coefficient();
    rep.oracle_defect = rep.oracle_abs_defect / std::max(1e-300, p.max_abs_coefficient());
    if (p.max_abs_coefficient() == 0.0 && rep.oracle_abs_defect == 0.0) rep.oracle_defect = 0.0;
    SpectralField n = momentum_stress(state);
    if (state.forcing_f) n -= *state.forcing_f;
    const SpectralField bare = divergence(n) - laplacian(state.fields[0]);
    rep.curl_defect_l2 = l2(curl(bare));
    rep.momentum_defect_l2 = l2(bare + gradient(p));
    rep.pressure_l2 = l2(p);
    return rep;
}

void BootstrapConfig::validate() const {
    if (k < 0 || k > 4) throw std::invalid_argument("bootstrap: k must lie in [0, 4]");
    if (!(p > 3.0)) throw std::invalid_argument("bootstrap: p must exceed 3");
    if (sigmas.empty()) throw std::invalid_argument("bootstrap: empty sigma ladder");
    for (double s : sigmas)
        if (!(s >= 1.0)) throw std::invalid_argument("bootstrap: sigma must be at least 1");
    if (!(residual_tol > 0.0)) throw std::invalid_argument("bootstrap: residual_tol must be positive");
    if (holder_pairs == 0) throw std::invalid_argument("bootstrap: holder_pairs must be positive");
}

nlohmann::json BootstrapConfig::to_json() const {
    return {{"k", k},
            {"p", p},
            {"sigmas", sigmas},
            {"residual_tol", residual_tol},
            {"tail_fraction", tail_fraction},
            {"holder_pairs", holder_pairs},
            {"seed", seed},
            {"sampling", sampling.to_json()}};
}

nlohmann::json BootstrapReport::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["config"] = config.to_json();
    nlohmann::json ord = nlohmann::json::object();
    for (const auto& o : orders) {
        nlohmann::json e;
        e["multi_indices"] = o.multi_indices;
        e["max_residual_l2"] = o.max_residual_l2;
        e["max_residual_h1"] = o.max_residual_h1;
        e["under_resolved"] = o.under_resolved;
        nlohmann::json fields = nlohmann::json::object();
        for (const auto& f : o.fields) {
            nlohmann::json by_sigma = nlohmann::json::object();
            for (std::size_t s = 0; s < f.morrey.size(); ++s) {
                char key[32];
                std::snprintf(key, sizeof key, "%g", config.sigmas[s]);
                by_sigma[key] = f.morrey[s];
            }
            fields[f.field] = {{"morrey", by_sigma}, {"linf", f.linf}, {"tail_fraction", f.tail_fraction}};
        }
        e["fields"] = fields;
        ord[std::to_string(o.order)] = e;
    }
    j["orders"] = ord;
    j["stationary"] = stationary.to_json();
    j["pressure"] = pressure ? pressure->to_json() : nlohmann::json(nullptr);
    j["leibniz_defect"] = leibniz_defect;
    j["trilinear_defect"] = trilinear_defect ? nlohmann::json(*trilinear_defect) : nlohmann::json(nullptr);
    j["interpolation_constant"] = interpolation_constant;
    j["holder"] = {{"exponent", holder_exponent}, {"constants_by_order", holder_constants}};
    j["all_finite"] = all_finite;
    j["passed"] = passed;
    j["failures"] = failures;
    return j;
}

SpectralField leibniz_stress(const SystemState& state, const MultiIndex& alpha) {
    const Grid& g = state.grid();
    const int m = alpha.order();
    switch (state.kind) {
        case SystemKind::sel_aux: {
            const DerivativeCache u(state.fields[0], m), a(gradient(*state.frozen), m);
            return leibniz_outer(g, u, u, alpha) + leibniz_rows(g, a, a, alpha);
        }
        case SystemKind::mhd: {
            const DerivativeCache u(state.fields[0], m), b(state.fields[1], m);
            return leibniz_outer(g, u, u, alpha) - leibniz_outer(g, b, b, alpha);
        }
        case SystemKind::ns_stationary: {
            const DerivativeCache u(state.fields[0], m);
            return leibniz_outer(g, u, u, alpha);
        }
        case SystemKind::harmonic_map: break;
    }
    throw std::invalid_argument("leibniz_stress: harmonic_map has no momentum stress");
}

SpectralField leibniz_trilinear(const SpectralField& v, const MultiIndex& alpha) {
    require_rank(v, Rank::vector, "leibniz_trilinear");
    const int m = alpha.order();
    const DerivativeCache a(gradient(v), m), vc(v, m);
    return leibniz_cubic(v.grid(), a, vc, alpha);
}

BootstrapReport derivative_bootstrap_check(const SystemState& state, const BootstrapConfig& cfg) {
    cfg.validate();
    require_state(state);
    BootstrapReport rep;
    rep.kind = kind_name(state.kind);
    rep.config = cfg;
    const Grid& grid = state.grid();
    const BallSampling bs = cfg.sampling.radii.empty() ? BallSampling::dyadic(grid, cfg.sampling.stride) : cfg.sampling;
    const int top = cfg.k + 2;
    const auto& f = state.fields;

    rep.stationary = stationary_residual(state);
    if (has_momentum(state.kind)) rep.pressure = pressure_check(state);

    // Derivative samples shared by every multi-index.
    std::optional<DerivativeCache> cu, cb, cv, cgv;
    if (has_momentum(state.kind)) cu.emplace(f[0], top);
    if (state.kind == SystemKind::mhd) cb.emplace(f[1], top);
    if (state.kind == SystemKind::sel_aux || state.kind == SystemKind::harmonic_map) {
        const auto& v = director(state);
        cv.emplace(v, top);
        cgv.emplace(gradient(v), top);
    }
    const auto div_f = state.forcing_f ? std::optional(divergence(*state.forcing_f)) : std::nullopt;
    const auto div_g = state.forcing_g ? std::optional(divergence(*state.forcing_g)) : std::nullopt;

    auto stress = [&](const MultiIndex& a) {
        switch (state.kind) {
            case SystemKind::sel_aux: return leibniz_outer(grid, *cu, *cu, a) + leibniz_rows(grid, *cgv, *cgv, a);
            case SystemKind::mhd: return leibniz_outer(grid, *cu, *cu, a) - leibniz_outer(grid, *cb, *cb, a);
            default: return leibniz_outer(grid, *cu, *cu, a);
        }
    };

    // Identity residuals of d^alpha of every equation, as (field, residual) pairs.
    auto residuals = [&](const MultiIndex& a) {
        std::vector<std::pair<SpectralField, SpectralField>> out;
        if (has_momentum(state.kind)) {
            const auto du = derivative(f[0], a);
            SpectralField rhs = -inv_laplacian(leray_divergence(stress(a)));
            if (div_f) rhs += inv_laplacian(leray_project(derivative(*div_f, a)));
            out.emplace_back(du, du - rhs);
        }
        switch (state.kind) {
            case SystemKind::sel_aux: {
                const auto dv = derivative(*state.frozen, a);
                SpectralField rhs = leibniz_cubic(grid, *cgv, *cv, a) - divergence(leibniz_outer(grid, *cv, *cu, a));
                if (div_g) rhs += derivative(*div_g, a);
                out.emplace_back(dv, dv - inv_laplacian(rhs));
                break;
            }
            case SystemKind::mhd: {
                const auto db = derivative(f[1], a);
                SpectralField rhs =
                    divergence(leibniz_outer(grid, *cu, *cb, a)) - divergence(leibniz_outer(grid, *cb, *cu, a));
                if (div_g) rhs += derivative(*div_g, a);
                out.emplace_back(db, db - inv_laplacian(rhs));
                break;
            }
            case SystemKind::harmonic_map: {
                const auto dv = derivative(f[0], a);
                SpectralField rhs = leibniz_cubic(grid, *cgv, *cv, a);
                if (div_g) rhs += derivative(*div_g, a);
                out.emplace_back(dv, dv - inv_laplacian(rhs));
                break;
            }
            case SystemKind::ns_stationary: break;
        }
        return out;
    };

    const auto unknowns = stationary_unknowns(state);
    auto finite = [&](double x) {
        if (!std::isfinite(x)) rep.all_finite = false;
        return x;
    };

    for (int m = 1; m <= top; ++m) {
        OrderReport o;
        o.order = m;
        const auto alphas = MultiIndex::of_order(m);
        o.multi_indices = static_cast<int>(alphas.size());
        // Summed over alpha, so that derivatives which vanish identically (pure round-off) carry no weight.
        std::vector<std::pair<double, double>> tails(unknowns.size(), {0.0, 0.0});
        for (const auto& [name, _] : unknowns) {
            FieldOrderNorms fn;
            fn.field = name;
            fn.morrey.assign(cfg.sigmas.size(), 0.0);
            o.fields.push_back(fn);
        }
        for (const auto& a : alphas) {
            const auto res = residuals(a);
            for (std::size_t e = 0; e < res.size(); ++e) {
                const auto& [dx, r] = res[e];
                const double scale = std::max(1.0, l2(dx));
                o.max_residual_l2 = std::max(o.max_residual_l2, finite(l2(r)) / scale);
                o.max_residual_h1 = std::max(o.max_residual_h1, finite(sobolev_norm(r, 1.0)) / scale);
                auto& fn = o.fields[e];
                const auto [tail, total] = tail_energy(dx);
                tails[e].first += tail;
                tails[e].second += total;
                const double base = morrey_norm(dx, MorreyParams{2.0, cfg.p}, bs);
                const double sup = linf_norm(dx);
                fn.linf = std::max(fn.linf, finite(sup));
                for (std::size_t s = 0; s < cfg.sigmas.size(); ++s) {
                    const double sg = cfg.sigmas[s];
                    const double v = sg == 1.0 ? base : morrey_norm(dx, MorreyParams{2.0 * sg, cfg.p * sg}, bs);
                    fn.morrey[s] = std::max(fn.morrey[s], finite(v));
                    if (sg > 1.0 && base > 0.0 && sup > 0.0)
                        rep.interpolation_constant = std::max(
                            rep.interpolation_constant, v / (std::pow(base, 1.0 / sg) * std::pow(sup, 1.0 - 1.0 / sg)));
                }
            }
        }
        for (std::size_t e = 0; e < o.fields.size(); ++e) {
            auto& fn = o.fields[e];
            fn.tail_fraction = tails[e].second > 0.0 ? tails[e].first / tails[e].second : 0.0;
            o.under_resolved = o.under_resolved || fn.tail_fraction > cfg.tail_fraction;
        }
        if (!o.under_resolved && o.max_residual_l2 >= cfg.residual_tol)
            rep.failures.push_back("order " + std::to_string(m) + " identity residual " +
                                   std::to_string(o.max_residual_l2));
        rep.orders.push_back(std::move(o));
    }

    // Two assembly paths of the second derivatives of the nonlinear terms.
    for (const auto& a : MultiIndex::of_order(2)) {
        if (has_momentum(state.kind)) {
            const auto direct = derivative(momentum_stress(state), a);
            rep.leibniz_defect =
                std::max(rep.leibniz_defect, l2(stress(a) - direct) / std::max(1.0, l2(direct)));
        }
        if (cv) {
            const auto& v = director(state);
            const auto direct = derivative(squared_norm_times(gradient(v), v), a);
            rep.trilinear_defect = std::max(rep.trilinear_defect.value_or(0.0),
                                            l2(leibniz_cubic(grid, *cgv, *cv, a) - direct) / std::max(1.0, l2(direct)));
        }
    }

    // Holder continuity of d^alpha of the first unknown.
    rep.holder_exponent = 1.0 - 3.0 / cfg.p;
    const SpectralField& x0 = *unknowns.front().second;
    for (int m = 0; m <= cfg.k + 1; ++m) {
        double c = 0.0;
        for (const auto& a : MultiIndex::of_order(m)) {
            const auto h = holder_seminorm_check(derivative(x0, a), cfg.p, cfg.holder_pairs, cfg.seed, bs);
            c = std::max(c, finite(h.fitted_c));
        }
        rep.holder_constants.push_back(c);
    }

    finite(rep.interpolation_constant);
    if (rep.stationary.max_l2() >= cfg.residual_tol)
        rep.failures.push_back("stationary residual " + std::to_string(rep.stationary.max_l2()));
    if (rep.leibniz_defect >= 1e-10) rep.failures.push_back("product rule defect " + std::to_string(rep.leibniz_defect));
    if (rep.trilinear_defect && *rep.trilinear_defect >= 1e-9)
        rep.failures.push_back("trilinear defect " + std::to_string(*rep.trilinear_defect));
    if (!rep.all_finite) rep.failures.push_back("non-finite norm");
    rep.passed = rep.failures.empty();
    return rep;
}

}  // namespace regcheck
