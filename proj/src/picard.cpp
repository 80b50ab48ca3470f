#include "regcheck/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

namespace regcheck {

namespace {

using Parts = std::vector<SpectralField>;

// Per-mode weights of one step of length h for lambda = |k|^2:
//   x(t+h) = e x(t) + a N(t) + b N(t+h) + phi f
// with N linear on the step and f constant.
struct StepWeights {
    std::vector<double> e, a, b, phi;
};

StepWeights step_weights(const Grid& g, double h) {
    StepWeights w;
    const std::size_t m = g.spectral_size();
    w.e.resize(m);
    w.a.resize(m);
    w.b.resize(m);
    w.phi.resize(m);
    for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const double z = h * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        double phi1, phi2;  // (1 - e^{-z})/z and (z - 1 + e^{-z})/z^2
        if (z < 0.1) {
            phi1 = 0.0;
            phi2 = 0.0;
            double term1 = 1.0, term2 = 0.5;  // (-z)^m/(m+1)! and (-z)^m/(m+2)!
            for (int j = 0; j < 14; ++j) {
                phi1 += term1;
                phi2 += term2;
                term1 *= -z / (j + 2);
                term2 *= -z / (j + 3);
            }
        } else {
            const double em1 = std::expm1(-z);
            phi1 = -em1 / z;
            phi2 = (z + em1) / (z * z);
        }
        w.e[idx] = std::exp(-z);
        w.phi[idx] = h * phi1;
        w.b[idx] = h * phi2;
        w.a[idx] = h * (phi1 - phi2);
    });
    return w;
}

// Running sums of sups for a TimeTerms norm.
class SupAccumulator {
public:
    explicit SupAccumulator(const TimeTerms& terms) : terms_(terms) {}
    void add(double t, const Parts& parts) {
        const auto v = terms_(t, parts);
        if (sups_.size() < v.size()) sups_.resize(v.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) sups_[i] = std::max(sups_[i], v[i]);
    }
    double value() const {
        double s = 0.0;
        for (double v : sups_) s += v;
        return s;
    }

private:
    const TimeTerms& terms_;
    std::vector<double> sups_;
};

Parts difference(const Parts& a, const Parts& b) {
    Parts out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Parts zero_parts(SystemKind kind, const Grid& g) { return SystemState::zero(kind, g).fields; }

bool all_zero(const Parts& parts) {
    return std::all_of(parts.begin(), parts.end(), [](const SpectralField& f) { return f.max_abs_coefficient() == 0.0; });
}

Parts tendency(const SystemState& context, const Parts& parts) {
    SystemState s;
    s.kind = context.kind;
    s.fields = parts;
    s.frozen = context.frozen;
    return assemble_nonlinear(s).tendencies(parts[0].grid());
}

// Step through the stored times: x(0) = x0, exact semigroup, exact constant
// force, linearly interpolated nonlinearity. `nonlinear(j)` returns N at time
// j, or nothing when there is no nonlinear part. `sink(j, x)` sees every state.
template <class Nonlinear, class Sink>
void propagate(const Parts& x0, const Parts* force, bool has_nonlinear, Nonlinear&& nonlinear, const PicardConfig& cfg,
               Sink&& sink) {
    const Grid& g = x0[0].grid();
    const double h = cfg.T / cfg.n_times;
    const auto w = step_weights(g, h);
    const std::size_t m = g.spectral_size();

    Parts x = x0;
    sink(0, x);
    Parts n_now, n_next;
    if (has_nonlinear) n_now = nonlinear(0);
    for (int j = 0; j < cfg.n_times; ++j) {
        if (has_nonlinear) n_next = nonlinear(j + 1);
        for (std::size_t f = 0; f < x.size(); ++f)
            for (int c = 0; c < x[f].component_count(); ++c) {
                auto xc = x[f].component(c);
                for (std::size_t i = 0; i < m; ++i) xc[i] *= w.e[i];
                if (has_nonlinear) {
                    auto a = n_now[f].component(c);
                    auto b = n_next[f].component(c);
                    for (std::size_t i = 0; i < m; ++i) xc[i] += w.a[i] * a[i] + w.b[i] * b[i];
                }
                if (force) {
                    auto fc = (*force)[f].component(c);
                    for (std::size_t i = 0; i < m; ++i) xc[i] += w.phi[i] * fc[i];
                }
            }
        sink(j + 1, x);
        if (has_nonlinear) n_now = std::move(n_next);
    }
}

struct MapOutcome {
    Trajectory next;
    double et_norm = 0.0;
    double increment = 0.0;
    double max_divergence = 0.0;
};

// One application of the Picard map Phi(x) = linear + B(x). A null `x`
// stands for the zero trajectory.
MapOutcome picard_map(const Trajectory* x, const SystemState& data, const Parts& force, bool has_force,
                      const PicardConfig& cfg, const TimeTerms& terms, bool store) {
    const auto times = cfg.times();
    SupAccumulator norm(terms), inc(terms);
    MapOutcome out;
    const bool has_nonlinear = x != nullptr;
    propagate(
        data.fields, has_force ? &force : nullptr, has_nonlinear,
        [&](int j) { return tendency(data, x->states[j]); }, cfg,
        [&](int j, const Parts& state) {
            norm.add(times[j], state);
            inc.add(times[j], x ? difference(state, x->states[j]) : state);
            for (std::size_t f = 0; f < state.size(); ++f)
                if (is_solenoidal(data.kind, static_cast<int>(f)))
                    out.max_divergence = std::max(out.max_divergence, divergence(state[f]).max_abs_coefficient());
            if (store) out.next.push(times[j], state);
        });
    out.et_norm = norm.value();
    out.increment = inc.value();
    return out;
}

double et_of_parts_over_time(const Trajectory& traj, const Parts* minus, double p, const BallSampling& bs) {
    const auto terms = et_terms(p, bs);
    SupAccumulator acc(terms);
    for (std::size_t j = 0; j < traj.size(); ++j)
        acc.add(traj.times[j], minus ? difference(traj.states[j], *minus) : traj.states[j]);
    return acc.value();
}

void require_evolution_kind(SystemKind kind) {
    if (kind == SystemKind::harmonic_map)
        throw std::invalid_argument("the Picard solver covers sel_aux, mhd and ns_stationary");
}

double magnitude_norm(const Parts& parts, double p, const BallSampling& bs) {
    return morrey_norm_of_samples(parts[0].grid(), joint_magnitude(parts), MorreyParams{2.0, p}, bs);
}

}  // namespace

void PicardConfig::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("picard: T must be positive and finite");
    if (n_times < 1) throw std::invalid_argument("picard: n_times must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("picard: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("picard: tol must be positive");
    if (!(p > 3.0)) throw std::invalid_argument("picard: the Morrey exponent p must exceed 3");
}

std::vector<double> PicardConfig::times() const {
    std::vector<double> t(n_times + 1);
    for (int j = 0; j <= n_times; ++j) t[j] = T * j / n_times;
    return t;
}

BallSampling PicardConfig::sampling_for(const Grid& grid) const {
    if (!sampling.radii.empty()) {
        sampling.validate(grid);
        return sampling;
    }
    return BallSampling::dyadic(grid, sampling.stride);
}

nlohmann::json PicardConfig::to_json() const {
    return {{"T", T}, {"n_times", n_times}, {"max_iters", max_iters}, {"tol", tol}, {"p", p}};
}

double PicardTrace::max_ratio() const {
    double r = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) r = std::max(r, rows[i].ratio);
    return r;
}

std::string PicardTrace::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "iter,et_norm,increment,ratio\n";
    for (const auto& r : rows) os << r.iter << ',' << r.et_norm << ',' << r.increment << ',' << r.ratio << '\n';
    return os.str();
}

nlohmann::json PicardTrace::to_json() const {
    nlohmann::json it = nlohmann::json::array();
    for (const auto& r : rows)
        it.push_back({{"iter", r.iter},
                      {"et_norm", r.et_norm},
                      {"increment", r.increment},
                      {"ratio", r.ratio},
                      {"max_divergence", r.max_divergence}});
    return {{"iterations", it},
            {"converged", converged},
            {"diverged", diverged},
            {"residual", residual},
            {"max_ratio", max_ratio()},
            {"message", message}};
}

Trajectory duhamel_linear(const SystemState& data, const PicardConfig& cfg) {
    cfg.validate();
    data.validate();
    const auto force = forcing_terms(data);
    const auto times = cfg.times();
    Trajectory out;
    propagate(
        data.fields, &force, false, [](int) { return Parts{}; }, cfg,
        [&](int j, const Parts& x) { out.push(times[j], x); });
    return out;
}

Trajectory duhamel_nonlinear(const Trajectory& x, const SystemState& context, const PicardConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(x.size()) != cfg.n_times + 1)
        throw std::invalid_argument("duhamel_nonlinear: trajectory does not match the quadrature grid");
    const auto times = cfg.times();
    Trajectory out;
    propagate(
        zero_parts(context.kind, x.states[0][0].grid()), nullptr, true,
        [&](int j) { return tendency(context, x.states[j]); }, cfg,
        [&](int j, const Parts& s) { out.push(times[j], s); });
    return out;
}

TimeTerms et_terms(double p, const BallSampling& bs) {
    return [p, bs](double t, std::span<const SpectralField> parts) {
        const auto mag = joint_magnitude(parts);
        const double peak = *std::max_element(mag.begin(), mag.end());
        return std::vector<double>{morrey_norm_of_samples(parts[0].grid(), mag, MorreyParams{2.0, p}, bs),
                                   std::pow(t, 1.5 / p) * peak};
    };
}

double trajectory_norm(const Trajectory& x, const TimeTerms& terms) {
    SupAccumulator acc(terms);
    for (std::size_t j = 0; j < x.size(); ++j) acc.add(x.times[j], x.states[j]);
    return acc.value();
}

double trajectory_distance(const Trajectory& a, const Trajectory& b, const TimeTerms& terms) {
    if (a.size() != b.size()) throw std::invalid_argument("trajectory_distance: trajectories differ in length");
    SupAccumulator acc(terms);
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a.times[j] != b.times[j]) throw std::invalid_argument("trajectory_distance: time grids differ");
        acc.add(a.times[j], difference(a.states[j], b.states[j]));
    }
    return acc.value();
}

PicardResult picard_solve(const SystemState& data, const PicardConfig& cfg) {
    cfg.validate();
    return picard_solve(data, cfg, et_terms(cfg.p, cfg.sampling_for(data.grid())));
}

PicardResult picard_solve(const SystemState& data, const PicardConfig& cfg, const TimeTerms& terms) {
    cfg.validate();
    data.validate();
    require_evolution_kind(data.kind);
    const auto force = forcing_terms(data);
    const bool has_force = !all_zero(force);

    PicardResult result;
    auto& trace = result.trace;
    Trajectory x;
    bool have_x = false;
    double prev_inc = 0.0;
    int growth = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        auto step = picard_map(have_x ? &x : nullptr, data, force, has_force, cfg, terms, true);
        const double ratio = it == 1 ? 0.0 : (prev_inc > 0.0 ? step.increment / prev_inc : 0.0);
        trace.rows.push_back({it, step.et_norm, step.increment, ratio, step.max_divergence});
        x = std::move(step.next);
        have_x = true;
        if (!std::isfinite(step.increment)) {
            trace.diverged = true;
            trace.message = "non-finite increment";
            break;
        }
        if (step.increment < cfg.tol) {
            trace.converged = true;
            trace.message = "increment below tolerance";
            break;
        }
        growth = (it > 1 && step.increment > prev_inc) ? growth + 1 : 0;
        if (growth >= 3) {
            trace.diverged = true;
            trace.message = "increment grew three iterations in a row; T is above the contraction threshold";
            break;
        }
        prev_inc = step.increment;
    }
    if (!trace.converged && !trace.diverged) trace.message = "max_iters reached";
    if (!trace.diverged) trace.residual = picard_map(&x, data, force, has_force, cfg, terms, false).increment;
    else trace.residual = std::numeric_limits<double>::infinity();
    result.trajectory = std::move(x);
    return result;
}

nlohmann::json ExistenceTime::to_json() const {
    return {{"T0", T0}, {"unbounded", unbounded}, {"clamped", clamped}, {"gamma", gamma}};
}

ExistenceTime existence_time_estimate(double data_norm, double force_norm, const ExistenceConstants& c, double p,
                                      double t_max) {
    if (!(p > 3.0)) throw std::invalid_argument("existence_time_estimate: p must exceed 3");
    if (!(t_max > 0.0)) throw std::invalid_argument("existence_time_estimate: t_max must be positive");
    if (!(data_norm >= 0.0) || !(force_norm >= 0.0)) throw std::invalid_argument("existence_time_estimate: norms must be >= 0");
    ExistenceTime out;
    out.gamma = 0.5 - 1.5 / p;
    if (data_norm == 0.0 && force_norm == 0.0) {
        out.unbounded = true;
        out.clamped = true;
        out.T0 = t_max;
        return out;
    }
    if (!(c.c_bilinear > 0.0) || !(c.c_linear > 0.0) || !(c.c_force > 0.0) || !std::isfinite(c.c_bilinear))
        throw std::domain_error("existence_time_estimate: fitted constants must be positive and finite");
    auto lhs = [&](double T) {
        return 4.0 * c.c_bilinear * std::pow(T, out.gamma) * (c.c_linear * data_norm + c.c_force * T * force_norm);
    };
    if (lhs(t_max) < 1.0) {
        out.T0 = t_max;
        out.clamped = true;
        return out;
    }
    double lo = 0.0, hi = t_max;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) < 1.0 ? lo : hi) = mid;
    }
    if (!(lo > 0.0)) throw std::domain_error("existence_time_estimate: no positive T satisfies the bound");
    out.T0 = lo;
    return out;
}

nlohmann::json BilinearFit::to_json() const {
    return {{"c_fit", c_fit}, {"samples", samples}, {"T", T}, {"n_times", n_times}};
}

BilinearFit fit_bilinear_constant(SystemKind kind, const Grid& grid, const PicardConfig& cfg, int ensemble,
                                  double amplitude, std::uint64_t seed) {
    cfg.validate();
    require_evolution_kind(kind);
    if (ensemble < 1) throw std::invalid_argument("fit_bilinear_constant: ensemble must be >= 1");
    if (!(amplitude > 0.0)) throw std::invalid_argument("fit_bilinear_constant: amplitude must be positive");
    const auto bs = cfg.sampling_for(grid);
    SystemState context = SystemState::zero(kind, grid);
    if (kind == SystemKind::sel_aux) context.frozen = helix_director(grid);
    const double gamma = 0.5 - 1.5 / cfg.p;
    const auto times = cfg.times();

    Rng rng(seed);
    BilinearFit fit;
    fit.T = cfg.T;
    fit.n_times = cfg.n_times;
    for (int e = 0; e < ensemble; ++e) {
        Parts x0;
        for (std::size_t f = 0; f < context.fields.size(); ++f) {
            auto r = random_band_limited(grid, context.fields[f].rank(), 4, rng);
            if (is_solenoidal(kind, static_cast<int>(f))) r = leray_project(r);
            x0.push_back(std::move(r));
        }
        const auto mag = joint_magnitude(x0);
        const double peak = *std::max_element(mag.begin(), mag.end());
        for (auto& f : x0) f *= amplitude / peak;
        Trajectory x;
        for (double t : times) {
            Parts s;
            for (const auto& f : x0) s.push_back(heat_semigroup(f, t));
            x.push(t, std::move(s));
        }
        const double nx = et_norm(x, cfg.p, bs);
        const auto bx = duhamel_nonlinear(x, context, cfg);
        const double c = et_norm(bx, cfg.p, bs) / (std::pow(cfg.T, gamma) * nx * nx);
        fit.samples.push_back(c);
        fit.c_fit = std::max(fit.c_fit, c);
    }
    return fit;
}

nlohmann::json HorizonEstimate::to_json() const {
    return {{"data_norm", data_norm},
            {"force_norm", force_norm},
            {"c_linear", constants.c_linear},
            {"c_force", constants.c_force},
            {"c_bilinear", constants.c_bilinear},
            {"bilinear_fit", bilinear.to_json()},
            {"existence_time", existence.to_json()},
            {"label", "fitted constants; one standard instantiation of the smallness condition"}};
}

HorizonEstimate estimate_horizon(const SystemState& data, const PicardConfig& cfg, double t_max, int ensemble,
                                 std::uint64_t seed) {
    cfg.validate();
    data.validate();
    require_evolution_kind(data.kind);
    const Grid& g = data.grid();
    const auto bs = cfg.sampling_for(g);
    HorizonEstimate est;
    const auto force = forcing_terms(data);
    est.data_norm = magnitude_norm(data.fields, cfg.p, bs);
    est.force_norm = magnitude_norm(force, cfg.p, bs);

    SystemState unforced = data;
    unforced.forcing_f.reset();
    unforced.forcing_g.reset();
    est.constants.c_linear = est.data_norm > 0.0 ? et_norm(duhamel_linear(unforced, cfg), cfg.p, bs) / est.data_norm : 1.0;

    SystemState force_only = data;
    force_only.fields = zero_parts(data.kind, g);
    est.constants.c_force =
        est.force_norm > 0.0 ? et_norm(duhamel_linear(force_only, cfg), cfg.p, bs) / (cfg.T * est.force_norm) : 1.0;

    const auto mags = joint_magnitude(data.fields);
    const double peak = *std::max_element(mags.begin(), mags.end());
    est.bilinear = fit_bilinear_constant(data.kind, g, cfg, ensemble, peak > 0.0 ? peak : 1e-3, seed);
    est.constants.c_bilinear = est.bilinear.c_fit;
    est.existence = existence_time_estimate(est.data_norm, est.force_norm, est.constants, cfg.p, t_max);
    return est;
}

nlohmann::json InvarianceReport::to_json() const {
    return {{"drift", drift}, {"absolute_drift", absolute_drift}, {"steady_norm", steady_norm}, {"trace", trace.to_json()}};
}

InvarianceReport steady_invariance_check(const SystemState& steady, const PicardConfig& cfg,
                                         const SystemState* reference) {
    const SystemState& ref = reference ? *reference : steady;
    auto solved = picard_solve(steady, cfg);
    InvarianceReport rep;
    rep.trace = std::move(solved.trace);
    if (rep.trace.diverged) throw std::runtime_error("steady_invariance_check: Picard iteration diverged");
    const auto bs = cfg.sampling_for(steady.grid());
    rep.absolute_drift = et_of_parts_over_time(solved.trajectory, &ref.fields, cfg.p, bs);
    Trajectory constant;
    for (double t : cfg.times()) constant.push(t, ref.fields);
    rep.steady_norm = et_norm(constant, cfg.p, bs);
    rep.drift = rep.steady_norm > 0.0 ? rep.absolute_drift / rep.steady_norm : rep.absolute_drift;
    return rep;
}

nlohmann::json AmplitudeSweep::to_json() const {
    return {{"amplitudes", amplitudes},
            {"ratios", ratios},
            {"slope", slope},
            {"intercept", intercept},
            {"r_squared", r_squared}};
}

AmplitudeSweep amplitude_sweep(SystemKind kind, const Grid& grid, const std::vector<double>& amplitudes,
                               const PicardConfig& cfg) {
    if (amplitudes.size() < 3) throw std::invalid_argument("amplitude_sweep: need at least three amplitudes");
    AmplitudeSweep out;
    for (double a : amplitudes) {
        const auto data = with_manufactured_forcing(steady_target(kind, grid, a));
        const auto res = picard_solve(data, cfg);
        out.amplitudes.push_back(a);
        out.ratios.push_back(res.trace.max_ratio());
    }
    const double n = static_cast<double>(amplitudes.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        sx += out.amplitudes[i];
        sy += out.ratios[i];
        sxx += out.amplitudes[i] * out.amplitudes[i];
        sxy += out.amplitudes[i] * out.ratios[i];
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        const double fit = out.intercept + out.slope * out.amplitudes[i];
        ss_res += (out.ratios[i] - fit) * (out.ratios[i] - fit);
        ss_tot += (out.ratios[i] - sy / n) * (out.ratios[i] - sy / n);
    }
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return out;
}

double et_distance(const Trajectory& a, const Trajectory& b, double p, const BallSampling& bs) {
    return trajectory_distance(a, b, et_terms(p, bs));
}

}  // namespace regcheck
