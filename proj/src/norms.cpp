#include "regcheck/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "regcheck/fft.hpp"
#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

namespace regcheck {

// ---------------------------------------------------------------------------
// Parameters

void MorreyParams::validate(bool allow_r_one) const {
    const bool r_ok = allow_r_one ? r >= 1.0 : r > 1.0;
    if (!r_ok || !(r < p) || !std::isfinite(p))
        throw std::invalid_argument("MorreyParams: need 1 < r < p < inf (r = " + std::to_string(r) +
                                    ", p = " + std::to_string(p) + ")");
}

BallSampling BallSampling::dyadic(const Grid& grid, int stride, int min_radii) {
    const double lo = 2.0 * grid.spacing(), hi = 0.5 * grid.length();
    BallSampling bs;
    bs.stride = stride;
    const int dyadic_count = static_cast<int>(std::floor(std::log2(hi / lo) + 1e-9)) + 1;
    if (dyadic_count >= min_radii) {
        for (int j = 0; j < dyadic_count; ++j) bs.radii.push_back(lo * std::ldexp(1.0, j));
        bs.radii.back() = std::min(bs.radii.back(), hi);
        if (bs.radii.back() < hi) bs.radii.push_back(hi);
    } else {
        // Coarse grids: keep both ends and shrink the ratio.
        for (int j = 0; j < min_radii; ++j)
            bs.radii.push_back(lo * std::pow(hi / lo, static_cast<double>(j) / (min_radii - 1)));
        bs.radii.back() = hi;
    }
    return bs;
}

BallSampling BallSampling::geometric(const Grid& grid, int count, int stride) {
    if (count < 2) throw std::invalid_argument("BallSampling::geometric: need at least two radii");
    const double lo = 2.0 * grid.spacing(), hi = 0.5 * grid.length();
    BallSampling bs;
    bs.stride = stride;
    for (int j = 0; j < count; ++j) bs.radii.push_back(lo * std::pow(hi / lo, static_cast<double>(j) / (count - 1)));
    bs.radii.back() = hi;
    return bs;
}

void BallSampling::validate(const Grid& grid) const {
    if (stride < 1 || grid.n() % stride != 0)
        throw std::invalid_argument("BallSampling: stride must divide n");
    if (radii.size() < 4) throw std::invalid_argument("BallSampling: at least 4 radii required");
    const double tol = 1e-9 * grid.spacing();
    for (double r : radii)
        if (r < 2.0 * grid.spacing() - tol || r > 0.5 * grid.length() + tol)
            throw std::invalid_argument("BallSampling: radii must lie in [2h, L/2]");
}

nlohmann::json BallSampling::to_json() const {
    return {{"center_stride", stride}, {"radii", radii}};
}

// ---------------------------------------------------------------------------
// Ball stencils

namespace {

struct Stencil {
    std::vector<Complex> spectrum;  // forward transform of the indicator, times n^3
    double count = 0.0;
};

std::shared_ptr<const Stencil> ball_stencil(const Grid& grid, double radius) {
    static std::mutex mutex;
    static std::map<std::tuple<int, double, double>, std::shared_ptr<const Stencil>> cache;
    const auto key = std::make_tuple(grid.n(), grid.length(), radius);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const int n = grid.n();
    const double h = grid.spacing();
    const double limit = radius + 1e-9 * h;
    std::vector<double> indicator(grid.physical_size(), 0.0);
    double count = 0.0;
    auto offset = [n, h](int j) { return h * (j <= n / 2 ? j : j - n); };
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3) {
                const double x = offset(i1), y = offset(i2), z = offset(i3);
                if (x * x + y * y + z * z <= limit * limit) {
                    indicator[grid.physical_index(i1, i2, i3)] = 1.0;
                    count += 1.0;
                }
            }
    auto s = std::make_shared<Stencil>();
    s->spectrum.resize(grid.spectral_size());
    fft::forward(grid, indicator, s->spectrum);
    const double scale = static_cast<double>(grid.physical_size());
    for (auto& v : s->spectrum) v *= scale;
    s->count = count;
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(s)).first->second;
}

}  // namespace

MorreyProfile morrey_profile(const Grid& grid, std::span<const double> magnitude, const MorreyParams& mp,
                             const BallSampling& bs) {
    mp.validate(true);
    bs.validate(grid);
    if (magnitude.size() != grid.physical_size()) throw std::invalid_argument("morrey: sample count mismatch");

    MorreyProfile out;
    out.radii = bs.radii;
    std::vector<double> powered(magnitude.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
        if (magnitude[i] < 0.0) throw std::invalid_argument("morrey: magnitudes must be nonnegative");
        peak = std::max(peak, magnitude[i]);
    }
    if (peak == 0.0) {
        out.values.assign(bs.radii.size(), 0.0);
        return out;
    }
    // Scale by the peak so |f|^r stays representable for large r.
    for (std::size_t i = 0; i < magnitude.size(); ++i) powered[i] = std::pow(magnitude[i] / peak, mp.r);

    std::vector<Complex> g_hat(grid.spectral_size());
    fft::forward(grid, powered, g_hat);
    std::vector<Complex> product(grid.spectral_size());
    std::vector<double> sums(grid.physical_size());
    const int n = grid.n();
    for (double radius : bs.radii) {
        const auto stencil = ball_stencil(grid, radius);
        for (std::size_t i = 0; i < product.size(); ++i) product[i] = g_hat[i] * stencil->spectrum[i];
        fft::inverse(grid, product, sums);
        double best = 0.0;
        for (int i1 = 0; i1 < n; i1 += bs.stride)
            for (int i2 = 0; i2 < n; i2 += bs.stride)
                for (int i3 = 0; i3 < n; i3 += bs.stride)
                    best = std::max(best, sums[grid.physical_index(i1, i2, i3)]);
        const double mean = std::max(best, 0.0) / stencil->count;
        const double value = std::pow(radius, 3.0 / mp.p) * peak * std::pow(mean, 1.0 / mp.r);
        out.values.push_back(value);
        out.norm = std::max(out.norm, value);
    }
    return out;
}

double morrey_norm_of_samples(const Grid& grid, std::span<const double> magnitude, const MorreyParams& mp,
                              const BallSampling& bs) {
    return morrey_profile(grid, magnitude, mp, bs).norm;
}

double morrey_norm(const SpectralField& f, const MorreyParams& mp, const BallSampling& bs) {
    const auto mag = magnitude(f);
    return morrey_norm_of_samples(f.grid(), mag, mp, bs);
}

// ---------------------------------------------------------------------------
// Spectral norms

double sobolev_norm(const SpectralField& f, double s) {
    double sum = 0.0;
    for_each_mode(f.grid(), [&](std::size_t idx, const std::array<double, 3>& k, int i3) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) return;
        const double w = hermitian_weight(f.grid(), i3) * std::pow(k2, s);
        for (int c = 0; c < f.component_count(); ++c) sum += w * std::norm(f.component(c)[idx]);
    });
    return std::sqrt(sum);
}

double linf_norm(const SpectralField& f) {
    const auto mag = magnitude(f);
    return *std::max_element(mag.begin(), mag.end());
}

std::vector<double> dyadic_times(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("dyadic_times: need 0 < lo <= hi");
    std::vector<double> out;
    for (int j = static_cast<int>(std::ceil(std::log2(lo) - 1e-12)); std::ldexp(1.0, j) <= hi * (1 + 1e-12); ++j)
        out.push_back(std::ldexp(1.0, j));
    return out;
}

double besov_decay_norm(const SpectralField& f, double p, std::span<const double> t_ladder) {
    if (t_ladder.empty()) throw std::invalid_argument("besov_decay_norm: empty time ladder");
    double best = 0.0;
    for (double t : t_ladder) best = std::max(best, std::pow(t, 1.5 / p) * linf_norm(heat_semigroup(f, t)));
    return best;
}

double gevrey_norm(const SpectralField& f, const GevreyParams& gp) {
    return sobolev_norm(gevrey_smooth(f, gp.b), gp.s);
}

// ---------------------------------------------------------------------------
// Point evaluation

PointEvaluator::PointEvaluator(const SpectralField& f, double drop_below)
    : grid_(f.grid()), components_(f.component_count()) {
    const double floor = drop_below * f.max_abs_coefficient();
    const int n = grid_.n();
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < grid_.half(); ++i3) {
                Mode mode;
                mode.m = grid_.frequencies(i1, i2, i3);
                bool keep = false;
                for (int c = 0; c < components_; ++c) {
                    const Complex v = f.at(c, i1, i2, i3);
                    mode.weighted.push_back(hermitian_weight(grid_, i3) * v);
                    if (std::abs(v) > floor && v != Complex(0.0, 0.0)) keep = true;
                }
                if (!keep) continue;
                for (int a = 0; a < 3; ++a) max_m_ = std::max(max_m_, std::abs(mode.m[a]));
                modes_.push_back(std::move(mode));
            }
}

double PointEvaluator::operator()(int c, const std::array<double, 3>& x) const {
    const int n = grid_.n();
    const int width = 2 * max_m_ + 1;
    // Phase tables e^{i m k0 x_a} for |m| <= max_m; the Nyquist index uses the real cosine.
    std::array<std::vector<Complex>, 3> table;
    for (int a = 0; a < 3; ++a) {
        table[a].resize(width);
        const Complex step = std::polar(1.0, grid_.fundamental() * x[a]);
        table[a][max_m_] = 1.0;
        Complex up = 1.0;
        for (int m = 1; m <= max_m_; ++m) {
            up *= step;
            table[a][max_m_ + m] = up;
            table[a][max_m_ - m] = std::conj(up);
        }
        if (max_m_ == n / 2) table[a][0] = Complex(table[a][0].real(), 0.0);
    }
    double sum = 0.0;
    for (const auto& mode : modes_) {
        const Complex phase =
            table[0][mode.m[0] + max_m_] * table[1][mode.m[1] + max_m_] * table[2][mode.m[2] + max_m_];
        sum += (mode.weighted[c] * phase).real();
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Holder check

nlohmann::json HolderReport::to_json() const {
    return {{"exponent", exponent},
            {"fitted_c", fitted_c},
            {"gradient_morrey_r1", gradient_morrey},
            {"argmax_distance", argmax_distance},
            {"pairs", pairs},
            {"constant_field", constant_field}};
}

HolderReport holder_seminorm_check(const SpectralField& f, double p, std::size_t pairs, std::uint64_t seed,
                                   const BallSampling& bs) {
    if (!(p > 3.0)) throw std::invalid_argument("holder_seminorm_check: p must exceed 3");
    if (pairs == 0) throw std::invalid_argument("holder_seminorm_check: need at least one pair");
    HolderReport rep;
    rep.exponent = 1.0 - 3.0 / p;
    rep.pairs = pairs;

    const Grid& grid = f.grid();
    if (f.rank() == Rank::tensor) throw std::invalid_argument("holder_seminorm_check: scalar or vector field expected");
    const auto grad = gradient(f);
    if (grad.max_abs_coefficient() == 0.0) {
        rep.constant_field = true;
        return rep;
    }
    rep.gradient_morrey = morrey_norm(grad, MorreyParams{1.0, p}, bs);
    if (rep.gradient_morrey == 0.0) {
        rep.constant_field = true;
        return rep;
    }

    // Coefficients below 1e-12 of the largest are round-off of sampled (and
    // possibly differentiated) fields. Dropping them changes point values by
    // far less than the pair sampling resolves, and keeps evaluation cheap.
    const PointEvaluator eval(f, 1e-12);
    const int nc = f.component_count();
    const double L = grid.length();
    auto distance = [L](const std::array<double, 3>& x, const std::array<double, 3>& y) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
            double d = std::fmod(std::abs(x[a] - y[a]), L);
            d = std::min(d, L - d);
            s += d * d;
        }
        return std::sqrt(s);
    };
    auto ratio = [&](const std::array<double, 3>& x, const std::array<double, 3>& y) {
        const double d = distance(x, y);
        if (d < 1e-9 * L) return 0.0;
        double diff = 0.0;
        for (int c = 0; c < nc; ++c) {
            const double v = eval(c, x) - eval(c, y);
            diff += v * v;
        }
        return std::sqrt(diff) / (rep.gradient_morrey * std::pow(d, rep.exponent));
    };

    struct Pair {
        std::array<double, 3> x, y;
        double value;
    };
    Rng rng(seed);
    const double d_lo = 0.5 * grid.spacing(), d_hi = 0.5 * L;
    constexpr std::size_t keep = 8;
    std::vector<Pair> best;
    for (std::size_t i = 0; i < pairs; ++i) {
        Pair pr;
        for (int a = 0; a < 3; ++a) pr.x[a] = rng.uniform(0.0, L);
        std::array<double, 3> dir{rng.normal(), rng.normal(), rng.normal()};
        const double dn = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
        const double rho = d_lo * std::pow(d_hi / d_lo, rng.uniform());
        for (int a = 0; a < 3; ++a) pr.y[a] = pr.x[a] + rho * dir[a] / dn;
        pr.value = ratio(pr.x, pr.y);
        best.push_back(pr);
        std::sort(best.begin(), best.end(), [](const Pair& a, const Pair& b) { return a.value > b.value; });
        if (best.size() > keep) best.pop_back();
    }

    // Compass search in the six coordinates of (x, y) from each retained pair.
    for (auto& pr : best) {
        double step = 0.25 * std::max(distance(pr.x, pr.y), grid.spacing());
        for (int iter = 0; iter < 400 && step > 1e-7 * L; ++iter) {
            bool improved = false;
            for (int coord = 0; coord < 6 && !improved; ++coord)
                for (double sign : {1.0, -1.0}) {
                    Pair trial = pr;
                    (coord < 3 ? trial.x[coord] : trial.y[coord - 3]) += sign * step;
                    if (distance(trial.x, trial.y) > d_hi) continue;
                    trial.value = ratio(trial.x, trial.y);
                    if (trial.value > pr.value) {
                        pr = trial;
                        improved = true;
                        break;
                    }
                }
            if (!improved) step *= 0.5;
        }
        if (pr.value > rep.fitted_c) {
            rep.fitted_c = pr.value;
            rep.argmax_distance = distance(pr.x, pr.y);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// E_T norm

std::vector<double> joint_magnitude(std::span<const SpectralField> parts) {
    if (parts.empty()) throw std::invalid_argument("joint_magnitude: no fields");
    std::vector<double> out(parts[0].grid().physical_size(), 0.0);
    for (const auto& f : parts) {
        if (!(f.grid() == parts[0].grid())) throw std::invalid_argument("joint_magnitude: grid mismatch");
        for (int c = 0; c < f.component_count(); ++c) {
            const auto v = f.component_to_physical(c);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i] * v[i];
        }
    }
    for (auto& v : out) v = std::sqrt(v);
    return out;
}

double et_norm(const Trajectory& trajectory, double p, const BallSampling& bs) {
    if (trajectory.size() < 2) throw std::invalid_argument("et_norm: trajectory needs at least two time samples");
    double sup_morrey = 0.0, sup_linf = 0.0;
    for (std::size_t j = 0; j < trajectory.size(); ++j) {
        const auto& parts = trajectory.states[j];
        const auto mag = joint_magnitude(parts);
        sup_morrey = std::max(sup_morrey, morrey_norm_of_samples(parts[0].grid(), mag, MorreyParams{2.0, p}, bs));
        const double peak = *std::max_element(mag.begin(), mag.end());
        sup_linf = std::max(sup_linf, std::pow(trajectory.times[j], 1.5 / p) * peak);
    }
    return sup_morrey + sup_linf;
}

nlohmann::json NormReport::to_json() const {
    return {{"norm_name", norm_name},
            {"params", params},
            {"value", value},
            {"sampling", sampling},
            {"grid", {{"n", grid.n()}, {"length", grid.length()}}}};
}

}  // namespace regcheck
