#include "regcheck/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regcheck/fft.hpp"
#include "regcheck/random.hpp"

namespace regcheck {

namespace {

constexpr double overflow_exponent = 700.0;
constexpr double overflow_floor = 1e-300;

template <class Multiplier>
SpectralField scale_modes(const SpectralField& f, Multiplier&& m) {
    SpectralField out = f;
    for_each_mode(f.grid(), [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const Complex factor = m(k, idx == 0);
        for (int c = 0; c < out.component_count(); ++c) out.component(c)[idx] *= factor;
    });
    return out;
}

}  // namespace

void MultiplierSpec::validate() const {
    switch (kind) {
        case MultiplierKind::heat:
            if (!(t >= 0.0)) throw std::invalid_argument("heat multiplier requires t >= 0");
            break;
        case MultiplierKind::gevrey:
            if (!(b >= 0.0)) throw std::invalid_argument("gevrey multiplier requires b >= 0");
            if (mode == GevreyMode::sqrt_t && !(t >= 0.0))
                throw std::invalid_argument("gevrey multiplier in sqrt_t mode requires t >= 0");
            break;
        case MultiplierKind::riesz:
            if (axis < 0 || axis > 2) throw std::invalid_argument("riesz axis must be 0, 1 or 2");
            break;
        case MultiplierKind::frac_power:
            if (!std::isfinite(s)) throw std::invalid_argument("fractional power must be finite");
            break;
        default:
            break;
    }
}

SpectralField apply_multiplier(const SpectralField& f, const MultiplierSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case MultiplierKind::heat: return heat_semigroup(f, spec.t);
        case MultiplierKind::leray: return leray_project(f);
        case MultiplierKind::riesz: return riesz(f, spec.axis);
        case MultiplierKind::inv_laplacian: return inv_laplacian(f);
        case MultiplierKind::gevrey: return gevrey_smooth(f, spec.b, spec.t, spec.mode);
        case MultiplierKind::frac_power: return frac_power(f, spec.s);
    }
    throw std::logic_error("apply_multiplier: unknown kind");
}

SpectralField heat_semigroup(const SpectralField& f, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("heat_semigroup: t must be >= 0");
    if (t == 0.0) return f;
    return scale_modes(f, [t](const std::array<double, 3>& k, bool) {
        return Complex(std::exp(-t * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2])), 0.0);
    });
}

SpectralField leray_project(const SpectralField& f) {
    require_rank(f, Rank::vector, "leray_project");
    SpectralField out = f;
    for_each_mode(f.grid(), [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) return;
        const Complex kv = (k[0] * f.component(0)[idx] + k[1] * f.component(1)[idx] + k[2] * f.component(2)[idx]) / k2;
        for (int i = 0; i < 3; ++i) out.component(i)[idx] -= k[i] * kv;
    });
    return out;
}

SpectralField riesz(const SpectralField& f, int axis) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("riesz: axis must be 0, 1 or 2");
    return scale_modes(f, [axis](const std::array<double, 3>& k, bool) {
        const double kn = norm_of(k);
        return kn == 0.0 ? Complex(0.0, 0.0) : Complex(0.0, k[axis] / kn);
    });
}

SpectralField inv_laplacian(const SpectralField& f) {
    return scale_modes(f, [](const std::array<double, 3>& k, bool) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        return k2 == 0.0 ? Complex(0.0, 0.0) : Complex(1.0 / k2, 0.0);
    });
}

SpectralField frac_power(const SpectralField& f, double s) {
    if (!std::isfinite(s)) throw std::invalid_argument("frac_power: s must be finite");
    return scale_modes(f, [s](const std::array<double, 3>& k, bool) {
        const double kn = norm_of(k);
        return kn == 0.0 ? Complex(0.0, 0.0) : Complex(std::pow(kn, s), 0.0);
    });
}

SpectralField gevrey_smooth(const SpectralField& f, double b, double t, GevreyMode mode) {
    if (!(b >= 0.0)) throw std::invalid_argument("gevrey_smooth: b must be >= 0");
    if (mode == GevreyMode::sqrt_t && !(t >= 0.0)) throw std::invalid_argument("gevrey_smooth: t must be >= 0");
    const double width = mode == GevreyMode::fixed ? b : b * std::sqrt(t);
    if (width == 0.0) return f;
    SpectralField out = f;
    for_each_mode(f.grid(), [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const double exponent = width * norm_of(k);
        if (exponent > overflow_exponent) {
            for (int c = 0; c < out.component_count(); ++c)
                if (std::abs(out.component(c)[idx]) > overflow_floor)
                    throw IllPosedRequest("gevrey_smooth: weight exp(" + std::to_string(exponent) +
                                          ") overflows on a nonzero mode");
        }
        const double factor = std::exp(exponent);
        for (int c = 0; c < out.component_count(); ++c) out.component(c)[idx] *= factor;
    });
    return out;
}

SpectralField leray_divergence(const SpectralField& tensor) {
    require_rank(tensor, Rank::tensor, "leray_divergence");
    return leray_project(divergence(tensor));
}

OseenReport oseen_kernel_bound_check(const Grid& grid, double t, std::size_t samples, double sample_radius,
                                     std::uint64_t seed) {
    if (!(t > 0.0)) throw std::invalid_argument("oseen_kernel_bound_check: t must be > 0");
    const double L = grid.length();
    if (sample_radius <= 0.0) sample_radius = 0.375 * L;

    OseenReport rep;
    rep.t = t;
    rep.n = grid.n();
    rep.length = L;
    rep.under_resolved = std::sqrt(t) < 2.0 * grid.spacing();

    // Candidate points by minimal-image distance from the origin.
    const int n = grid.n();
    auto image = [&](int i) { return grid.coordinate(i <= n / 2 ? i : i - n); };
    std::vector<std::size_t> points;
    std::vector<double> radius;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3) {
                const double x = image(i1), y = image(i2), z = image(i3);
                const double r = std::sqrt(x * x + y * y + z * z);
                if (r <= sample_radius + 1e-12 * L) {
                    points.push_back(grid.physical_index(i1, i2, i3));
                    radius.push_back(r);
                }
            }
    std::vector<std::size_t> chosen(points.size());
    std::iota(chosen.begin(), chosen.end(), 0);
    if (samples > 0 && samples < points.size()) {
        // Partial Fisher-Yates on our own generator; slot 0 (the origin) stays.
        Rng rng(seed);
        for (std::size_t i = 1; i < samples; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * (points.size() - i));
            std::swap(chosen[i], chosen[std::min(j, points.size() - 1)]);
        }
        chosen.resize(samples);
    }
    rep.samples_used = chosen.size();

    std::vector<double> peak(chosen.size(), 0.0);
    const double inv_volume = 1.0 / (L * L * L);
    std::vector<Complex> coeffs(grid.spectral_size());
    std::vector<double> kernel(grid.physical_size());
    for (int i = 0; i < 3; ++i)
        for (int m = i; m < 3; ++m)  // symmetric in (i, m)
            for (int l = 0; l < 3; ++l) {
                // Nyquist planes are dropped: their wavenumber-0 convention would
                // leave them undamped by the heat factor.
                for (int i1 = 0; i1 < n; ++i1)
                    for (int i2 = 0; i2 < n; ++i2)
                        for (int i3 = 0; i3 < grid.half(); ++i3) {
                            const std::size_t idx = grid.spectral_index(i1, i2, i3);
                            const auto k = grid.wavevector(i1, i2, i3);
                            const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                            if (k2 == 0.0 || grid.is_nyquist(i1, i2, i3)) {
                                coeffs[idx] = 0.0;
                                continue;
                            }
                            const double proj = (i == m ? 1.0 : 0.0) - k[i] * k[m] / k2;
                            coeffs[idx] = Complex(0.0, std::exp(-t * k2) * proj * k[l] * inv_volume);
                        }
                fft::inverse(grid, coeffs, kernel);
                for (std::size_t s = 0; s < chosen.size(); ++s)
                    peak[s] = std::max(peak[s], std::abs(kernel[points[chosen[s]]]));
            }

    const double st = std::sqrt(t);
    for (std::size_t s = 0; s < chosen.size(); ++s) {
        const double r = radius[chosen[s]];
        const double v = peak[s] * std::pow(st + r, 4);
        if (v > rep.fitted_c) {
            rep.fitted_c = v;
            rep.argmax_radius = r;
        }
        if (r == 0.0) rep.origin_value = peak[s] * t * t;
    }
    return rep;
}

}  // namespace regcheck
