#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "regcheck/spectral_field.hpp"

namespace regcheck {

/// Raised when a multiplier would overflow double precision on a nonzero mode.
class IllPosedRequest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MultiplierKind { heat, leray, riesz, inv_laplacian, gevrey, frac_power };

enum class GevreyMode { fixed, sqrt_t };

/// A Fourier multiplier together with its scalar parameters.
struct MultiplierSpec {
    MultiplierKind kind = MultiplierKind::heat;
    double t = 0.0;      // heat time, or the time in sqrt_t Gevrey mode
    double b = 0.0;      // Gevrey width
    double s = 0.0;      // fractional power
    int axis = 0;        // Riesz axis
    GevreyMode mode = GevreyMode::fixed;

    void validate() const;
};

/// Apply any multiplier from the family below.
SpectralField apply_multiplier(const SpectralField& f, const MultiplierSpec& spec);

/// e^{t Delta}: every mode scaled by e^{-t|k|^2}. Rejects t < 0.
SpectralField heat_semigroup(const SpectralField& f, double t);

/// Leray projector Id - k k^T/|k|^2 on a vector field; the zero mode passes through.
SpectralField leray_project(const SpectralField& f);

/// Riesz transform R_i with multiplier i k_i/|k|; the zero mode is set to 0.
SpectralField riesz(const SpectralField& f, int axis);

/// (-Delta)^{-1}: multiplier 1/|k|^2, zero mode set to 0.
SpectralField inv_laplacian(const SpectralField& f);

/// (-Delta)^{s/2}: multiplier |k|^s, zero mode set to 0.
SpectralField frac_power(const SpectralField& f, double s);

/// e^{b sqrt(-Delta)} (fixed) or e^{b sqrt(t) sqrt(-Delta)} (sqrt_t).
/// Throws IllPosedRequest when the exponent exceeds 700 on a coefficient
/// above 1e-300.
SpectralField gevrey_smooth(const SpectralField& f, double b, double t = 0.0, GevreyMode mode = GevreyMode::fixed);

/// Leray projection of the divergence of a tensor, P div A, in one pass.
SpectralField leray_divergence(const SpectralField& tensor);

/// Outcome of the kernel bound fit for e^{t Delta} P div.
struct OseenReport {
    double t = 0.0;
    int n = 0;
    double length = 0.0;
    /// max |K(t,x)| (sqrt(t) + |x|)^4 over the samples, all 27 components.
    double fitted_c = 0.0;
    /// max_components |K(t,0)| t^2; the bound at the origin reads origin_value <= fitted_c.
    double origin_value = 0.0;
    /// |x| at which the maximum was attained.
    double argmax_radius = 0.0;
    std::size_t samples_used = 0;
    /// True when sqrt(t) < 2 h; the value is then reported but not meaningful.
    bool under_resolved = false;
};

/// Evaluate the kernel K_{iml}(t, x) of e^{t Delta} P div on the grid and fit
/// the constant in |K| <= c/(sqrt(t) + |x|)^4.
///
/// Samples are grid points with minimal-image distance |x| <= sample_radius
/// (default 3L/8, clear of the periodic images). When `samples` is smaller
/// than the number of such points a seeded subset is used; the origin is
/// always included.
OseenReport oseen_kernel_bound_check(const Grid& grid, double t, std::size_t samples, double sample_radius = -1.0,
                                     std::uint64_t seed = 1);

}  // namespace regcheck
