#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "regcheck/picard.hpp"

namespace regcheck {

/// Horizons and widths of the Gevrey-weighted run. beta and b1 are derived,
/// never set: beta = 2b/(3 sqrt(T0)), b1 = beta T1 / 2.
struct GevreyRunConfig {
    double b = 0.5;   // strip width of the forces
    double T0 = 1.0;  // base horizon
    double T1 = 0.5;  // Gevrey horizon, 0 < T1 <= T0
    /// Quadrature, tolerance and iteration limits; its T is replaced by T1.
    PicardConfig picard;

    double beta() const;
    double b1() const;
    PicardConfig picard_for(double T) const;
    void validate() const;
    nlohmann::json to_json() const;
};

/// sup_t ||e^{beta sqrt(t) sqrt(-Lap)} x(t)||_{H^1} of the joint tuple, as a single sup term.
TimeTerms gevrey_terms(double beta);

/// Every link of the force estimate, as squared norms of the pair (f, g) or (F, G).
struct ForceChain {
    double direct = 0.0;         // sup_t ||e^{beta sqrt t sqrt(-Lap)} (f, g)||^2_{H^1}, operator route
    double spectral = 0.0;       // sup_t sum |k|^2 e^{2 beta sqrt t |k|} (|f|^2 + |g|^2), Fourier route
    double potentials = 0.0;     // sum |k|^4 e^{2 beta sqrt T0 |k|} (|F|^2 + |G|^2)
    double exponential = 0.0;    // C4 / (sqrt T0 beta)^4 sum e^{3 sqrt T0 beta |k|} (|F|^2 + |G|^2)
    double bound = 0.0;          // c sum e^{2 b |k|} (|F|^2 + |G|^2), c = C4 / (sqrt T0 beta)^4
    double bound_direct = 0.0;   // c (||F||^2_{G^0_b} + ||G||^2_{G^0_b}) through gevrey_norm
    double rewrite_defect = 0.0; // max_t |e^{-w}(e^{w} div F) - div F| / |div F|, coefficientwise
    bool monotone = false;       // direct <= spectral <= potentials <= exponential, each up to 1e-12
    double c4 = 0.0;             // max_x x^4 e^{-x} = 256 e^{-4}
    nlohmann::json to_json() const;
};

struct PreparedForces {
    /// (f(t), g(t)) on the quadrature nodes of [0, T0]; empty unless requested.
    Trajectory forces;
    ForceChain chain;
};

/// Rewrite f = e^{-beta sqrt t sqrt(-Lap)}(e^{beta sqrt t sqrt(-Lap)} div F) (and g from G)
/// and evaluate the weighted norm chain. Throws IllPosedRequest when a
/// weight overflows on a nonzero coefficient (force outside G^0_b at this grid).
PreparedForces prepare_forces(const SpectralField& F, const SpectralField& G, const GevreyRunConfig& cfg,
                              bool store_trajectory = true);

/// Estimated decay rate of the Fourier coefficients.
struct RadiusFit {
    std::vector<int> shells;
    std::vector<double> shell_k;        // |k| of the largest coefficient in each shell
    std::vector<double> log_amplitude;  // log of that coefficient's magnitude
    std::vector<bool> used;
    double a = 0.0;  // minus the fitted slope: the estimated strip width
    double intercept = 0.0;
    double r_squared = 0.0;
    double k_lo = 0.0, k_hi = 0.0;
    int shells_used = 0;
    bool exponential = false;  // r_squared >= 0.9

    nlohmann::json to_json() const;
    /// shell,k,log_amplitude,used rows, then the fitted parameters as comment lines.
    std::string to_csv() const;
};

/// Least-squares fit of log(max shell amplitude) against |k|. Shells are
/// integer rounds of |m|; the fit uses shells 1 .. floor(2K/3) (K the
/// dealiasing cutoff) whose amplitude exceeds 1e-13 of the field's largest
/// coefficient. Throws std::domain_error with fewer than four such shells.
RadiusFit analyticity_radius_fit(const SpectralField& f);

/// Field whose mode vectors have magnitude amp e^{-a|k|} and seeded random
/// directions and phases; zero mean, truncated to the dealiased cube.
/// Solenoidal vectors are projected before the magnitudes are set.
SpectralField gevrey_decay_field(const Grid& grid, Rank rank, double a, double amp, std::uint64_t seed,
                                 bool solenoidal = false);

/// MHD steady target with Gevrey-decaying u and b, each scaled to H^1 norm amp.
SystemState gevrey_steady_target(const Grid& grid, double a, double amp, std::uint64_t seed);

struct GevreySolve {
    GevreyRunConfig config;
    Trajectory trajectory;
    PicardTrace trace;
    std::optional<ForceChain> forces;
    /// Weighted norm of the solution minus the data held constant, relative to the latter.
    double drift_from_data = 0.0;
    /// ||e^{b1 sqrt(-Lap)} (u, b)(T1)||_{H^1}.
    double gevrey_norm_b1 = 0.0;
    nlohmann::json to_json() const;
};

/// Picard iteration on [0, T1] with increments and residual measured in the weighted norm.
GevreySolve gevrey_weighted_solve(const SystemState& data, const GevreyRunConfig& cfg);

/// Constant in ||B(x,x)||_E <= c T^{1/4} ||x||_E^2 for the weighted norm,
/// fitted over heat-flow trajectories of random band-limited data.
BilinearFit fit_weighted_bilinear(const Grid& grid, double beta, const PicardConfig& cfg, int ensemble,
                                  double amplitude, std::uint64_t seed);

struct GevreyHorizon {
    double T1 = 0.0;
    double beta = 0.0;
    double b1 = 0.0;
    double c_bilinear = 0.0;
    double linear_norm = 0.0;  // weighted norm of the linear part on [0, T1]
    bool clamped = false;      // the condition still held at T0
    nlohmann::json to_json() const;
};

/// Largest T1 in (0, T0] with 4 c T1^{1/4} ||linear part||_E < 1, by bisection
/// to 1e-3 relative, c from fit_weighted_bilinear at horizon T0.
GevreyHorizon gevrey_horizon(const SystemState& data, const GevreyRunConfig& cfg, int ensemble, std::uint64_t seed);

/// Weighted Fourier product law: ||e^{w}(uv)||_{H^{1/2}} <= C ||e^{w} u||_{H^1} ||e^{w} v||_{H^1}.
struct ProductBound {
    double w = 0.0;
    std::vector<double> ratios;
    double c_fit = 0.0;
    double median = 0.0;
    nlohmann::json to_json() const;
};
ProductBound weighted_product_bound(const Grid& grid, double w, int ensemble, int max_mode, std::uint64_t seed);

}  // namespace regcheck
