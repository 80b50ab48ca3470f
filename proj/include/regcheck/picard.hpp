#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "regcheck/norms.hpp"
#include "regcheck/systems.hpp"

namespace regcheck {

/// Horizon and quadrature of the mild-solution solver.
struct PicardConfig {
    double T = 0.1;
    int n_times = 64;  // intervals; n_times + 1 stored times including t = 0
    int max_iters = 50;
    double tol = 1e-10;
    double p = 6.0;
    /// Empty radii means BallSampling::dyadic(grid).
    BallSampling sampling{4, {}};

    void validate() const;
    std::vector<double> times() const;
    BallSampling sampling_for(const Grid& grid) const;
    nlohmann::json to_json() const;
};

struct PicardIteration {
    int iter = 0;
    double et_norm = 0.0;    // E_T norm of the new iterate
    double increment = 0.0;  // E_T norm of new minus previous iterate
    double ratio = 0.0;      // increment / previous increment (0 on the first iteration)
    double max_divergence = 0.0;
};

struct PicardTrace {
    std::vector<PicardIteration> rows;
    bool converged = false;
    bool diverged = false;
    /// E_T norm of Phi(x) - x for the returned trajectory.
    double residual = 0.0;
    std::string message;

    /// Largest ratio over iterations 2.., 0 when there are fewer than two.
    double max_ratio() const;
    std::string to_csv() const;
    nlohmann::json to_json() const;
};

struct PicardResult {
    Trajectory trajectory;
    PicardTrace trace;
};

/// A trajectory norm of the form sum_i sup_t term_i(t, x(t)).
using TimeTerms = std::function<std::vector<double>(double t, std::span<const SpectralField> parts)>;
/// The two E_T terms of the joint magnitude: its M^{2,p} norm and t^{3/(2p)} times its sup.
TimeTerms et_terms(double p, const BallSampling& bs);
double trajectory_norm(const Trajectory& x, const TimeTerms& terms);
/// Norm of the pointwise difference of two trajectories on the same times.
double trajectory_distance(const Trajectory& a, const Trajectory& b, const TimeTerms& terms);

/// t -> e^{t Lap} x0 + int_0^t e^{(t-s) Lap} force ds on the stored times, with
/// the kind-specific force placement (P div F, grad div G or div G). The
/// force is constant in time, so its integral is exact per mode.
Trajectory duhamel_linear(const SystemState& data, const PicardConfig& cfg);

/// int_0^t e^{(t-s) Lap} N(x(s)) ds, N the nonlinear tendency of the kind.
/// Between stored times N is interpolated linearly and integrated exactly
/// against the semigroup (first-order exponential integrator).
Trajectory duhamel_nonlinear(const Trajectory& x, const SystemState& context, const PicardConfig& cfg);

/// Picard iteration x_{n+1} = linear + B(x_n) started from x_0 = 0. Stops when
/// the E_T increment drops below tol, after max_iters, or when the increment
/// grows three iterations in a row (reported as divergence).
PicardResult picard_solve(const SystemState& data, const PicardConfig& cfg);
/// Same iteration with increments, norms and the residual measured in another trajectory norm.
PicardResult picard_solve(const SystemState& data, const PicardConfig& cfg, const TimeTerms& norm);

/// Constants of the smallness condition 4 c_B T^g (c_L |x0| + c_F T |f|) < 1.
struct ExistenceConstants {
    double c_bilinear = 0.0;
    double c_linear = 0.0;
    double c_force = 0.0;
};

struct ExistenceTime {
    double T0 = 0.0;
    bool unbounded = false;  // bound holds for every T; T0 is the clamp value
    bool clamped = false;
    double gamma = 0.0;      // 1/2 - 3/(2p)
    nlohmann::json to_json() const;
};

/// Largest T in (0, t_max] with 4 c_B T^g (c_L D + c_F T G) < 1, by bisection
/// to 1e-6 relative. Throws std::domain_error for non-positive constants.
ExistenceTime existence_time_estimate(double data_norm, double force_norm, const ExistenceConstants& c, double p,
                                      double t_max);

/// Empirical constant in ||B(x,x)||_{E_T} <= c T^g ||x||_{E_T}^2 over random
/// heat-flow trajectories x(t) = e^{t Lap} x0 with band-limited x0.
struct BilinearFit {
    double c_fit = 0.0;
    std::vector<double> samples;
    double T = 0.0;
    int n_times = 0;
    nlohmann::json to_json() const;
};
BilinearFit fit_bilinear_constant(SystemKind kind, const Grid& grid, const PicardConfig& cfg, int ensemble,
                                  double amplitude, std::uint64_t seed);

/// Norms and constants measured on the data themselves at horizon cfg.T.
struct HorizonEstimate {
    double data_norm = 0.0;   // ||x0||_{M^{2,p}}, joint magnitude
    double force_norm = 0.0;  // ||forcing terms||_{M^{2,p}}, joint magnitude
    ExistenceConstants constants;
    BilinearFit bilinear;
    ExistenceTime existence;
    nlohmann::json to_json() const;
};
HorizonEstimate estimate_horizon(const SystemState& data, const PicardConfig& cfg, double t_max, int ensemble,
                                 std::uint64_t seed);

/// Steady-state invariance: solve with the steady state as data and report
/// the E_T distance to the constant-in-time steady trajectory.
struct InvarianceReport {
    double drift = 0.0;           // E_T(x - steady) / E_T(steady), 0 for the zero state
    double absolute_drift = 0.0;  // E_T(x - steady)
    double steady_norm = 0.0;
    PicardTrace trace;
    nlohmann::json to_json() const;
};
InvarianceReport steady_invariance_check(const SystemState& steady, const PicardConfig& cfg,
                                         const SystemState* reference = nullptr);

/// Contraction ratio against amplitude, with a least-squares line through the points.
struct AmplitudeSweep {
    std::vector<double> amplitudes;
    std::vector<double> ratios;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    nlohmann::json to_json() const;
};
AmplitudeSweep amplitude_sweep(SystemKind kind, const Grid& grid, const std::vector<double>& amplitudes,
                               const PicardConfig& cfg);

/// E_T norm of the pointwise difference of two trajectories on the same times.
double et_distance(const Trajectory& a, const Trajectory& b, double p, const BallSampling& bs);

}  // namespace regcheck
