#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "regcheck/norms.hpp"
#include "regcheck/systems.hpp"

namespace regcheck {

/// One equation of the stationary integral formulation X = (-Lap)^{-1}[...].
struct EquationResidual {
    std::string equation;
    double l2 = 0.0;        // RMS norm of X - right side (X on its zero-mean part)
    double h1 = 0.0;        // homogeneous H^1 norm of the same difference
    double force_l2 = 0.0;  // RMS norm of the force contribution (-Lap)^{-1}[P] div F alone
    double scale_l2 = 0.0;  // RMS norm of X
};

struct StationaryResidual {
    std::vector<EquationResidual> equations;
    double max_l2() const;
    double max_h1() const;
    nlohmann::json to_json() const;
};

/// Residuals of the integral form of the stationary system, evaluated without
/// the pressure (the Leray projector removes it):
///   velocity:  U + (-Lap)^{-1} P div N - (-Lap)^{-1} P div F, N the momentum stress
///   sel_aux:   V + (-Lap)^{-1}[div(V (x) U) - |grad V|^2 V - div G] with the frozen V,
///              plus the consistency row Vt - grad V
///   mhd:       B + (-Lap)^{-1}[div(B (x) U) - div(U (x) B) - div G]
///   harmonic_map: V - (-Lap)^{-1}[|grad V|^2 V + div G]
SpectralField integral_residual_field(const SystemState& state, int equation);
StationaryResidual stationary_residual(const SystemState& state);

/// Independent pressure oracle sum_ij R_i R_j (N_ij - F_ij), built from the
/// Riesz transforms one axis at a time.
SpectralField riesz_pressure_oracle(const SystemState& state);

struct PressureReport {
    double oracle_defect = 0.0;        // max coefficient |P - oracle| / max(1e-300, max|P|)
    double oracle_abs_defect = 0.0;    // max coefficient |P - oracle|
    double momentum_defect_l2 = 0.0;   // || -Lap U + div(N - F) + grad P ||
    double curl_defect_l2 = 0.0;       // || curl(-Lap U + div(N - F)) ||
    double pressure_l2 = 0.0;
    nlohmann::json to_json() const;
};

/// P = (-Lap)^{-1} div div (N - F) with the cross-checks above. Throws for harmonic_map.
PressureReport pressure_check(const SystemState& state);

struct BootstrapConfig {
    int k = 2;  // derivatives are checked through order k + 2
    double p = 6.0;
    std::vector<double> sigmas{1.0, 1.5, 2.0};
    double residual_tol = 1e-8;
    /// Spectral energy share above 2K/3 (K the dealiasing cutoff) that marks an order as under-resolved.
    double tail_fraction = 0.1;
    std::size_t holder_pairs = 400;
    std::uint64_t seed = 1;
    BallSampling sampling{4, {}};

    void validate() const;
    nlohmann::json to_json() const;
};

/// Per field, per order: max over |alpha| = m of the measured norms.
struct FieldOrderNorms {
    std::string field;
    std::vector<double> morrey;  // one per sigma, M^{2 sigma, p sigma}
    double linf = 0.0;
    double tail_fraction = 0.0;
};

struct OrderReport {
    int order = 0;
    int multi_indices = 0;
    double max_residual_l2 = 0.0;  // identity residual of d^alpha of the integral form
    double max_residual_h1 = 0.0;
    std::vector<FieldOrderNorms> fields;
    bool under_resolved = false;
};

struct BootstrapReport {
    std::string kind;
    BootstrapConfig config;
    std::vector<OrderReport> orders;
    StationaryResidual stationary;
    /// Present when the system has a momentum equation.
    std::optional<PressureReport> pressure;
    /// Product rule versus direct differentiation of the quadratic stress, |alpha| = 2.
    double leibniz_defect = 0.0;
    /// Double product rule versus direct differentiation of |grad V|^2 V, |alpha| = 2 (sel_aux, harmonic_map).
    std::optional<double> trilinear_defect;
    /// Single constant in M^{2s,ps} <= C M^{2,p}^{1/s} Linf^{1-1/s} over every d^alpha field and sigma.
    double interpolation_constant = 0.0;
    /// Holder constants of d^alpha U, |alpha| <= k + 1 (max over alpha per order).
    std::vector<double> holder_constants;
    double holder_exponent = 0.0;
    bool all_finite = true;
    bool passed = false;
    std::vector<std::string> failures;

    nlohmann::json to_json() const;
};

/// Differentiate the stationary integral formulation: for every alpha with
/// 1 <= |alpha| <= k + 2 the right side is assembled from the product rule
/// applied to the nonlinear terms and compared with d^alpha of the unknowns.
/// Residuals are asserted unless the order is under-resolved.
BootstrapReport derivative_bootstrap_check(const SystemState& state, const BootstrapConfig& cfg);

/// d^alpha of the quadratic stress assembled by the product rule.
SpectralField leibniz_stress(const SystemState& state, const MultiIndex& alpha);
/// d^alpha (|grad V|^2 V) assembled by the double product rule.
SpectralField leibniz_trilinear(const SpectralField& v, const MultiIndex& alpha);

}  // namespace regcheck
