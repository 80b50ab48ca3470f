#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "regcheck/bootstrap.hpp"
#include "regcheck/checks.hpp"
#include "regcheck/gevrey.hpp"
#include "regcheck/picard.hpp"

namespace regcheck {

/// Mild-solution checks: contraction on small Taylor-Green data at half the
/// estimated existence time, the amplitude sweep, and steady invariance.
struct PicardSuiteConfig {
    double amplitude = 1e-3;
    double t_max = 1.0;
    int n_times = 64;
    int max_iters = 50;
    double tol = 1e-10;
    double p = 6.0;
    int ensemble = 4;
    std::vector<double> sweep{1e-3, 2e-3, 4e-3, 8e-3};
    int iteration_limit = 10;
    double residual_tol = 1e-9;
    double ratio_tol = 0.5;
    double sweep_r2_tol = 0.95;

    int sel_n = 16;
    double sel_amplitude = 0.1;
    double mhd_steady_amplitude = 1e-2;
    double steady_T = 0.2;
    double drift_tol = 1e-6;

    void validate() const;
    nlohmann::json to_json() const;
    PicardConfig picard(double T) const;
};

SuiteReport picard_suite(const Grid& grid, const PicardSuiteConfig& cfg, std::uint64_t seed);

/// Derivative bootstrap and pressure reconstruction on manufactured states.
struct BootstrapSuiteConfig {
    std::vector<SystemKind> kinds{SystemKind::mhd, SystemKind::sel_aux, SystemKind::ns_stationary};
    double amplitude = 0.5;
    int k = 2;
    double p = 6.0;
    double residual_tol = 1e-8;
    std::size_t holder_pairs = 400;
    double pressure_tol = 1e-10;
    double curl_tol = 1e-9;

    void validate() const;
    nlohmann::json to_json() const;
};

SuiteReport bootstrap_suite(const Grid& grid, const BootstrapSuiteConfig& cfg, std::uint64_t seed);

/// Gevrey-weighted solve, force chain, radius recovery and the strip-width ladder.
struct GevreySuiteConfig {
    double b = 0.5;
    double T0 = 1.0;
    double decay = 0.5;       // strip width of the manufactured steady state
    double amplitude = 0.05;  // H^1 size of each field of that state
    int n_times = 32;
    int ensemble = 3;
    double residual_tol = 1e-8;
    double drift_tol = 1e-5;
    double radius_tol = 0.05;
    double b1_slack = 0.8;
    std::vector<double> probe_widths{0.1, 0.5, 1.0};
    double probe_amplitude = 0.1;
    double bilinear_tol = 0.15;
    double product_spread_tol = 10.0;

    void validate() const;
    nlohmann::json to_json() const;
    GevreyRunConfig run(double width) const;
};

SuiteReport gevrey_suite(const Grid& grid, const GevreySuiteConfig& cfg, std::uint64_t seed);

}  // namespace regcheck
