#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "regcheck/checks.hpp"
#include "regcheck/norms.hpp"

namespace regcheck {

/// Sizes, grids and tolerances of the lemma checks. Every tolerance is a field
/// so that the reports can show what was asserted.
struct LemmaConfig {
    double p = 6.0;
    std::uint64_t seed = 1;

    // Interpolation ||f||_{M^{2s,ps}} <= C ||f||_{M^{2,p}}^{1/s} ||f||_inf^{1-1/s}.
    int interpolation_fields = 100;
    std::vector<double> sigmas{1.5, 2.0, 3.0};
    int n_coarse = 32;
    int n_fine = 64;
    double interpolation_refine_tol = 0.2;

    // Smoothing t^{3/(2p)} ||e^{t Lap} f||_inf <= C ||f||_{M^{2,p}} on dyadic t in [t_lo, t_hi].
    int smoothing_fields = 100;
    double t_lo = 1e-3;
    double t_hi = 1.0;
    double smoothing_spread_tol = 10.0;

    // Holder |f(x) - f(y)| <= C ||grad f||_{M^{1,p}} |x - y|^{1 - 3/p}.
    int holder_fields = 5;
    std::size_t holder_pairs = 200;
    int holder_pair_factor = 10;
    double holder_tol = 0.1;

    // Oseen kernel |K(t,x)| <= c / (sqrt t + |x|)^4 on a box of side oseen_length.
    double oseen_length = 16.0;
    int oseen_n = 64;
    int oseen_n_fine = 128;
    double oseen_t = 0.25;
    double oseen_time_tol = 0.15;
    double oseen_refine_tol = 0.1;
    bool oseen_refine = true;

    // Operator identities on seeded fields.
    int algebra_fields = 20;
    int algebra_n = 32;
    double algebra_tol = 1e-12;

    void validate() const;
    nlohmann::json to_json() const;
};

/// Ball sampling with the same physical centers and radii on every grid whose
/// size is a multiple of 16: radii L/16 .. L/2, one center every n/16 points.
BallSampling matched_sampling(const Grid& grid);

SuiteReport interpolation_suite(const LemmaConfig& cfg);
SuiteReport smoothing_suite(const LemmaConfig& cfg);
SuiteReport holder_suite(const LemmaConfig& cfg);
SuiteReport oseen_suite(const LemmaConfig& cfg);
SuiteReport operator_algebra_suite(const LemmaConfig& cfg);

/// All five: the operator identities first, then the lemma fits in the order above.
SuiteReport lemma_suite(const LemmaConfig& cfg);

}  // namespace regcheck
