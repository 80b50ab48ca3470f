#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "regcheck/spectral_field.hpp"

namespace regcheck {

/// Exponents of the homogeneous Morrey space M^{r,p}.
struct MorreyParams {
    double r = 2.0;
    double p = 6.0;

    /// Requires 1 < r < p. The M^{1,p} norm of the Holder check passes
    /// allow_r_one = true.
    void validate(bool allow_r_one = false) const;
};

/// Discrete stand-in for "sup over centers and radii": every `stride`-th grid
/// point per axis as a center, and an explicit list of radii.
struct BallSampling {
    int stride = 4;
    std::vector<double> radii;

    /// Dyadic radii from 2h up to L/2. When that gives fewer than `min_radii`
    /// values the ratio is shrunk geometrically until it does.
    static BallSampling dyadic(const Grid& grid, int stride = 4, int min_radii = 4);
    /// `count` radii spaced geometrically between 2h and L/2.
    static BallSampling geometric(const Grid& grid, int count, int stride = 1);

    void validate(const Grid& grid) const;
    nlohmann::json to_json() const;
};

/// Gevrey parameters: Sobolev index s and strip width b.
struct GevreyParams {
    double s = 1.0;
    double b = 0.0;
};

/// Morrey norm of a field (vector and tensor fields reduce to their pointwise
/// Euclidean magnitude): max over sampled balls of R^{3/p} (mean_B |f|^r)^{1/r}.
double morrey_norm(const SpectralField& f, const MorreyParams& mp, const BallSampling& bs);

/// Same estimator applied to nonnegative grid samples (for example a joint
/// magnitude of several fields).
double morrey_norm_of_samples(const Grid& grid, std::span<const double> magnitude, const MorreyParams& mp,
                              const BallSampling& bs);

/// Per-radius maxima used by the oracle tests and reports.
struct MorreyProfile {
    std::vector<double> radii;
    std::vector<double> values;  // max over centers of R^{3/p} (mean |f|^r)^{1/r}
    double norm = 0.0;
};
MorreyProfile morrey_profile(const Grid& grid, std::span<const double> magnitude, const MorreyParams& mp,
                             const BallSampling& bs);

/// Homogeneous Sobolev norm (sum_{k != 0} |k|^{2s} |c_k|^2)^{1/2} over all components.
double sobolev_norm(const SpectralField& f, double s);

/// Max over grid points of the pointwise Euclidean magnitude.
double linf_norm(const SpectralField& f);

/// Dyadic times 2^j within [lo, hi], inclusive of both ends when they are powers of two.
std::vector<double> dyadic_times(double lo, double hi);

/// max over the ladder of t^{3/(2p)} ||e^{t Delta} f||_inf.
double besov_decay_norm(const SpectralField& f, double p, std::span<const double> t_ladder);

/// Result of the Holder seminorm check.
struct HolderReport {
    double exponent = 0.0;         // 1 - 3/p
    double fitted_c = 0.0;         // max ratio |f(x)-f(y)| / (||grad f||_{M^{1,p}} |x-y|^exponent)
    double gradient_morrey = 0.0;  // ||grad f||_{M^{1,p}}
    double argmax_distance = 0.0;
    std::size_t pairs = 0;
    bool constant_field = false;

    nlohmann::json to_json() const;
};

/// Sample `pairs` random point pairs (seeded), evaluate the field by spectral
/// interpolation, then refine the best pairs by a local pattern search so the
/// maximum does not depend on how many pairs were drawn.
HolderReport holder_seminorm_check(const SpectralField& f, double p, std::size_t pairs, std::uint64_t seed,
                                   const BallSampling& bs);

/// ||e^{b sqrt(-Delta)} f||_{H^s}. Propagates IllPosedRequest on overflow.
double gevrey_norm(const SpectralField& f, const GevreyParams& gp);

/// Time-indexed tuple of fields, e.g. (u, b) of one system.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<SpectralField>> states;

    std::size_t size() const { return times.size(); }
    void push(double t, std::vector<SpectralField> parts) {
        times.push_back(t);
        states.push_back(std::move(parts));
    }
};

/// Pointwise Euclidean magnitude of a tuple of fields, treated as one stacked vector.
std::vector<double> joint_magnitude(std::span<const SpectralField> parts);

/// E_T norm: sup_t ||x(t)||_{M^{2,p}} + sup_t t^{3/(2p)} ||x(t)||_inf, discrete sup over stored times.
double et_norm(const Trajectory& trajectory, double p, const BallSampling& bs);

/// Flat record describing one norm evaluation.
struct NormReport {
    std::string norm_name;
    nlohmann::json params;
    double value = 0.0;
    nlohmann::json sampling;
    Grid grid = Grid::standard();

    nlohmann::json to_json() const;
};

/// Evaluates trigonometric interpolants of fields at arbitrary points, using
/// only their nonzero modes.
class PointEvaluator {
public:
    explicit PointEvaluator(const SpectralField& f, double drop_below = 0.0);
    /// Value of component c at x.
    double operator()(int c, const std::array<double, 3>& x) const;
    std::size_t mode_count() const { return modes_.size(); }

private:
    struct Mode {
        std::array<int, 3> m;
        std::vector<Complex> weighted;  // per component, Hermitian weight folded in
    };
    Grid grid_;
    int components_;
    int max_m_ = 0;
    std::vector<Mode> modes_;
};

}  // namespace regcheck
