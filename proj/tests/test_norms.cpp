#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "regcheck/norms.hpp"
#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

using namespace regcheck;

namespace {

const double pi = std::numbers::pi;

SpectralField scalar_of(const Grid& g, double (*fn)(double, double, double)) {
    return sample_field(g, Rank::scalar, [&](const std::array<double, 3>& x, std::span<double> out) {
        out[0] = fn(x[0], x[1], x[2]);
    });
}

// Direct-loop Morrey estimate: every center in `center_stride`, every grid
// point binned by minimal-image distance, cumulative sums per radius.
double brute_force_morrey(const Grid& g, const std::vector<double>& mag, double r, double p,
                          const std::vector<double>& radii, int center_stride) {
    const int n = g.n();
    const double h = g.spacing();
    auto wrap = [n](int d) {
        d = ((d % n) + n) % n;
        return d <= n / 2 ? d : d - n;
    };
    double best = 0.0;
    std::vector<double> sum(radii.size()), count(radii.size());
    for (int c1 = 0; c1 < n; c1 += center_stride)
        for (int c2 = 0; c2 < n; c2 += center_stride)
            for (int c3 = 0; c3 < n; c3 += center_stride) {
                std::fill(sum.begin(), sum.end(), 0.0);
                std::fill(count.begin(), count.end(), 0.0);
                for (int i1 = 0; i1 < n; ++i1)
                    for (int i2 = 0; i2 < n; ++i2)
                        for (int i3 = 0; i3 < n; ++i3) {
                            const double d1 = h * wrap(i1 - c1), d2 = h * wrap(i2 - c2), d3 = h * wrap(i3 - c3);
                            const double d = std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
                            const double v = std::pow(mag[g.physical_index(i1, i2, i3)], r);
                            for (std::size_t k = 0; k < radii.size(); ++k)
                                if (d <= radii[k] + 1e-9 * h) {
                                    sum[k] += v;
                                    count[k] += 1.0;
                                }
                        }
                for (std::size_t k = 0; k < radii.size(); ++k)
                    best = std::max(best, std::pow(radii[k], 3.0 / p) * std::pow(sum[k] / count[k], 1.0 / r));
            }
    return best;
}

}  // namespace

TEST_CASE("ball sampling") {
    const auto bs = BallSampling::dyadic(Grid::standard());
    CHECK(bs.radii.size() == 4);
    CHECK(bs.radii.front() == doctest::Approx(2.0 * Grid::standard().spacing()));
    CHECK(bs.radii.back() == doctest::Approx(pi));
    CHECK(BallSampling::dyadic(Grid(8, 2 * pi)).radii.size() == 4);
    CHECK(BallSampling::dyadic(Grid(64, 2 * pi)).radii.size() == 5);
    BallSampling bad = bs;
    bad.radii.pop_back();
    CHECK_THROWS(bad.validate(Grid::standard()));
    CHECK_THROWS(MorreyParams{6.0, 2.0}.validate());
}

TEST_CASE("Morrey norm of simple fields") {
    const Grid g = Grid::standard();
    const auto bs = BallSampling::dyadic(g);
    const auto one = scalar_of(g, [](double, double, double) { return 1.0; });
    CHECK(morrey_norm(one, MorreyParams{}, bs) == doctest::Approx(std::sqrt(pi)).epsilon(1e-12));
    CHECK(morrey_norm(SpectralField(g, Rank::scalar), MorreyParams{}, bs) == 0.0);

    const auto s = scalar_of(g, [](double x, double, double) { return std::sin(x); });
    const double est = morrey_norm(s, MorreyParams{}, bs);
    const auto fine = BallSampling::geometric(g, 8 * static_cast<int>(bs.radii.size()));
    const double oracle = brute_force_morrey(g, magnitude(s), 2.0, 6.0, fine.radii, 2);
    CHECK(std::abs(est - oracle) / oracle < 0.02);
}

TEST_CASE("Morrey norm is a norm on sampled data") {
    const Grid g = Grid::standard();
    const auto bs = BallSampling::dyadic(g);
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_band_limited(g, Rank::scalar, 4, rng);
        const auto b = random_band_limited(g, Rank::scalar, 4, rng);
        const double na = morrey_norm(a, MorreyParams{}, bs), nb = morrey_norm(b, MorreyParams{}, bs);
        CHECK(morrey_norm(-2.5 * a, MorreyParams{}, bs) == doctest::Approx(2.5 * na).epsilon(1e-12));
        CHECK(morrey_norm(a + b, MorreyParams{}, bs) <= na + nb + 1e-12 * (na + nb));
        CHECK(na <= std::pow(0.5 * g.length(), 0.5) * linf_norm(a) * (1 + 1e-12));
    }
}

TEST_CASE("Sobolev and sup norms") {
    const Grid g = Grid::standard();
    // Unit RMS amplitude single mode with |k| = 2.
    const auto f = scalar_of(g, [](double x, double, double) { return std::sqrt(2.0) * std::cos(2 * x); });
    CHECK(sobolev_norm(f, 1.0) == doctest::Approx(2.0).epsilon(1e-13));

    Rng rng(8);
    auto r = random_band_limited(g, Rank::scalar, 5, rng);
    r.at(0, 0, 0, 0) = 0.7;
    SpectralField zero_mean = r;
    zero_mean.remove_mean();
    CHECK(sobolev_norm(r, 0.0) == doctest::Approx(std::sqrt(zero_mean.energy())).epsilon(1e-12));
    CHECK(sobolev_norm(r, 1.0) == doctest::Approx(std::sqrt(gradient(r).energy())).epsilon(1e-12));

    const auto s = scalar_of(g, [](double x, double, double) { return std::sin(x); });
    CHECK(std::abs(linf_norm(s) - 1.0) < 0.005);
    const auto c = scalar_of(g, [](double, double, double) { return -3.25; });
    CHECK(linf_norm(c) == 3.25);

    Rng rng2(9);
    const Grid g2(64, g.length());
    Rng copy = rng2;
    const auto coarse = random_band_limited(g, Rank::vector, 4, rng2);
    const auto finer = random_band_limited(g2, Rank::vector, 4, copy);
    CHECK(std::abs(linf_norm(coarse) - linf_norm(finer)) / linf_norm(finer) < 0.01);
}

TEST_CASE("Besov-type decay norm") {
    const Grid g = Grid::standard();
    const auto ladder = dyadic_times(1.0 / 1024, 4.0);
    CHECK(besov_decay_norm(SpectralField(g, Rank::scalar), 6.0, ladder) == 0.0);
    // Single mode |k| = 1, unit amplitude: sup_t t^{1/4} e^{-t}, over the ladder.
    const auto f = scalar_of(g, [](double x, double, double) { return std::cos(x); });
    double oracle = 0.0;
    for (double t : ladder) oracle = std::max(oracle, std::pow(t, 0.25) * std::exp(-t));
    CHECK(besov_decay_norm(f, 6.0, ladder) == doctest::Approx(oracle).epsilon(1e-10));
    // On the ladder the maximum sits at t = 1/4, which is exactly the continuum argmax.
    CHECK(oracle == doctest::Approx(std::pow(0.25, 0.25) * std::exp(-0.25)).epsilon(1e-14));
    auto denser = ladder;
    denser.push_back(0.3);
    CHECK(besov_decay_norm(f, 6.0, denser) >= besov_decay_norm(f, 6.0, ladder));
}

TEST_CASE("Holder check") {
    const Grid g = Grid::standard();
    const auto bs = BallSampling::dyadic(g);
    const auto c = scalar_of(g, [](double, double, double) { return 2.0; });
    const auto rc = holder_seminorm_check(c, 6.0, 100, 1, bs);
    CHECK(rc.constant_field);
    CHECK(rc.fitted_c == 0.0);

    const auto s = scalar_of(g, [](double x, double, double) { return std::sin(x); });
    const auto few = holder_seminorm_check(s, 6.0, 1000, 1, bs);
    const auto many = holder_seminorm_check(s, 6.0, 10000, 2, bs);
    CHECK(few.exponent == 0.5);
    CHECK(std::isfinite(few.fitted_c));
    CHECK(std::abs(few.fitted_c - many.fitted_c) / many.fitted_c < 0.10);
    CHECK_THROWS(holder_seminorm_check(s, 3.0, 10, 1, bs));
}

TEST_CASE("point evaluator agrees with the full interpolant") {
    const Grid g(16, 2 * pi);
    Rng rng(4);
    const auto f = random_band_limited(g, Rank::vector, 3, rng);
    const PointEvaluator eval(f);
    const std::array<double, 3> x{0.3, 5.1, 2.2};
    for (int c = 0; c < 3; ++c) CHECK(eval(c, x) == doctest::Approx(f.evaluate(c, x)).epsilon(1e-12));
}

TEST_CASE("Gevrey norm") {
    const Grid g = Grid::standard();
    const auto f = scalar_of(g, [](double x, double, double) { return std::sqrt(2.0) * std::cos(2 * x); });
    CHECK(gevrey_norm(f, GevreyParams{1.0, 0.1}) == doctest::Approx(2.0 * std::exp(0.2)).epsilon(1e-13));
    CHECK(gevrey_norm(f, GevreyParams{1.0, 0.0}) == doctest::Approx(sobolev_norm(f, 1.0)).epsilon(1e-15));

    // Coefficients exp(-0.5|k|) on every mode: finite below the decay rate,
    // overflow-flagged well above it once the grid reaches far enough.
    const Grid big(128, 2 * pi);
    SpectralField d(big, Rank::scalar);
    for_each_mode(big, [&](std::size_t idx, const std::array<double, 3>& k, int) {
        d.component(0)[idx] = std::exp(-0.5 * norm_of(k));
    });
    CHECK(std::isfinite(gevrey_norm(d, GevreyParams{0.0, 0.4})));
    CHECK_THROWS_AS(gevrey_norm(d, GevreyParams{0.0, 7.0}), IllPosedRequest);
}

TEST_CASE("E_T norm") {
    const Grid g = Grid::standard();
    const auto bs = BallSampling::dyadic(g);
    Trajectory empty;
    CHECK_THROWS(et_norm(empty, 6.0, bs));

    Trajectory zero;
    zero.push(0.0, {SpectralField(g, Rank::vector)});
    zero.push(0.5, {SpectralField(g, Rank::vector)});
    CHECK(et_norm(zero, 6.0, bs) == 0.0);

    const auto f = scalar_of(g, [](double x, double y, double) { return std::sin(x) * std::cos(y); });
    Trajectory constant;
    for (int j = 0; j <= 4; ++j) constant.push(0.25 * j, {f});
    const double expected = morrey_norm(f, MorreyParams{}, bs) + std::pow(1.0, 0.25) * linf_norm(f);
    CHECK(et_norm(constant, 6.0, bs) == doctest::Approx(expected).epsilon(1e-12));

    // Heat flow of a single mode against the closed-form per-term values.
    const auto m = scalar_of(g, [](double x, double, double) { return std::cos(x); });
    Trajectory heat;
    double morrey_sup = 0.0, linf_sup = 0.0;
    const double m0 = morrey_norm(m, MorreyParams{}, bs);
    for (int j = 0; j <= 8; ++j) {
        const double t = 0.125 * j;
        heat.push(t, {heat_semigroup(m, t)});
        morrey_sup = std::max(morrey_sup, std::exp(-t) * m0);
        linf_sup = std::max(linf_sup, std::pow(t, 0.25) * std::exp(-t));
    }
    CHECK(std::abs(et_norm(heat, 6.0, bs) - (morrey_sup + linf_sup)) / (morrey_sup + linf_sup) < 0.01);
}
