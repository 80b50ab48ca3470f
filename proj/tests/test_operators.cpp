#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

using namespace regcheck;

namespace {

const Grid grid = Grid::standard();

double rel(const SpectralField& a, const SpectralField& b) {
    const double scale = std::max(a.max_abs_coefficient(), b.max_abs_coefficient());
    return scale == 0.0 ? 0.0 : (a - b).max_abs_coefficient() / scale;
}

SpectralField single_mode(Rank rank, int c, int i1, int i2, int i3, Complex v) {
    SpectralField f(grid, rank);
    f.at(c, i1, i2, i3) = v;
    if (i3 == 0) f.at(c, (grid.n() - i1) % grid.n(), (grid.n() - i2) % grid.n(), 0) = std::conj(v);
    return f;
}

// Plain real inner product of two fields through their grid samples.
double inner(const SpectralField& a, const SpectralField& b) {
    const auto pa = a.to_physical();
    const auto pb = b.to_physical();
    double s = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) s += pa[i] * pb[i];
    return s / static_cast<double>(grid.physical_size());
}

}  // namespace

TEST_CASE("heat semigroup") {
    const auto f = single_mode(Rank::scalar, 0, 1, 0, 0, Complex(0.5, 0.0));
    const auto h = heat_semigroup(f, 0.5);
    CHECK(h.at(0, 1, 0, 0).real() == doctest::Approx(0.5 * 0.6065306597126334).epsilon(1e-14));
    CHECK_THROWS_AS(heat_semigroup(f, -1e-3), std::invalid_argument);

    Rng rng(1);
    const auto g = random_band_limited(grid, Rank::vector, 6, rng);
    CHECK(rel(heat_semigroup(g, 0.0), g) == 0.0);
    CHECK(rel(heat_semigroup(heat_semigroup(g, 0.1), 0.3), heat_semigroup(g, 0.4)) < 1e-12);

    // Per-mode contraction of every homogeneous Sobolev weight.
    const auto hg = heat_semigroup(g, 0.2);
    bool contracts = true;
    for (std::size_t i = 0; i < g.coefficients().size(); ++i)
        contracts = contracts && std::abs(hg.coefficients()[i]) <= std::abs(g.coefficients()[i]);
    CHECK(contracts);
}

TEST_CASE("Leray projector") {
    Rng rng(2);
    const auto phi = random_band_limited(grid, Rank::scalar, 6, rng);
    CHECK(leray_project(gradient(phi)).max_abs_coefficient() < 1e-12 * gradient(phi).max_abs_coefficient());

    const auto a = random_band_limited(grid, Rank::vector, 6, rng);
    const auto w = curl(a);  // divergence-free
    CHECK(rel(leray_project(w), w) < 1e-12);

    const auto f = random_band_limited(grid, Rank::vector, 6, rng);
    const auto pf = leray_project(f);
    CHECK(divergence(pf).max_abs_coefficient() < 1e-12 * f.max_abs_coefficient());
    CHECK(rel(leray_project(pf), pf) < 1e-12);
    const auto g = random_band_limited(grid, Rank::vector, 6, rng);
    CHECK(std::abs(inner(pf, g) - inner(f, leray_project(g))) < 1e-12 * std::sqrt(f.energy() * g.energy()));

    // The zero mode passes through unchanged.
    SpectralField c(grid, Rank::vector);
    c.at(2, 0, 0, 0) = 1.5;
    CHECK(rel(leray_project(c), c) == 0.0);
    CHECK_THROWS(leray_project(phi));
}

TEST_CASE("Riesz transforms") {
    const auto mode = single_mode(Rank::scalar, 0, 1, 0, 0, Complex(1.0, 0.0));
    CHECK(std::abs(riesz(mode, 0).at(0, 1, 0, 0) - Complex(0.0, 1.0)) < 1e-15);

    Rng rng(3);
    auto f = random_band_limited(grid, Rank::scalar, 6, rng);
    SpectralField sum(grid, Rank::scalar);
    for (int i = 0; i < 3; ++i) sum += riesz(riesz(f, i), i);
    CHECK(rel(sum, -f) < 1e-12);
    CHECK_THROWS(riesz(f, 3));
}

TEST_CASE("inverse Laplacian") {
    const auto mode = single_mode(Rank::scalar, 0, 2, 0, 0, Complex(1.0, 0.0));
    CHECK(inv_laplacian(mode).at(0, 2, 0, 0).real() == doctest::Approx(0.25).epsilon(1e-15));

    Rng rng(4);
    const auto f = random_band_limited(grid, Rank::scalar, 6, rng);
    CHECK((laplacian(inv_laplacian(f)) + f).max_abs_coefficient() < 1e-12 * f.max_abs_coefficient());

    SpectralField c(grid, Rank::scalar);
    c.at(0, 0, 0, 0) = 3.0;
    CHECK(inv_laplacian(c).max_abs_coefficient() == 0.0);
}

TEST_CASE("Gevrey smoothing") {
    const auto mode = single_mode(Rank::scalar, 0, 2, 0, 0, Complex(1.0, 0.0));
    CHECK(gevrey_smooth(mode, 0.1).at(0, 2, 0, 0).real() == doctest::Approx(1.2214027581601699).epsilon(1e-14));
    CHECK(gevrey_smooth(mode, 0.4, 0.25, GevreyMode::sqrt_t).at(0, 2, 0, 0).real() ==
          doctest::Approx(std::exp(0.4)).epsilon(1e-14));

    Rng rng(5);
    const auto f = random_band_limited(grid, Rank::vector, 6, rng);
    CHECK(rel(gevrey_smooth(f, 0.0), f) == 0.0);
    CHECK(rel(gevrey_smooth(gevrey_smooth(f, 0.2), 0.3), gevrey_smooth(f, 0.5)) < 1e-12);

    SUBCASE("composition with the heat semigroup matches the combined multiplier") {
        const double b = 0.3, t = 0.2;
        const auto composed = gevrey_smooth(heat_semigroup(f, t), b);
        SpectralField direct = f;
        for_each_mode(grid, [&](std::size_t idx, const std::array<double, 3>& k, int) {
            const double kk = norm_of(k);
            for (int c = 0; c < 3; ++c) direct.component(c)[idx] *= std::exp(b * kk - t * kk * kk);
        });
        CHECK(rel(composed, direct) < 1e-12);
    }

    SUBCASE("overflow is flagged") {
        CHECK_THROWS_AS(gevrey_smooth(mode, 400.0), IllPosedRequest);
        CHECK_NOTHROW(gevrey_smooth(SpectralField(grid, Rank::scalar), 400.0));
    }
    CHECK_THROWS(gevrey_smooth(mode, -0.1));
}

TEST_CASE("multiplier spec dispatch") {
    Rng rng(6);
    const auto f = random_band_limited(grid, Rank::vector, 4, rng);
    MultiplierSpec spec;
    spec.kind = MultiplierKind::heat;
    spec.t = 0.3;
    CHECK(rel(apply_multiplier(f, spec), heat_semigroup(f, 0.3)) == 0.0);
    spec.kind = MultiplierKind::frac_power;
    spec.s = 2.0;
    CHECK(rel(apply_multiplier(f, spec), -laplacian(f)) < 1e-13);
    spec.kind = MultiplierKind::gevrey;
    spec.b = -1.0;
    CHECK_THROWS(apply_multiplier(f, spec));
}

TEST_CASE("Oseen kernel report") {
    const Grid box(32, 16.0);
    const auto rep = oseen_kernel_bound_check(box, 1.0, 0);
    CHECK(!rep.under_resolved);
    CHECK(std::isfinite(rep.fitted_c));
    CHECK(rep.fitted_c > 0.0);
    CHECK(rep.origin_value <= rep.fitted_c);
    CHECK(oseen_kernel_bound_check(box, 0.01, 100).under_resolved);
    CHECK(oseen_kernel_bound_check(box, 1.0, 100).samples_used == 100);
    CHECK_THROWS(oseen_kernel_bound_check(box, 0.0, 10));
}
