#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "regcheck/random.hpp"
#include "regcheck/spectral_field.hpp"

using namespace regcheck;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

SpectralField scalar_of(const Grid& g, double (*fn)(double, double, double)) {
    return sample_field(g, Rank::scalar, [&](const std::array<double, 3>& x, std::span<double> out) {
        out[0] = fn(x[0], x[1], x[2]);
    });
}

}  // namespace

TEST_CASE("grid rejects bad sizes") {
    CHECK_THROWS(Grid(6, 1.0));
    CHECK_THROWS(Grid(12, 1.0));
    CHECK_THROWS(Grid(16, -1.0));
    CHECK_NOTHROW(Grid(8, 1.0));
    const Grid g = Grid::standard();
    CHECK(g.dealias_cutoff() == 10);
    CHECK(Grid(64, 1.0).dealias_cutoff() == 21);
    CHECK(g.frequency(16) == -16);
    CHECK(g.wavenumber(-16) == 0.0);
}

TEST_CASE("constant field has only the zero mode") {
    const Grid g(16, 2.0 * std::numbers::pi);
    const auto f = scalar_of(g, [](double, double, double) { return 1.0; });
    CHECK(f.at(0, 0, 0, 0).real() == doctest::Approx(1.0).epsilon(1e-15));
    double rest = 0.0;
    for (std::size_t i = 1; i < g.spectral_size(); ++i) rest = std::max(rest, std::abs(f.component(0)[i]));
    CHECK(rest < 1e-15);
}

TEST_CASE("cos(x1) has conjugate modes of amplitude one half") {
    const Grid g = Grid::standard();
    const auto f = scalar_of(g, [](double x, double, double) { return std::cos(x); });
    CHECK(std::abs(f.at(0, 1, 0, 0) - Complex(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(f.at(0, g.n() - 1, 0, 0) - Complex(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(f.energy() - 0.5) < 1e-14);
}

TEST_CASE("round trip and Parseval for random grid data") {
    const Grid g = Grid::standard();
    Rng rng(11);
    std::vector<double> v(g.physical_size() * 3);
    for (auto& x : v) x = rng.normal();
    const auto f = SpectralField::from_physical(g, Rank::vector, v);
    const auto back = f.to_physical();
    CHECK(max_abs_diff(v, back) / max_abs(v) < 1e-12);

    double mean_sq = 0.0;
    for (double x : v) mean_sq += x * x;
    mean_sq /= static_cast<double>(g.physical_size());
    CHECK(std::abs(f.energy() - mean_sq) / mean_sq < 1e-12);
    CHECK(f.hermitian_defect() < 1e-12);
    CHECK_THROWS(SpectralField::from_physical(g, Rank::scalar, v));
}

TEST_CASE("exact derivatives of resolved modes") {
    const Grid g = Grid::standard();
    const auto s = scalar_of(g, [](double x, double, double) { return std::sin(x); });
    const auto c = scalar_of(g, [](double x, double, double) { return std::cos(x); });
    const auto ds = derivative(s, MultiIndex(1, 0, 0));
    CHECK(max_abs_diff(ds.to_physical(), c.to_physical()) < 1e-14);

    // Delta e^{i k.x} = -|k|^2 e^{i k.x}, checked on the mode m = (2, -3, 1).
    SpectralField e(g, Rank::scalar);
    e.at(0, 2, g.n() - 3, 1) = Complex(0.3, -0.7);
    const auto le = laplacian(e);
    CHECK(std::abs(le.at(0, 2, g.n() - 3, 1) + 14.0 * e.at(0, 2, g.n() - 3, 1)) < 1e-14);
}

TEST_CASE("operator identities on random fields") {
    const Grid g = Grid::standard();
    Rng rng(3);
    const auto f = random_grid_field(g, Rank::scalar, rng);
    const auto dd = divergence(gradient(f)) - laplacian(f);
    CHECK(dd.max_abs_coefficient() < 1e-12 * laplacian(f).max_abs_coefficient());

    const auto d12 = derivative(derivative(f, MultiIndex(1, 0, 0)), MultiIndex(0, 1, 0));
    const auto d21 = derivative(derivative(f, MultiIndex(0, 1, 0)), MultiIndex(1, 0, 0));
    CHECK((d12 - d21).max_abs_coefficient() <= 1e-15 * d12.max_abs_coefficient());
    CHECK((d12 - derivative(f, MultiIndex(1, 1, 0))).max_abs_coefficient() < 1e-12 * d12.max_abs_coefficient());

    const auto v = random_grid_field(g, Rank::vector, rng);
    CHECK(divergence(curl(v)).max_abs_coefficient() < 1e-12 * v.max_abs_coefficient() * 16);
}

TEST_CASE("products") {
    const Grid g = Grid::standard();
    const auto s = scalar_of(g, [](double x, double, double) { return std::sin(x); });
    const auto c = scalar_of(g, [](double x, double, double) { return std::cos(x); });
    const auto one = scalar_of(g, [](double, double, double) { return 1.0; });
    const auto half_s2 = scalar_of(g, [](double x, double, double) { return 0.5 * std::sin(2 * x); });

    CHECK((pointwise_product(s, one) - s).max_abs_coefficient() < 1e-15);
    CHECK(max_abs_diff(pointwise_product(s, c).to_physical(), half_s2.to_physical()) < 1e-12);

    SUBCASE("matches a direct physical product on dealiased modes") {
        Rng rng(5);
        auto f = random_grid_field(g, Rank::scalar, rng);
        auto h = random_grid_field(g, Rank::scalar, rng);
        const auto prod = pointwise_product(f, h);
        // Oracle: truncated inputs evaluated on a 2n grid, multiplied there,
        // then transformed back and truncated to the n-grid cube.
        f.dealias();
        h.dealias();
        const Grid fine(2 * g.n(), g.length());
        auto upsample = [&](const SpectralField& a) {
            SpectralField out(fine, Rank::scalar);
            for (int i1 = 0; i1 < g.n(); ++i1)
                for (int i2 = 0; i2 < g.n(); ++i2)
                    for (int i3 = 0; i3 < g.half() - 1; ++i3) {
                        const auto m = g.frequencies(i1, i2, i3);
                        auto idx = [&](int mm) { return mm >= 0 ? mm : mm + fine.n(); };
                        out.at(0, idx(m[0]), idx(m[1]), m[2]) = a.at(0, i1, i2, i3);
                    }
            return out.to_physical();
        };
        auto pf = upsample(f);
        const auto ph = upsample(h);
        for (std::size_t i = 0; i < pf.size(); ++i) pf[i] *= ph[i];
        const auto fine_prod = SpectralField::from_physical(fine, Rank::scalar, pf);
        double err = 0.0;
        const int K = g.dealias_cutoff();
        for (int i1 = 0; i1 < g.n(); ++i1)
            for (int i2 = 0; i2 < g.n(); ++i2)
                for (int i3 = 0; i3 <= K; ++i3) {
                    const auto m = g.frequencies(i1, i2, i3);
                    if (std::abs(m[0]) > K || std::abs(m[1]) > K) continue;
                    auto idx = [&](int mm) { return mm >= 0 ? mm : mm + fine.n(); };
                    const Complex want = fine_prod.at(0, idx(m[0]), idx(m[1]), m[2]);
                    err = std::max(err, std::abs(prod.at(0, i1, i2, i3) - want));
                }
        CHECK(err < 1e-10);
    }

    SUBCASE("commutative and bilinear") {
        Rng rng(9);
        const auto a = random_grid_field(g, Rank::scalar, rng);
        const auto b = random_grid_field(g, Rank::scalar, rng);
        const auto d = random_grid_field(g, Rank::scalar, rng);
        CHECK((pointwise_product(a, b) - pointwise_product(b, a)).max_abs_coefficient() < 1e-15);
        const auto lhs = pointwise_product(2.0 * a + d, b);
        const auto rhs = 2.0 * pointwise_product(a, b) + pointwise_product(d, b);
        CHECK((lhs - rhs).max_abs_coefficient() < 1e-14);
    }

    CHECK_THROWS(pointwise_product(s, SpectralField(Grid(16, g.length()), Rank::scalar)));
}

TEST_CASE("spectral evaluation off the grid") {
    const Grid g(16, 2.0 * std::numbers::pi);
    const auto f = scalar_of(g, [](double x, double y, double z) { return std::sin(x) * std::cos(2 * y) + std::cos(3 * z); });
    const std::array<double, 3> p{0.123, 1.7, 2.9};
    CHECK(f.evaluate(0, p) == doctest::Approx(std::sin(0.123) * std::cos(3.4) + std::cos(8.7)).epsilon(1e-13));
}

TEST_CASE("multi-index helpers") {
    CHECK_THROWS(MultiIndex(3, 2, 0));
    CHECK(MultiIndex::of_order(2).size() == 6);
    CHECK(MultiIndex::below(MultiIndex(1, 2, 0)).size() == 6);
    CHECK(binomial(MultiIndex(2, 1, 0), MultiIndex(1, 1, 0)) == 2.0);
    CHECK((MultiIndex(1, 1, 0) + MultiIndex(0, 1, 1)).order() == 4);
}
