#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"
#include "regcheck/systems.hpp"

using namespace regcheck;

namespace {

const Grid grid = Grid::standard();

double max_abs(const SpectralField& f) { return f.max_abs_coefficient(); }

double rel(const SpectralField& a, const SpectralField& b) {
    const double scale = std::max(a.max_abs_coefficient(), b.max_abs_coefficient());
    return scale == 0.0 ? 0.0 : (a - b).max_abs_coefficient() / scale;
}

SpectralField constant_vector(const Grid& g, double a, double b, double c) {
    return sample_field(g, Rank::vector, [&](const std::array<double, 3>&, std::span<double> out) {
        out[0] = a;
        out[1] = b;
        out[2] = c;
    });
}

// Periodic fourth-order central difference along `axis` of row-major samples.
std::vector<double> fd4(const Grid& g, const std::vector<double>& v, int axis) {
    const int n = g.n();
    const double h = g.spacing();
    std::vector<double> out(v.size());
    auto at = [&](int i1, int i2, int i3) {
        return v[g.physical_index((i1 + n) % n, (i2 + n) % n, (i3 + n) % n)];
    };
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3) {
                std::array<int, 3> e{0, 0, 0};
                e[axis] = 1;
                auto shift = [&](int s) { return at(i1 + s * e[0], i2 + s * e[1], i3 + s * e[2]); };
                out[g.physical_index(i1, i2, i3)] =
                    (-shift(2) + 8 * shift(1) - 8 * shift(-1) + shift(-2)) / (12 * h);
            }
    return out;
}

SystemState sel_with(const SpectralField& u, const SpectralField& vt, const SpectralField& v) {
    SystemState s;
    s.kind = SystemKind::sel_aux;
    s.fields = {u, vt};
    s.frozen = v;
    return s;
}

}  // namespace

TEST_CASE("kind metadata") {
    for (auto k : {SystemKind::sel_aux, SystemKind::mhd, SystemKind::ns_stationary, SystemKind::harmonic_map}) {
        CHECK(parse_kind(kind_name(k)) == k);
        CHECK(field_ranks(k).size() == field_names(k).size());
    }
    CHECK_THROWS(parse_kind("boussinesq"));
    CHECK(field_ranks(SystemKind::sel_aux)[1] == Rank::tensor);
}

TEST_CASE("state validation") {
    auto s = steady_target(SystemKind::sel_aux, grid, 1.0);
    CHECK_NOTHROW(s.validate());
    auto bad = s;
    bad.frozen = 2.0 * *s.frozen;
    CHECK_THROWS(bad.validate());

    Rng rng(3);
    auto divergent = SystemState::zero(SystemKind::ns_stationary, grid);
    divergent.fields[0] = random_band_limited(grid, Rank::vector, 3, rng);
    CHECK_THROWS(divergent.validate());

    auto missing = SystemState::zero(SystemKind::sel_aux, grid);
    CHECK_THROWS(assemble_nonlinear(missing));
    missing.fields.pop_back();
    CHECK_THROWS(missing.validate());
}

TEST_CASE("zero state gives zero terms") {
    auto s = SystemState::zero(SystemKind::sel_aux, grid);
    s.frozen = constant_vector(grid, 0.0, 0.0, 1.0);
    for (const auto& t : assemble_nonlinear(s).terms) CHECK(max_abs(t.value) == 0.0);
    for (const auto& t : assemble_nonlinear(SystemState::zero(SystemKind::mhd, grid)).terms) CHECK(max_abs(t.value) == 0.0);
}

TEST_CASE("Taylor-Green advection against finite differences") {
    const Grid fine(64, 2 * std::numbers::pi);
    const auto u = taylor_green(fine, 1.0);
    auto s = SystemState::zero(SystemKind::ns_stationary, fine);
    s.fields[0] = u;
    const auto spectral = assemble_nonlinear(s).get("B1").value.to_physical();

    const auto pu = u.to_physical();
    const std::size_t N = fine.physical_size();
    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
        std::vector<double> acc(N, 0.0);
        for (int j = 0; j < 3; ++j) {
            std::vector<double> prod(N);
            for (std::size_t p = 0; p < N; ++p) prod[p] = pu[i * N + p] * pu[j * N + p];
            const auto d = fd4(fine, prod, j);
            for (std::size_t p = 0; p < N; ++p) acc[p] += d[p];
        }
        for (std::size_t p = 0; p < N; ++p) err = std::max(err, std::abs(acc[p] - spectral[i * N + p]));
    }
    CHECK(err < 1e-4);
}

TEST_CASE("super-critical stress vanishes for a planar rotation") {
    const auto v = sample_field(grid, Rank::vector, [](const std::array<double, 3>& x, std::span<double> out) {
        out[0] = std::cos(x[0]);
        out[1] = std::sin(x[0]);
        out[2] = 0.0;
    });
    const auto gv = gradient(v);
    auto s = sel_with(SpectralField(grid, Rank::vector), gv, v);
    CHECK(max_abs(assemble_nonlinear(s).get("B2").value) < 1e-10);
    // |grad V|^2 = 1 there, so the cubic factor reduces to V itself.
    CHECK(rel(squared_norm_times(gv, v), v) < 1e-12);
}

TEST_CASE("term assembly against product-rule expansions") {
    Rng rng(11);
    const auto u = leray_project(random_band_limited(grid, Rank::vector, 3, rng));
    const auto vt = random_band_limited(grid, Rank::tensor, 3, rng);
    const auto v = helix_director(grid);
    const auto terms = assemble_nonlinear(sel_with(u, vt, v));

    // d_i (sum_l u_l Vt_lj) = sum_l (d_i u_l) Vt_lj + u_l d_i Vt_lj
    const auto gu = gradient(u);
    SpectralField b3(grid, Rank::tensor);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            SpectralField acc(grid, Rank::scalar);
            for (int l = 0; l < 3; ++l) {
                acc += pointwise_product(gu.scalar_component(tensor_component(i, l)), vt.scalar_component(tensor_component(l, j)));
                acc += pointwise_product(u.scalar_component(l),
                                         derivative(vt.scalar_component(tensor_component(l, j)), MultiIndex::unit(i)));
            }
            b3.set_component(tensor_component(i, j), acc);
        }
    CHECK(rel(terms.get("B3").value, b3) < 1e-10);

    // sum_j d_j (Vt_ik Vt_jk) expanded term by term
    SpectralField b2(grid, Rank::vector);
    for (int i = 0; i < 3; ++i) {
        SpectralField acc(grid, Rank::scalar);
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const auto a = vt.scalar_component(tensor_component(i, k));
                const auto b = vt.scalar_component(tensor_component(j, k));
                acc += pointwise_product(derivative(a, MultiIndex::unit(j)), b);
                acc += pointwise_product(a, derivative(b, MultiIndex::unit(j)));
            }
        b2.set_component(i, acc);
    }
    CHECK(rel(terms.get("B2").value, b2) < 1e-10);

    // |Vt|^2 V: modes stay below the cutoff, so summing squared components
    // first and multiplying afterwards must agree.
    SpectralField sq(grid, Rank::scalar);
    for (int c = 0; c < 9; ++c) sq += pointwise_product(vt.scalar_component(c), vt.scalar_component(c));
    CHECK(rel(terms.get("B4").value, gradient(pointwise_product(sq, v))) < 1e-10);
}

TEST_CASE("projected tendencies are divergence-free") {
    Rng rng(12);
    auto s = steady_target(SystemKind::mhd, grid, 0.5);
    s.fields[0] += leray_project(random_band_limited(grid, Rank::vector, 4, rng));
    const auto t = assemble_nonlinear(s).tendencies(grid);
    CHECK(max_abs(divergence(t[0])) < 1e-10);
    // The induction term div(b(x)u - u(x)b) is a curl, so it stays solenoidal too.
    CHECK(max_abs(divergence(t[1])) < 1e-10);
}

TEST_CASE("degenerations to Navier-Stokes") {
    Rng rng(13);
    const auto u = leray_project(random_band_limited(grid, Rank::vector, 4, rng));
    auto ns = SystemState::zero(SystemKind::ns_stationary, grid);
    ns.fields[0] = u;
    const auto ref = assemble_nonlinear(ns).tendencies(grid)[0];

    const auto sel = assemble_nonlinear(
        sel_with(u, SpectralField(grid, Rank::tensor), constant_vector(grid, 0.6, 0.8, 0.0)));
    CHECK(rel(sel.tendencies(grid)[0], ref) < 1e-12);
    CHECK(rel(sel.get("B1").value, assemble_nonlinear(ns).get("B1").value) == 0.0);
    CHECK(max_abs(sel.get("B2").value) == 0.0);

    auto mhd = SystemState::zero(SystemKind::mhd, grid);
    mhd.fields[0] = u;
    const auto m = assemble_nonlinear(mhd);
    CHECK(rel(m.tendencies(grid)[0], ref) < 1e-12);
    CHECK(max_abs(m.tendencies(grid)[1]) == 0.0);
}

TEST_CASE("Taylor-Green pressure closed form") {
    for (double amp : {1.0, 1e-3}) {
        auto s = steady_target(SystemKind::ns_stationary, grid, amp);
        CHECK(rel(momentum_pressure(s), taylor_green_pressure(grid, amp)) < 1e-12);
    }
}

TEST_CASE("manufactured forcing closes the stationary equations") {
    SUBCASE("trivial steady state needs no forcing") {
        auto s = SystemState::zero(SystemKind::sel_aux, grid);
        s.frozen = constant_vector(grid, 0.0, 1.0, 0.0);
        s.fields[1] = gradient(*s.frozen);
        const auto [f, g] = manufacture_forcing(s);
        CHECK(max_abs(f) == 0.0);
        CHECK(max_abs(g) == 0.0);
        const auto [fh, gh] = manufacture_forcing(steady_target(SystemKind::harmonic_map, grid, 1.0));
        CHECK(max_abs(gh) < 1e-15);
    }
    for (auto kind : {SystemKind::sel_aux, SystemKind::mhd, SystemKind::ns_stationary}) {
        CAPTURE(kind_name(kind));
        const auto target = steady_target(kind, grid, 1.0);
        const auto forced = with_manufactured_forcing(target);
        const auto bare = stationary_defect(target);
        const auto closed = stationary_defect(forced);
        for (std::size_t e = 0; e < closed.size(); ++e) {
            CHECK(max_abs(closed[e]) < 1e-9);
            CHECK(std::sqrt(closed[e].energy()) < 1e-9);
        }
        CHECK(max_abs(bare[0]) > 1e-3);
        // The pressure seen by the forced state is unchanged: div div F = 0.
        CHECK(rel(momentum_pressure(forced), momentum_pressure(target)) < 1e-12);
    }
}

TEST_CASE("forcing rejects targets without a divergence-form lift") {
    const auto v = sample_field(grid, Rank::vector, [](const std::array<double, 3>& x, std::span<double> out) {
        const double phi = std::sin(x[0]);
        out[0] = std::cos(phi);
        out[1] = std::sin(phi);
        out[2] = 0.0;
    });
    SystemState s;
    s.kind = SystemKind::harmonic_map;
    s.fields = {v};
    CHECK_THROWS_AS(manufacture_forcing(s), std::invalid_argument);

    auto nonunit = steady_target(SystemKind::harmonic_map, grid, 1.0);
    nonunit.fields[0] *= 1.01;
    CHECK_THROWS(manufacture_forcing(nonunit));
}

TEST_CASE("evolution forcing placement") {
    const auto forced = with_manufactured_forcing(steady_target(SystemKind::sel_aux, grid, 1.0));
    const auto f = forcing_terms(forced);
    const auto defect_free = stationary_defect(steady_target(SystemKind::sel_aux, grid, 1.0));
    // The tensor equation is forced by the gradient of the director residual.
    CHECK(rel(f[1], gradient(defect_free[1])) < 1e-12);
    CHECK(max_abs(divergence(f[0])) < 1e-12);
}
