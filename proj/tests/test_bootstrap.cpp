#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "regcheck/bootstrap.hpp"
#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

using namespace regcheck;

namespace {

const Grid g32(32, 2 * std::numbers::pi);

double l2(const SpectralField& f) { return std::sqrt(f.energy()); }

SystemState manufactured(SystemKind kind, double amp) { return with_manufactured_forcing(steady_target(kind, g32, amp)); }

// Pressure of a state evaluated from the Riesz multipliers written out per mode:
// P_k = sum_ij (-k_i k_j / |k|^2) (N - F)_ij,k.
SpectralField per_mode_pressure(const SystemState& s) {
    SpectralField n = momentum_stress(s);
    if (s.forcing_f) n -= *s.forcing_f;
    SpectralField p(s.grid(), Rank::scalar);
    for_each_mode(s.grid(), [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) return;
        Complex acc = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) acc -= k[i] * k[j] / k2 * n.component(tensor_component(i, j))[idx];
        p.component(0)[idx] = acc;
    });
    return p;
}

}  // namespace

TEST_CASE("stationary residual") {
    SUBCASE("zero state") {
        for (auto kind : {SystemKind::mhd, SystemKind::ns_stationary})
            CHECK(stationary_residual(SystemState::zero(kind, g32)).max_l2() == 0.0);
    }
    SUBCASE("manufactured states close") {
        for (auto kind : {SystemKind::sel_aux, SystemKind::mhd, SystemKind::ns_stationary}) {
            const auto r = stationary_residual(manufactured(kind, 0.7));
            CHECK(r.max_l2() < 1e-9);
            CHECK(r.max_h1() < 1e-9);
        }
        const auto hm = stationary_residual(with_manufactured_forcing(steady_target(SystemKind::harmonic_map, g32, 1.0)));
        CHECK(hm.max_l2() < 1e-9);
    }
    SUBCASE("scaled force leaves a proportional residual") {
        auto s = manufactured(SystemKind::mhd, 0.5);
        const auto base = stationary_residual(s);
        *s.forcing_f *= 1.1;
        const auto r = stationary_residual(s);
        const auto& u = r.equations[0];
        CHECK(u.l2 == doctest::Approx(0.1 * base.equations[0].force_l2).epsilon(0.05));
        CHECK(r.equations[1].l2 < 1e-9);
    }
    SUBCASE("agrees with the direct form after inversion") {
        Rng rng(3);
        auto s = SystemState::zero(SystemKind::mhd, g32);
        s.fields[0] = leray_project(random_band_limited(g32, Rank::vector, 4, rng));
        s.fields[1] = leray_project(random_band_limited(g32, Rank::vector, 4, rng));
        const auto direct = stationary_defect(s);
        CHECK(l2(integral_residual_field(s, 0) - inv_laplacian(leray_project(direct[0]))) < 1e-12);
        CHECK(l2(integral_residual_field(s, 1) - inv_laplacian(direct[1])) < 1e-12);
    }
}

TEST_CASE("pressure reconstruction") {
    SUBCASE("zero state") {
        const auto rep = pressure_check(SystemState::zero(SystemKind::ns_stationary, g32));
        CHECK(rep.pressure_l2 == 0.0);
        CHECK(rep.oracle_defect == 0.0);
    }
    SUBCASE("Taylor-Green against the Riesz oracle") {
        auto s = SystemState::zero(SystemKind::mhd, g32);
        s.fields[0] = taylor_green(g32, 1.0);
        const auto rep = pressure_check(s);
        CHECK(rep.oracle_defect < 1e-10);
        CHECK((momentum_pressure(s) - per_mode_pressure(s)).max_abs_coefficient() < 1e-12);
        CHECK((momentum_pressure(s) - taylor_green_pressure(g32, 1.0)).max_abs_coefficient() < 1e-12);
    }
    SUBCASE("manufactured states: defect vanishes and is a gradient without P") {
        for (auto kind : {SystemKind::sel_aux, SystemKind::mhd, SystemKind::ns_stationary}) {
            const auto rep = pressure_check(manufactured(kind, 0.8));
            CHECK(rep.oracle_defect < 1e-10);
            CHECK(rep.momentum_defect_l2 < 1e-9);
            CHECK(rep.curl_defect_l2 < 1e-9);
        }
    }
    SUBCASE("swapping u and b in mhd flips the sign of the magnetic share") {
        Rng rng(9);
        auto s = SystemState::zero(SystemKind::mhd, g32);
        s.fields[0] = leray_project(random_band_limited(g32, Rank::vector, 3, rng));
        s.fields[1] = leray_project(random_band_limited(g32, Rank::vector, 3, rng));
        auto swapped = s;
        std::swap(swapped.fields[0], swapped.fields[1]);
        CHECK((momentum_pressure(s) + momentum_pressure(swapped)).max_abs_coefficient() < 1e-13);
    }
}

TEST_CASE("product rule assembly") {
    Rng rng(4);
    auto s = SystemState::zero(SystemKind::mhd, g32);
    s.fields[0] = leray_project(random_band_limited(g32, Rank::vector, 3, rng));
    s.fields[1] = leray_project(random_band_limited(g32, Rank::vector, 3, rng));
    for (const auto& a : MultiIndex::of_order(2)) {
        const auto direct = derivative(momentum_stress(s), a);
        CHECK(l2(leibniz_stress(s, a) - direct) < 1e-10 * std::max(1.0, l2(direct)));
    }
    const auto v = helix_director(g32);
    for (const auto& a : MultiIndex::of_order(2)) {
        const auto direct = derivative(squared_norm_times(gradient(v), v), a);
        CHECK(l2(leibniz_trilinear(v, a) - direct) < 1e-9);
    }
    auto w = random_band_limited(g32, Rank::vector, 2, rng);
    const MultiIndex a(1, 2, 1);
    const auto direct = derivative(squared_norm_times(gradient(w), w), a);
    CHECK(l2(leibniz_trilinear(w, a) - direct) < 1e-9 * std::max(1.0, l2(direct)));
}

TEST_CASE("derivative bootstrap") {
    BootstrapConfig cfg;
    SUBCASE("manufactured mhd") {
        const auto rep = derivative_bootstrap_check(manufactured(SystemKind::mhd, 0.5), cfg);
        CHECK(rep.passed);
        REQUIRE(rep.orders.size() == 4);
        for (const auto& o : rep.orders) {
            CHECK(o.max_residual_l2 < 1e-8);
            CHECK(!o.under_resolved);
            for (const auto& f : o.fields) CHECK(f.morrey.size() == 3);
        }
        CHECK(rep.holder_constants.size() == 4);
        for (double c : rep.holder_constants) {
            CHECK(std::isfinite(c));
            CHECK(c > 0.0);
        }
        CHECK(rep.interpolation_constant > 0.0);
        CHECK(rep.interpolation_constant < 10.0);
        const auto j = rep.to_json();
        CHECK(j["orders"]["4"]["fields"]["b"]["morrey"].contains("1.5"));
    }
    SUBCASE("manufactured sel auxiliary state") {
        const auto rep = derivative_bootstrap_check(manufactured(SystemKind::sel_aux, 0.5), cfg);
        CHECK(rep.passed);
        REQUIRE(rep.trilinear_defect.has_value());
        CHECK(*rep.trilinear_defect < 1e-9);
        CHECK(rep.leibniz_defect < 1e-10);
    }
    SUBCASE("trivial solution: constant director, no flow") {
        auto s = SystemState::zero(SystemKind::sel_aux, g32);
        s.frozen = sample_field(g32, Rank::vector, [](const std::array<double, 3>&, std::span<double> o) {
            o[0] = 1.0, o[1] = 0.0, o[2] = 0.0;
        });
        const auto rep = derivative_bootstrap_check(s, cfg);
        CHECK(rep.passed);
        for (const auto& o : rep.orders)
            for (const auto& f : o.fields) {
                CHECK(f.linf == 0.0);
                for (double v : f.morrey) CHECK(v == 0.0);
            }
    }
    SUBCASE("a wrong force is caught") {
        auto s = manufactured(SystemKind::ns_stationary, 0.5);
        *s.forcing_f *= 1.01;
        const auto rep = derivative_bootstrap_check(s, cfg);
        CHECK(!rep.passed);
    }
    SUBCASE("fields near the cutoff are flagged") {
        Rng rng(2);
        auto s = SystemState::zero(SystemKind::ns_stationary, g32);
        s.fields[0] = leray_project(random_band_limited(g32, Rank::vector, 10, rng));
        s = with_manufactured_forcing(s);
        cfg.k = 0;
        cfg.holder_pairs = 20;
        const auto rep = derivative_bootstrap_check(s, cfg);
        CHECK(rep.orders.back().under_resolved);
    }
}
