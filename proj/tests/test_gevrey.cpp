#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "regcheck/gevrey.hpp"
#include "regcheck/operators.hpp"
#include "regcheck/random.hpp"

using namespace regcheck;

namespace {

const Grid g32(32, 2 * std::numbers::pi);
const Grid g16(16, 2 * std::numbers::pi);

GevreyRunConfig quick_config(double b = 0.5) {
    GevreyRunConfig cfg;
    cfg.b = b;
    cfg.picard.n_times = 32;
    return cfg;
}

}  // namespace

TEST_CASE("run configuration") {
    GevreyRunConfig cfg;
    cfg.b = 0.5;
    cfg.T0 = 2.0;
    cfg.T1 = 1.0;
    CHECK(cfg.beta() == 2.0 * 0.5 / (3.0 * std::sqrt(2.0)));
    CHECK(cfg.b1() == cfg.beta() * 1.0 / 2.0);
    const double before = cfg.beta();
    cfg.T0 = 1.0;
    CHECK(cfg.beta() == doctest::Approx(before * std::sqrt(2.0)).epsilon(1e-15));
    cfg.T1 = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.T1 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.T1 = 1.0;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.to_json()["beta"].get<double>() == cfg.beta());
}

TEST_CASE("analyticity radius fit") {
    SUBCASE("constructed decay field") {
        const auto f = gevrey_decay_field(g32, Rank::scalar, 0.5, 1.0, 11);
        const auto fit = analyticity_radius_fit(f);
        CHECK(fit.a == doctest::Approx(0.5).epsilon(0.05));
        CHECK(fit.exponential);
        CHECK(fit.shells_used >= 4);
        CHECK(fit.to_csv().rfind("shell,k,log_amplitude,used\n", 0) == 0);
    }
    SUBCASE("smoothing shifts the rate") {
        const auto f = gevrey_smooth(gevrey_decay_field(g32, Rank::scalar, 0.5, 1.0, 12), 0.2);
        CHECK(analyticity_radius_fit(f).a == doctest::Approx(0.3).epsilon(0.05));
    }
    SUBCASE("solenoidal vector field keeps its rate") {
        const auto f = gevrey_decay_field(g32, Rank::vector, 0.8, 1.0, 13, true);
        CHECK(analyticity_radius_fit(f).a == doctest::Approx(0.8).epsilon(0.05));
    }
    SUBCASE("finitely many shells are refused") {
        CHECK_THROWS_AS(analyticity_radius_fit(taylor_green(g32, 1.0)), std::domain_error);
        CHECK_THROWS_AS(analyticity_radius_fit(SpectralField(g32, Rank::scalar)), std::domain_error);
    }
}

TEST_CASE("force preparation") {
    auto cfg = quick_config();
    cfg.T1 = cfg.T0;
    SUBCASE("zero forces") {
        const SpectralField z(g16, Rank::tensor);
        const auto pf = prepare_forces(z, z, cfg);
        CHECK(pf.forces.size() == static_cast<std::size_t>(cfg.picard.n_times + 1));
        for (const auto& parts : pf.forces.states)
            for (const auto& f : parts) CHECK(f.max_abs_coefficient() == 0.0);
        CHECK(pf.chain.direct == 0.0);
        CHECK(pf.chain.bound == 0.0);
        CHECK(pf.chain.monotone);
    }
    SUBCASE("decaying potentials: chain is ordered and the bound is reproduced") {
        const auto F = gevrey_decay_field(g32, Rank::tensor, 0.5, 1.0, 21);
        const auto G = gevrey_decay_field(g32, Rank::tensor, 0.7, 0.5, 22);
        const auto pf = prepare_forces(F, G, cfg);
        const auto& ch = pf.chain;
        CHECK(ch.monotone);
        CHECK(std::isfinite(ch.direct));
        CHECK(ch.direct > 0.0);
        CHECK(ch.direct == doctest::Approx(ch.spectral).epsilon(1e-10));
        CHECK(ch.exponential == doctest::Approx(ch.bound).epsilon(1e-12));
        CHECK(ch.bound_direct == doctest::Approx(ch.bound).epsilon(0.1));
        CHECK(ch.rewrite_defect < 1e-12);
        CHECK(ch.c4 == doctest::Approx(256.0 * std::exp(-4.0)));
        // The rewrite is an identity: every stored f(t) is div F.
        const auto divF = divergence(F);
        CHECK((pf.forces.states.back()[0] - divF).max_abs_coefficient() < 1e-12 * divF.max_abs_coefficient());
    }
    SUBCASE("weights beyond double range are refused") {
        Rng rng(5);
        const auto F = random_grid_field(g32, Rank::tensor, rng);
        auto wide = cfg;
        wide.b = 200.0;
        CHECK_THROWS_AS(prepare_forces(F, F, wide), IllPosedRequest);
    }
}

TEST_CASE("weighted solve") {
    SUBCASE("zero data stay zero") {
        auto cfg = quick_config();
        cfg.T1 = 0.5;
        const auto out = gevrey_weighted_solve(SystemState::zero(SystemKind::mhd, g16), cfg);
        CHECK(out.trace.converged);
        CHECK(out.trace.residual == 0.0);
        for (const auto& parts : out.trajectory.states)
            for (const auto& f : parts) CHECK(f.max_abs_coefficient() == 0.0);
    }
    SUBCASE("manufactured Gevrey steady state") {
        const auto data = with_manufactured_forcing(gevrey_steady_target(g32, 0.5, 0.05, 31));
        auto cfg = quick_config();
        const auto h = gevrey_horizon(data, cfg, 3, 7);
        REQUIRE(h.T1 > 0.0);
        CHECK(h.T1 <= cfg.T0);
        cfg.T1 = h.T1;
        CHECK(h.b1 == cfg.b1());
        const auto out = gevrey_weighted_solve(data, cfg);
        CHECK(out.trace.converged);
        CHECK(out.trace.residual < 1e-8);
        CHECK(out.drift_from_data < 1e-5);
        REQUIRE(out.forces.has_value());
        CHECK(out.forces->monotone);
        CHECK(std::isfinite(out.gevrey_norm_b1));
        for (const auto& f : out.trajectory.states.back()) {
            const auto fit = analyticity_radius_fit(f);
            CHECK(fit.a >= 0.8 * cfg.b1());
        }
        CHECK(out.to_json()["trace"].contains("iterations"));
    }
}

TEST_CASE("horizon bisection on large data") {
    auto data = gevrey_steady_target(g16, 0.5, 20.0, 33);
    auto cfg = quick_config();
    const auto h = gevrey_horizon(data, cfg, 3, 7);
    CHECK(!h.clamped);
    REQUIRE(h.T1 > 0.0);
    CHECK(h.T1 < cfg.T0);
    CHECK(4.0 * h.c_bilinear * std::pow(h.T1, 0.25) * h.linear_norm < 1.0);
    CHECK(h.b1 == doctest::Approx(h.beta * h.T1 / 2.0));
}

TEST_CASE("weighted bilinear constant is stable under quadrature refinement") {
    PicardConfig pc;
    pc.T = 0.5;
    pc.n_times = 16;
    const double beta = quick_config().beta();
    const auto coarse = fit_weighted_bilinear(g16, beta, pc, 3, 1.0, 41);
    pc.n_times = 32;
    const auto fine = fit_weighted_bilinear(g16, beta, pc, 3, 1.0, 41);
    CHECK(coarse.c_fit > 0.0);
    CHECK(fine.c_fit == doctest::Approx(coarse.c_fit).epsilon(0.15));
}

TEST_CASE("weighted product law") {
    const auto pb = weighted_product_bound(g32, 0.3, 20, 4, 51);
    CHECK(pb.ratios.size() == 20);
    CHECK(std::isfinite(pb.c_fit));
    CHECK(pb.c_fit > 0.0);
    CHECK(pb.c_fit / pb.median < 10.0);
}

TEST_CASE("unforced data: every strip width is reachable") {
    Rng rng(61);
    auto data = SystemState::zero(SystemKind::mhd, g16);
    for (int f = 0; f < 2; ++f) {
        auto v = leray_project(random_band_limited(g16, Rank::vector, 3, rng));
        v *= 0.1 / sobolev_norm(v, 1.0);
        data.fields[f] = std::move(v);
    }
    for (double b : {0.1, 0.5, 1.0}) {
        auto cfg = quick_config(b);
        const auto h = gevrey_horizon(data, cfg, 3, 62);
        cfg.T1 = h.T1;
        const auto out = gevrey_weighted_solve(data, cfg);
        CHECK_MESSAGE(out.trace.converged, "b = " << b);
        CHECK(out.config.beta() == 2.0 * b / 3.0);
    }
}
