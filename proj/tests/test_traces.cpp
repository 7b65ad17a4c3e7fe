#include <doctest.h>

#include "bvt/catalog.hpp"
#include "bvt/traces.hpp"

using namespace bvt;

// ============================================================================
// Test functions
// ============================================================================

TEST_CASE("test battery shape") {
    auto tests = test_battery();
    REQUIRE(tests.size() == 20);
    int boundary = 0, initial = 0;
    for (const auto& f : tests) {
        CHECK(f.centre[0] + f.width[0] < 1.0);
        CHECK(f.centre[1] + f.width[1] < 1.0);
        CHECK(2.0 * f.width[2] <= f.L);
        if (!f.vanishes_on_boundary()) ++boundary;
        if (!f.vanishes_at_t0()) ++initial;
    }
    CHECK(boundary >= 3);
    CHECK(initial >= 3);
}

TEST_CASE("test function gradient matches central differences") {
    for (const auto& f : test_battery()) {
        const double t = f.centre[0] + 0.3 * f.width[0];
        const Vec3 x{f.centre[1] - 0.2 * f.width[1], f.centre[2] + 0.4 * f.width[2], f.centre[3] - 0.1 * f.width[3]};
        auto g = f.gradient(t, x);
        const double e = 1e-6;
        std::array<double, 4> fd{
            (f.value(t + e, x) - f.value(t - e, x)) / (2 * e),
            (f.value(t, {x[0] + e, x[1], x[2]}) - f.value(t, {x[0] - e, x[1], x[2]})) / (2 * e),
            (f.value(t, {x[0], x[1] + e, x[2]}) - f.value(t, {x[0], x[1] - e, x[2]})) / (2 * e),
            (f.value(t, {x[0], x[1], x[2] + e}) - f.value(t, {x[0], x[1], x[2] - e})) / (2 * e)};
        for (std::size_t a = 0; a < 4; ++a) CHECK(std::fabs(g[a] - fd[a]) <= 1e-5 * f.c1_norm());
        double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
        CHECK(gn <= f.c1_norm());
    }
}

TEST_CASE("lateral factors are periodic") {
    TestFunction f;
    f.centre = {0.5, 0.5, 0.03125, 0.46875};
    f.width = {0.2, 0.1, 0.0625, 0.0625};
    CHECK(f.factor(2, 0.0) == doctest::Approx(f.factor(2, 0.5)));
    CHECK(f.factor(3, 0.5) == doctest::Approx(f.factor(3, 0.0)));
    CHECK(f.factor(2, 0.49) > 0.0);
}

// ============================================================================
// Profiles and pairings
// ============================================================================

TEST_CASE("constant profile pairing equals the product of factor integrals") {
    ProfileGrid g{8, 8, 1.0, 0.5};
    auto p = constant_profile(g, 2.0);
    for (const auto& f : test_battery()) {
        double exact = 2.0 * f.factor_integral(0, 0.0, 1.0) * f.factor_integral(2, f.centre[2] - 1, f.centre[2] + 1) *
                       f.factor_integral(3, f.centre[3] - 1, f.centre[3] + 1);
        CHECK(p.pairing(f) == doctest::Approx(exact).epsilon(1e-3));
    }
}

TEST_CASE("trace planes must be dyadic") {
    auto field = make_constant_field({1, 0, 0});
    ProfileGrid g{2, 4};
    CHECK_THROWS_AS(one_sided_trace(*field, 0.3, TraceSide::Above, g), ResolutionError);
    auto p = one_sided_trace(*field, 0.25, TraceSide::Above, g);
    CHECK(p.mean() == -1.0);
    CHECK(p.orientation_string() == "(0,-1,0,0)");
}

TEST_CASE("Green identity for the zero-extended constant field") {
    // ∫_Λ (φ_t + b·∇φ) = ⟨Tr b, φ⟩ on r = 0 minus ∫ φ(0, x) dx, with Tr b = -1.
    auto field = make_constant_field({1, 0, 0});
    auto B = zero_extend(field, DomainBox{});
    TestFunction f;
    f.centre = {0.0625, 0.0, 0.25, 0.25};
    f.width = {0.25, 0.25, 0.125, 0.125};
    const double lat = f.factor_integral(2, 0.0, 0.5) * f.factor_integral(3, 0.0, 0.5);
    const double boundary = -f.factor(1, 0.0) * f.factor_integral(0, 0.0, 1.0) * lat;
    const double initial = f.factor(0, 0.0) * f.factor_integral(1, 0.0, 1.0) * lat;
    const double got = trace_pairing(B, f, 7);
    CHECK(got == doctest::Approx(boundary - initial).epsilon(2e-3));
}

TEST_CASE("exact pairing agrees with the profile lattice for a fixed beta") {
    BetaField beta(4);
    ProfileGrid g{7, 7};
    auto tests = test_battery();
    for (double r0 : {0.0625 + 0.03125, 0.125}) {
        auto p = one_sided_trace(beta, r0, TraceSide::Below, g);
        for (std::size_t i = 0; i < tests.size(); i += 3) {
            double e = trace_pairing_exact(beta, nullptr, 1, r0, TraceSide::Below, tests[i], g);
            // midpoint lattice error for the narrowest bumps is below 1%
            CHECK(e == doctest::Approx(p.pairing(tests[i])).epsilon(1e-2));
        }
    }
}

TEST_CASE("outward boundary traces converge weak-star to +1 at the scheduled rate") {
    ConstructionVariant v{Variant::Outward, 6};
    auto field = assemble_field(v);
    auto tests = test_battery();
    ProfileGrid g{6, 8};
    std::vector<PairingRow> rows;
    for (int k = 3; k <= 6; ++k) {
        const double rk = pow2(2 - k);
        for (std::size_t i = 0; i < tests.size(); ++i) {
            double e = trace_pairing_exact(*field, nullptr, 1, rk, TraceSide::Above, tests[i], g);
            // exact ⟨1, φ⟩
            const double lim = tests[i].factor_integral(0, 0.0, 1.0) *
                               tests[i].factor_integral(2, tests[i].centre[2] - 1, tests[i].centre[2] + 1) *
                               tests[i].factor_integral(3, tests[i].centre[3] - 1, tests[i].centre[3] + 1);
            rows.push_back({static_cast<std::size_t>(k), rk, i, std::fabs(e - lim), 0.0});
        }
    }
    auto rep = weak_star_summary(rows, tests, 4.0);
    CHECK(rep.pass);
    CHECK(rep.max_ratio < 4.0);
}

TEST_CASE("outward flux trace has mean -1/4 on the boundary") {
    ConstructionVariant v{Variant::Outward, 6};
    auto field = assemble_field(v);
    auto u = exact_solution(v);
    TestFunction f;
    f.centre = {0.5, 0.0, 0.25, 0.25};
    f.width = {0.375, 0.125, 0.125, 0.125};
    ProfileGrid g{6, 8};
    double e = trace_pairing_exact(*field, u.get(), 1, 0.0, TraceSide::Above, f, g);
    double mass = f.factor_integral(0, 0.0, 1.0) * f.factor_integral(2, 0.125, 0.375) *
                  f.factor_integral(3, 0.125, 0.375);
    CHECK(std::fabs(e / mass + 0.25) < 0.02);
}

// ============================================================================
// Strong traces and renormalization
// ============================================================================

TEST_CASE("one-sided traces of a fixed beta converge strongly within the slab variation") {
    const int k = 4;
    BetaField beta(k);
    const double s = pow2(-k), r0 = 1.5 * s;
    ProfileGrid g{0, 8};
    auto limit = one_sided_trace(beta, r0, TraceSide::Above, g);
    std::vector<TraceProfile> gam;
    std::vector<double> bounds;
    for (int j = 1; j <= 6; ++j) {
        const double r = r0 + s * pow2(-j - 1);
        gam.push_back(one_sided_trace(beta, r, TraceSide::Above, g));
        bounds.push_back(beta_slab_total_variation(k, -5.0, r0, r));
    }
    auto rep = strong_l1_check(gam, limit, bounds);
    CHECK(rep.within_bound);
    CHECK(rep.rows.back().l1 < rep.rows.front().l1 + 1e-15);
    CHECK(rep.rows.back().l1 < 0.05);
}

TEST_CASE("trace jump of beta lives on its end plane") {
    BetaField beta(3);
    ProfileGrid g{0, 6};
    // branches connect across step planes; the field ends at r = 2^{2-k}
    CHECK(trace_jump(beta, 0.25, g).linf() == 0.0);
    CHECK(trace_jump(beta, 0.125 + 0.03125, g).linf() == 0.0);
    auto jump = trace_jump(beta, 0.5, g);
    CHECK(jump.linf() == 5.0);
    CHECK(jump.mean() == doctest::Approx(1.0));
}

TEST_CASE("renormalized traces of beta carrying its dashed solution") {
    for (int k = 3; k <= 4; ++k) {
        BetaField beta(k);
        auto u = beta_dashed_solution(k);
        ProfileGrid g{0, k + 3};
        for (double r0 : {pow2(-k) * 0.5, pow2(-k) * 1.25, pow2(-k) * 3.0}) {
            auto tb = one_sided_trace(beta, r0, TraceSide::Above, g);
            auto tub = flux_trace(beta, *u, 1, r0, TraceSide::Above, g);
            auto tu2b = flux_trace(beta, *u, 2, r0, TraceSide::Above, g);
            auto rep = renormalization_trace_check(tu2b, tub, tb);
            CHECK(rep.pass);
            CHECK(rep.tangential > 0);
        }
    }
}

TEST_CASE("boundary classification for the inward variant") {
    ConstructionVariant v{Variant::Inward, 5};
    auto field = assemble_field(v);
    auto u = exact_solution(v);
    // cell centres must avoid the frozen chessboard edges (multiples of 2^{-2-k_max})
    ProfileGrid g{3, 8};
    auto tb = coarse_grain(one_sided_trace(*field, 0.0, TraceSide::Above, g), 2);
    auto tub = coarse_grain(flux_trace(*field, *u, 1, 0.0, TraceSide::Above, g), 2);
    auto rep = boundary_condition_check(tb, tub, [](double, double, double) { return 0.0; });
    CHECK(rep.checked);
    CHECK(rep.gamma_minus == 1.0);
    CHECK(rep.discrepancy_l1 < 1e-12);
}

TEST_CASE("initial trace of the outward solution vanishes") {
    auto u = exact_solution({Variant::Outward, 6});
    auto it = initial_trace(*u, DomainBox{}, 4, 2);
    CHECK(it.max_abs[2] <= it.max_abs[0]);
    CHECK(it.w0.max_abs() <= 0.25);
    CHECK(it.cauchy);
}
