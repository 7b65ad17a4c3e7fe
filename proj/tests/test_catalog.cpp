#include "doctest.h"

#include "bvt/catalog.hpp"

using namespace bvt;

TEST_CASE("schedule location") {
    auto a = locate(0.5, 6);  // left end of I_3
    CHECK(a.k == 3);
    CHECK(a.P == 0.0);
    CHECK_FALSE(a.frozen);
    auto b = locate(0.25 + 3.5 * 0.0625, 6);  // I_4, P = 3.5
    CHECK(b.k == 4);
    CHECK(b.P == 3.5);
    auto c = locate(pow2(2 - 6) * 0.99, 6);
    CHECK(c.frozen);
    CHECK(c.k == 6);
    CHECK(locate(0.999, 6).k == 3);
    CHECK(dyadic_schedule(6).size() == 4u);
    CHECK_THROWS_AS(parse_variant("sideways"), ConfigError);
    CHECK(parse_variant("tangent_corollary") == Variant::TangentCorollary);
    CHECK_THROWS_AS((ConstructionVariant{Variant::Outward, 3}.validate()), ConfigError);
}

TEST_CASE("beta table covers each step consistently") {
    // every step: dashed area 4 and black area 4 in the unit cell [0,4)^2
    for (int step = 0; step < 4; ++step)
        for (double dP : {0.0, 0.3, 0.9}) {
            int n = 64, dashed = 0, black = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double Y1 = (i + 0.5) * 4.0 / n, Y2 = (j + 0.5) * 4.0 / n;
                    int b = beta_find(step, dP, Y1, Y2);
                    if (b < 0) continue;
                    (beta_steps()[step].branches[b].dashed ? dashed : black)++;
                }
            CHECK(dashed == n * n / 4);
            CHECK(black == n * n / 4);
        }
}

TEST_CASE("beta branches connect across step boundaries") {
    // the end of step j and the start of step j+1 carry the same dashed/black sets
    for (int step = 0; step < 3; ++step) {
        int n = 64, mismatch = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double Y1 = (i + 0.5) * 4.0 / n, Y2 = (j + 0.5) * 4.0 / n;
                int lo = beta_find(step, 1.0, Y1, Y2), hi = beta_find(step + 1, 0.0, Y1, Y2);
                bool dl = lo >= 0 && beta_steps()[step].branches[lo].dashed;
                bool dh = hi >= 0 && beta_steps()[step + 1].branches[hi].dashed;
                bool bl = lo >= 0 && !beta_steps()[step].branches[lo].dashed;
                bool bh = hi >= 0 && !beta_steps()[step + 1].branches[hi].dashed;
                mismatch += (dl != dh) + (bl != bh);
            }
        CHECK(mismatch == 0);
    }
}

TEST_CASE("beta is exactly divergence free on aligned grids") {
    for (int k : {3, 4}) {
        BetaField f(k);
        auto g = make_grid(DomainBox{}, k + 3);
        const double s = pow2(-k);
        for (int step = 0; step < 4; ++step) {
            auto flux = sample_face_fluxes(f, g, Slab{SlabAxis::R, step * s, (step + 1) * s});
            auto d = discrete_divergence(flux);
            CHECK(d.max_abs() == 0.0);
        }
        CHECK_THROWS_AS(sample_face_fluxes(f, g, Slab{SlabAxis::R, 0.0, 2 * s}), ScheduleError);
    }
}

TEST_CASE("tilde beta and alpha are divergence free per stage") {
    const int k = 3;
    const double w = pow2(-2 - k);
    TildeBetaField f(k);
    auto g = make_grid(DomainBox{}, k + 4);
    for (auto [a, b] : {std::pair{0.0, w}, {w, 3 * w}, {3 * w, 4 * w}}) {
        auto d = discrete_divergence(sample_face_fluxes(f, g, Slab{SlabAxis::R, a, b}));
        CHECK(d.max_abs() < 1e-9);
    }
    AlphaField alpha(k);
    auto d = discrete_divergence(sample_face_fluxes(alpha, g, Slab{SlabAxis::Time, w, 3 * w}));
    CHECK(d.max_abs() < 1e-9);
}

TEST_CASE("assembled fields are divergence free up to both boundary planes") {
    const int kmax = 4;
    auto g = make_grid(DomainBox{}, kmax + 2);
    for (Variant v : all_variants()) {
        auto f = assemble_field({v, kmax});
        for (double t : {0.25, 0.5, 0.75}) {
            auto flux = sample_face_fluxes(*f, g, Slab{SlabAxis::Time, t, t});
            CHECK(discrete_divergence(flux).max_abs() == 0.0);
            // the top plane carries the outflow of the cell below it
            double top = 0.0;
            for (int i1 = 0; i1 < g.ny; ++i1)
                for (int i2 = 0; i2 < g.ny; ++i2) top += std::fabs(flux.fr[flux.rface(g.nr, i1, i2)]);
            CHECK(top > 0.0);
        }
    }
}

TEST_CASE("datum and its full-cycle image") {
    for (int k : {3, 4, 5}) {
        auto z = chessboard_datum(k);
        CHECK(z.mean() == 0.0);
        CHECK(z.at(0, 0) == datum_sign(k));
        auto S = evolve_chessboard(k);
        REQUIRE(S.size() == 4u);
        // the final state is the 2x coarsened datum of the next coarser level
        auto coarse = chessboard_datum(k - 1);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(S[3].at(i, j) == coarse.at(i / 2, j / 2));
    }
}

TEST_CASE("z_value follows the stage states") {
    const int k = 4;
    const double s = pow2(-k), w = s / 4;
    auto S = evolve_chessboard(k);
    for (int st = 0; st < 4; ++st) {
        double rho = st == 0 ? 0.0 : (st == 1 ? w : (st == 2 ? 3 * w : 4 * w));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(z_value(k, rho, (i + 0.5) * w, (j + 0.5) * w) == S[st].at(i, j));
    }
}

TEST_CASE("total variation of beta on a slab") {
    // step 0 has no lateral motion: TV consists of the square edges only.
    // Per unit cell: each of the 8 squares has perimeter 4 with jump |b| on the boundary to zero.
    const int k = 3;
    const double s = pow2(-k);
    double tv = beta_slab_total_variation(k, -5.0, 0.0, s);
    double perim = 4.0 * (4 * 1.0 + 4 * 5.0);  // unit-cell edge length times jump, per unit P
    CHECK(tv == doctest::Approx(perim / 16.0).epsilon(1e-10));
    // r-differences never exceed the slab variation
    for (double r0 : {0.1, 0.2, 0.3}) {
        double r1 = r0 + 0.1;
        int n = 128;
        double diff = 0.0;
        BetaField f(k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Vec3 a = f(0, {r0, (i + 0.5) * 4 * s / n, (j + 0.5) * 4 * s / n});
                Vec3 b = f(0, {r1, (i + 0.5) * 4 * s / n, (j + 0.5) * 4 * s / n});
                diff += norm(b - a) / (n * n);
            }
        CHECK(diff <= beta_slab_total_variation(k, -5.0, r0, r1) + 1e-12);
    }
}

TEST_CASE("assembled variants near the boundary") {
    for (Variant v : all_variants()) {
        ConstructionVariant cv{v, 6};
        auto f = assemble_field(cv);
        // Λ⁺ carries no lateral component
        Vec3 b = (*f)(0.3, {0.6, 0.01, 0.02});
        CHECK(b[1] == 0.0);
        CHECK(b[2] == 0.0);
        // mean of -b_r over the lateral cell at small r reproduces the trace limit
        const double r = pow2(2 - 6) * 1.001, s = pow2(-6);
        int n = 64;
        double mean = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mean -= (*f)(0.9, {r, (i + 0.5) * 4 * s / n, (j + 0.5) * 4 * s / n})[0];
        CHECK(mean / (n * n) == doctest::Approx(boundary_trace_limit(v)).epsilon(1e-12));
    }
}

TEST_CASE("exact solutions on the characteristic pattern") {
    ConstructionVariant cv{Variant::Outward, 6};
    auto u = exact_solution(cv);
    const double s = pow2(-3);
    CHECK((*u)(0.9, {0.5 + 0.5 * s, 0.5 * s, 0.5 * s}) == 1.0);
    CHECK((*u)(0.9, {0.5 + 0.5 * s, 1.5 * s, 1.5 * s}) == 0.0);
    CHECK((*u)(0.4, {0.5 + 0.5 * s, 0.5 * s, 0.5 * s}) == 0.0);  // above the surface r = t
    CHECK(u->boundary_flux_limit == -0.25);
    ConstructionVariant cc{Variant::Corollary, 6};
    auto uc = exact_solution(cc);
    // on a dashed square at P >= 1: mean zero chessboard
    double m = 0.0;
    int n = 32;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m += (*uc)(0.95, {0.5 + 3.5 * s, (i + 0.5) * 2 * s / n, (j + 0.5) * 2 * s / n});
    CHECK(m == 0.0);
}
