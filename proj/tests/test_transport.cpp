#include "doctest.h"

#include "bvt/catalog.hpp"
#include "bvt/transport.hpp"

#include <random>

using namespace bvt;

TEST_CASE("quarter turn matches the block ODE") {
    const int k = 3;
    const double w = pow2(-2 - k);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-w, w);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        std::array<double, 2> d{U(rng), U(rng)};
        auto exact = quarter_turn(k, d);
        auto ode = integrate_block_ode(k, d, w, 1e-6);
        worst = std::max({worst, std::fabs(ode[0] - exact[0]), std::fabs(ode[1] - exact[1])});
        CHECK(square_rotate(d, 2.0) == exact);
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("fractional block advance agrees with the ODE") {
    const int k = 4;
    const double w = pow2(-2 - k);
    for (auto d : {std::array<double, 2>{0.3 * w, 0.1 * w}, {-0.6 * w, 0.2 * w}, {0.25 * w, -0.7 * w}}) {
        for (double frac : {0.1, 0.35, 0.5, 0.9, 1.7}) {
            auto ode = integrate_block_ode(k, d, frac * w, 1e-6);
            auto sq = square_rotate(d, 2.0 * frac);
            CHECK(std::fabs(ode[0] - sq[0]) < 1e-12);
            CHECK(std::fabs(ode[1] - sq[1]) < 1e-12);
        }
        auto half = square_rotate(square_rotate(d, 0.7), 1.3);
        auto exact = quarter_turn(k, d);
        CHECK(std::fabs(half[0] - exact[0]) < 1e-14);
        CHECK(std::fabs(half[1] - exact[1]) < 1e-14);
    }
}

TEST_CASE("symbolic chessboard evolution agrees with marker particles") {
    for (int k : {3, 4}) {
        auto S = evolve_chessboard(k);
        auto M = marker_oracle(k, 64, 400);
        REQUIRE(M.size() == S.size());
        for (std::size_t i = 0; i < S.size(); ++i) CHECK(S[i] == M[i]);
    }
}

TEST_CASE("flow map of beta is exact and reversible") {
    const int k = 3;
    const double s = pow2(-k);
    BetaField f(k);
    // dashed point in the moving band travels one unit sideways over step 1
    Vec3 x{1.0 * s, 2.5 * s, 0.5 * s};
    Vec3 y = flow_map(f, 0.0, s, x);
    CHECK(y[0] == 2.0 * s);
    CHECK(y[1] == doctest::Approx(1.5 * s).epsilon(1e-14));
    Vec3 back = flow_map(f, s, 0.0, y);
    CHECK(back[0] == x[0]);
    CHECK(back[1] == doctest::Approx(x[1]).epsilon(1e-14));
    // full traverse from the bottom of a dashed square
    Vec3 z = flow_map(f, 0.0, 4 * s, {0.0, 2.25 * s, 2.25 * s});
    CHECK(z[0] == 4 * s);
}

TEST_CASE("characteristics of tilde beta carry the transported chessboard") {
    const int k = 3;
    const double s = pow2(-k);
    auto field = periodic_extend(std::make_shared<TildeBetaField>(k), 4 * s);
    auto u = tilde_beta_solution(k);
    // u is steady and constant along characteristics: u(x) = u(Φ_{t→0}(x)) at generic points
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int mismatch = 0, tested = 0;
    for (int n = 0; n < 4000; ++n) {
        Vec3 x{4 * s * U(rng), 4 * s * U(rng), 4 * s * U(rng)};
        double back = std::min(x[0], s * U(rng) * 4);
        Vec3 x0 = flow_map(*field, back, 0.0, x);
        if (x0[0] <= 0.0) continue;
        ++tested;
        if ((*u)(0, x) != (*u)(0, x0)) ++mismatch;
    }
    CHECK(tested > 1000);
    CHECK(mismatch == 0);
}

TEST_CASE("pushforward density on a grid") {
    const int k = 3;
    const double s = pow2(-k);
    auto field = periodic_extend(std::make_shared<TildeBetaField>(k), 4 * s);
    auto u = tilde_beta_solution(k);
    auto g = make_grid(DomainBox{}, 7);
    int j0 = static_cast<int>(std::ldexp(2 * s, 7)), j1 = j0 + 4;
    std::size_t flagged = 0;
    auto img = pushforward_density(*field, *u, 0.0, 2 * s, g, j0, j1, 0.0, &flagged);
    // cell centres lying exactly on diagonal band edges are ambiguous; all others agree
    std::size_t mismatch = 0;
    for (int j = j0; j < j1; ++j)
        for (int i1 = 0; i1 < g.ny; ++i1)
            for (int i2 = 0; i2 < g.ny; ++i2)
                if ((*u)(0, {g.rc(j), g.yc(i1), g.yc(i2)}) != img.values[img.at(j, i1, i2)]) ++mismatch;
    CHECK(mismatch <= img.values.size() / 16);
    // backward characteristics from r >= 2s stay inside r > 0
    CHECK(flagged == 0);
}
