#include "doctest.h"

#include <cstdlib>

#include "bvt/core.hpp"

using namespace bvt;

TEST_CASE("dyadic helpers are exact") {
    CHECK(pow2(-3) == 0.125);
    CHECK(is_multiple_of_pow2(0.375, 3));
    CHECK_FALSE(is_multiple_of_pow2(0.375, 2));
    CHECK(wrap(-0.125, 0.5) == 0.375);
    CHECK(wrap(0.5, 0.5) == 0.0);
    CHECK(wrap(1.25, 0.5) == 0.25);
}

TEST_CASE("gauss rules integrate polynomials of degree 2n-1 exactly") {
    for (int n : {2, 4, 8}) {
        int deg = 2 * n - 1;
        double got = gauss_integrate([deg](double x) { return std::pow(x, deg - 1); }, 0.0, 2.0, n);
        double want = std::pow(2.0, deg) / deg;
        CHECK(got == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("bump profile and its tabulated antiderivative") {
    CHECK(bump::value(0.0) == 1.0);
    CHECK(bump::value(1.0) == 0.0);
    CHECK(bump::value(-1.2) == 0.0);
    // mass against a fine Gauss rule on subintervals
    double m = 0.0;
    for (int i = 0; i < 64; ++i) m += gauss_integrate(bump::value, -1.0 + i / 32.0, -1.0 + (i + 1) / 32.0, 8);
    CHECK(bump::mass() == doctest::Approx(m).epsilon(1e-12));
    CHECK(bump::integral(-1.0) == 0.0);
    CHECK(bump::integral(1.0) == doctest::Approx(m).epsilon(1e-12));
    CHECK(bump::integral(0.0) == doctest::Approx(0.5 * m).epsilon(1e-12));
    double part = 0.0;
    for (int i = 0; i < 32; ++i) part += gauss_integrate(bump::value, -1.0 + i * 1.3 / 32, -1.0 + (i + 1) * 1.3 / 32, 8);
    CHECK(std::fabs(bump::integral(0.3) - part) < 1e-12);
    // derivative against a central difference
    double h = 1e-6, s = 0.4;
    CHECK(bump::deriv(s) == doctest::Approx((bump::value(s + h) - bump::value(s - h)) / (2 * h)).epsilon(1e-7));
    CHECK(bump::second(s) == doctest::Approx((bump::deriv(s + h) - bump::deriv(s - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("parallel reductions are bit-identical across worker counts") {
    auto term = [](std::size_t i) { return std::sin(0.001 * static_cast<double>(i)) / (1.0 + i); };
    setenv("BVT_THREADS", "1", 1);
    double one = parallel_sum(100000, term, 1000);
    setenv("BVT_THREADS", "4", 1);
    double four = parallel_sum(100000, term, 1000);
    unsetenv("BVT_THREADS");
    CHECK(one == four);
}
