#include "doctest.h"

#include "bvt/geometry.hpp"

using namespace bvt;

TEST_CASE("grid construction validates dyadic extents") {
    auto g = make_grid(DomainBox{}, 5);
    CHECK(g.nr == 32);
    CHECK(g.ny == 16);
    CHECK(g.h == 1.0 / 32);
    CHECK_THROWS_AS(make_grid(DomainBox{}, 2), ConfigError);
    CHECK_THROWS_AS(make_grid(DomainBox{1.0, 0.3, 1.0}, 5), ConfigError);
}

TEST_CASE("constant field has zero discrete divergence") {
    ConstantField f({1.0, 0.3, -0.2});
    auto g = make_grid(DomainBox{}, 4);
    auto d = discrete_divergence(sample_face_fluxes(f, g, Slab{SlabAxis::Time, 0.0, 1.0}));
    CHECK(d.max_abs() < 1e-12);
}

namespace {
// b = (sin(2π y1 / L), 0, 0): smooth, divergence free, non-trivial lateral structure
struct Shear : VelocityField {
    Vec3 operator()(double, const Vec3& x) const override { return {0.0, 0.0, std::sin(4 * M_PI * x[1])}; }
    std::string name() const override { return "shear"; }
};
// b = (r, 0, 0): divergence 1
struct Stretch : VelocityField {
    Vec3 operator()(double, const Vec3& x) const override { return {x[0], 0.0, 0.0}; }
    std::string name() const override { return "stretch"; }
};
}  // namespace

TEST_CASE("discrete divergence reproduces analytic divergence") {
    auto g = make_grid(DomainBox{}, 4);
    CHECK(discrete_divergence(sample_face_fluxes(Shear{}, g, Slab{})).max_abs() < 1e-12);
    auto d = discrete_divergence(sample_face_fluxes(Stretch{}, g, Slab{}));
    for (double v : d.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mollified divergence of smooth and constant fields") {
    Box3 win{{0.3, 0.0, 0.0}, {0.5, 0.5, 0.5}};
    ConstantField c({1.0, 0.0, 0.0});
    auto md = mollified_divergence_l1(c, 0.5, 0.05, win, 4);
    CHECK(md.exact_pieces);
    CHECK(md.l1 < 1e-10);
    auto st = mollified_divergence_l1(Stretch{}, 0.5, 0.05, win, 4);
    CHECK_FALSE(st.exact_pieces);
    CHECK(st.l1 == doctest::Approx(0.2 * 0.25).epsilon(2e-3));
    // zero extension creates the boundary layer at r = 0
    Box3 edge{{0.0, 0.0, 0.0}, {0.05, 0.5, 0.5}};
    auto bl = mollified_divergence_l1(c, 0.5, 0.05, edge, 4);
    CHECK(bl.boundary_layer);
    CHECK(bl.l1 > 0.1);
}

TEST_CASE("square rotation") {
    std::array<double, 2> d{1.0, 0.5};
    auto q = square_rotate(d, 2.0);
    CHECK(q[0] == 0.5);
    CHECK(q[1] == -1.0);
    auto full = square_rotate(d, 8.0);
    CHECK(full == d);
    auto step = square_rotate(d, 0.5);  // down the right side by half a unit of l
    CHECK(step[0] == 1.0);
    CHECK(step[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("zero extension") {
    auto z = zero_extend(make_constant_field({2.0, 0.0, 0.0}), DomainBox{});
    CHECK(z(0.5, {0.2, 0.1, 0.1})[0] == 1.0);
    CHECK(z(0.5, {0.2, 0.1, 0.1})[1] == 2.0);
    CHECK(z(1.5, {0.2, 0.1, 0.1})[0] == 0.0);
    CHECK(z(0.5, {-0.1, 0.1, 0.1})[1] == 0.0);
    CHECK(z.linf_bound == 2.0);
}
