#include <doctest.h>

#include "bvt/catalog.hpp"
#include "bvt/fv.hpp"

using namespace bvt;

namespace {

Scenario front_scenario(int level) {
    Scenario sc;
    sc.name = "front";
    sc.field = make_constant_field({1, 0, 0});
    sc.domain = DomainBox{1.0, 0.5, 0.5};
    sc.level = level;
    sc.g_bar = [](double, double, double) { return 1.0; };
    return sc;
}

double G(double xi, double e1, double e2) {
    return std::sin(2 * M_PI * xi) * std::cos(4 * M_PI * e1) + 0.5 * std::cos(4 * M_PI * e2);
}

Scenario smooth_scenario(int level, double cfl, std::shared_ptr<SmoothShearField>& field) {
    field = std::make_shared<SmoothShearField>(0.5, 2 * M_PI);
    Scenario sc;
    sc.name = "smooth";
    sc.field = field;
    sc.domain = DomainBox{1.0, 0.5, 0.5};
    sc.level = level;
    sc.cfl = cfl;
    auto f = field;
    sc.u_bar = [f](const Vec3& x) {
        auto A = f->lateral_shift(x[0]);
        return G(x[0], x[1] - A[0], x[2] - A[1]);
    };
    sc.g_bar = [](double t, double y1, double y2) { return G(-t, y1, y2); };
    return sc;
}

}  // namespace

// ============================================================================
// Upwind scheme
// ============================================================================

TEST_CASE("zero data stays zero") {
    Scenario sc = front_scenario(4);
    sc.g_bar = nullptr;
    auto traj = solve_ibvp(sc);
    CHECK(traj.final_state().max_abs() == 0.0);
}

TEST_CASE("constant field fills a front at unit speed") {
    for (int level : {4, 5}) {
        auto traj = solve_ibvp(front_scenario(level));
        const auto& u = traj.final_state();
        const double h = u.grid.h;
        double depth = 0.0;
        for (int j = 0; j < u.grid.nr; ++j) depth += u.values[u.at(j, 0, 0)] * h;
        CHECK(std::fabs(depth - u.t) <= h);
        for (double v : u.values) {
            CHECK(v >= -1e-15);
            CHECK(v <= 1.0 + 1e-15);
        }
        // lateral uniformity
        CHECK(u.values[u.at(2, 0, 0)] == u.values[u.at(2, 3, 5)]);
    }
}

TEST_CASE("mass balance equals the boundary flux per step") {
    std::shared_ptr<SmoothShearField> f;
    Scenario sc = smooth_scenario(4, 0.4, f);
    sc.source = [](double t, const Vec3& x) { return std::cos(3 * t) * x[0]; };
    auto traj = solve_ibvp(sc);
    for (std::size_t i = 1; i < traj.log.size(); ++i) {
        const auto& a = traj.log[i - 1];
        const auto& b = traj.log[i];
        CHECK(std::fabs(b.mass - a.mass + b.dt * b.boundary_flux - b.source_mass) < 1e-13);
    }
}

TEST_CASE("CFL violations are refused") {
    auto g = make_grid(DomainBox{1.0, 0.5, 1.0}, 3);
    auto field = make_constant_field({1, 0, 0});
    auto flux = sample_face_fluxes(*field, g, Slab{SlabAxis::Time, 0, 0});
    auto u = make_cell_field(g);
    CHECK_THROWS_AS(upwind_step(u, flux, 0.5 * g.h, nullptr, nullptr), CflError);
    CHECK_NOTHROW(upwind_step(u, flux, 0.45 * g.h, nullptr, nullptr));
    Scenario bad = front_scenario(3);
    bad.cfl = 0.5;
    CHECK_THROWS_AS(solve_ibvp(bad), ConfigError);
}

TEST_CASE("smooth scenario converges to the characteristic solution") {
    std::vector<double> err;
    for (int level : {3, 4, 5}) {
        std::shared_ptr<SmoothShearField> f;
        Scenario sc = smooth_scenario(level, 0.4, f);
        sc.domain.T = 0.25;
        auto traj = solve_ibvp(sc);
        const auto& u = traj.final_state();
        auto exact = FunctionSolution("smooth_exact",
                                      [f](double t, const Vec3& x) {
                                          auto A = f->lateral_shift(x[0]);
                                          return G(x[0] - t, x[1] - A[0], x[2] - A[1]);
                                      },
                                      1.5);
        err.push_back(l1_difference(u, sample_solution(exact, u, u.t)));
        // max principle for the divergence-free field
        CHECK(u.max_abs() <= 1.5 + 1e-12);
        CHECK(l2_balance_report(traj).nonincreasing);
    }
    CHECK(std::log2(err[1] / err[2]) >= 0.5);
    CHECK(std::log2(err[0] / err[1]) >= 0.5);
}

// ============================================================================
// Weak residual
// ============================================================================

TEST_CASE("weak residual of exact solutions") {
    const DomainBox dom{1.0, 0.5, 1.0};
    auto tests = test_battery();

    SUBCASE("zero solution") {
        ZeroSolution z;
        auto field = make_constant_field({1, 0, 0});
        for (const auto& phi : tests) CHECK(weak_residual(z, *field, phi, dom, {}).value == 0.0);
    }
    SUBCASE("front solution with inflow data, lattice quadrature") {
        auto field = make_constant_field({1, 0, 0});
        FunctionSolution u("front", [](double t, const Vec3& x) { return x[0] < t ? 1.0 : 0.0; }, 1.0);
        ResidualData data;
        data.tr_bu = boundary_flux_data([](double, double, double) { return -1.0; },
                                        [](double, double, double) { return 1.0; }, nullptr);
        std::vector<double> res;
        for (int level : {5, 6}) {
            ResidualOptions opt;
            opt.lattice_level = level;
            res.push_back(std::fabs(weak_residual(u, *field, tests[0], dom, data, opt).value));
        }
        CHECK(res[1] < res[0]);
        CHECK(res[1] < 1e-3 * tests[0].c1_norm());
    }
    SUBCASE("outward variant: both u = 0 and the dashed solution") {
        ConstructionVariant v{Variant::Outward, 6};
        auto field = assemble_field(v);
        auto u = exact_solution(v);
        ZeroSolution z;
        for (const auto& phi : tests) {
            auto rep = weak_residual(*u, *field, phi, dom, {});
            CHECK(rep.method == "pieces");
            CHECK(std::fabs(rep.value) <= 1e-3 * phi.c1_norm());
            CHECK(std::fabs(weak_residual(z, *field, phi, dom, {}).value) <= 1e-3 * phi.c1_norm());
        }
    }
    SUBCASE("pieces and lattice quadrature agree on an interior test") {
        ConstructionVariant v{Variant::Outward, 5};
        auto field = assemble_field(v);
        auto u = exact_solution(v);
        TestFunction phi;
        phi.centre = {0.625, 0.375, 0.25, 0.25};
        phi.width = {0.25, 0.125, 0.125, 0.125};
        auto exact = weak_residual(*u, *field, phi, dom, {});
        ResidualOptions opt;
        opt.force_lattice = true;
        std::vector<double> err;
        for (int level : {6, 7}) {
            opt.lattice_level = level;
            err.push_back(std::fabs(weak_residual(*u, *field, phi, dom, {}, opt).value - exact.value));
        }
        CHECK(err[1] < err[0]);
    }
    SUBCASE("inward variant with zero data") {
        ConstructionVariant v{Variant::Inward, 5};
        auto field = assemble_field(v);
        auto u = exact_solution(v);
        ResidualData data;
        data.tr_bu = boundary_flux_data([](double, double, double) { return -1.0; }, nullptr, nullptr);
        for (std::size_t i = 0; i < tests.size(); i += 2) {
            auto rep = weak_residual(*u, *field, tests[i], dom, data);
            CHECK(std::fabs(rep.value) <= 1e-3 * tests[i].c1_norm());
        }
    }
}

// ============================================================================
// Cone energy
// ============================================================================

TEST_CASE("cone weight invariants") {
    ConeWeight w;
    w.speed = 2.0;
    auto inv = check_cone_invariants(w, 100000, DomainBox{});
    CHECK(inv.violations == 0);
    CHECK(inv.symmetric_violations > 0);
    CHECK(inv.profile_monotone);
    CHECK(inv.cutoff_monotone);
    CHECK(w.value(w.t_bar, {0.1, 0.3, 0.2}) == w.value_symmetric(w.t_bar, {0.1, 0.3, 0.2}));
    CHECK(w.cutoff(4, w.t_bar) == 1.0);
    CHECK(w.cutoff(4, w.t_bar + 0.25) == 0.0);
}

TEST_CASE("cone energy separates the outward witness from zero") {
    ConstructionVariant v{Variant::Outward, 6};
    auto field = assemble_field(v);
    ConeWeight w;
    w.speed = field->linf_bound;
    auto rep = cone_energy_check(*exact_solution(v), *field, w, DomainBox{}, 6, 1e-3);
    CHECK(rep.verdict == Verdict::Witness);
    CHECK(rep.energy >= 0.01);
    ZeroSolution z;
    CHECK(cone_energy_check(z, *field, w, DomainBox{}, 6, 1e-3).verdict == Verdict::Pass);
}

TEST_CASE("upwind on an aligned assembled field keeps inflow data within [0, 1]") {
    Scenario sc;
    sc.name = "assembled_inflow";
    sc.field = assemble_field({Variant::Inward, 4});
    sc.domain = DomainBox{1.0, 0.5, 0.25};
    sc.level = 6;
    sc.g_bar = [](double, double, double) { return 1.0; };
    auto traj = solve_ibvp(sc);
    const auto& u = traj.final_state();
    CHECK(*std::max_element(u.values.begin(), u.values.end()) <= 1.0 + 1e-12);
    CHECK(*std::min_element(u.values.begin(), u.values.end()) >= -1e-12);
    for (std::size_t i = 1; i < traj.log.size(); ++i) {
        const auto& a = traj.log[i - 1];
        const auto& b = traj.log[i];
        CHECK(std::fabs(b.mass - a.mass + b.dt * b.boundary_flux) < 1e-13);
    }
}
