#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bvt/harness.hpp"

using namespace bvt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("bvt_test_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

// ============================================================================
// Configuration
// ============================================================================

TEST_CASE("config file with comments and command-line overrides") {
    auto dir = scratch("config");
    {
        std::ofstream f(dir / "run.cfg");
        f << "# pinned run\n\nsuite = traces\nvariant=corollary  # trailing comment\nkmax = 7\ncfl=0.2\n";
    }
    RunConfig cfg = load_config((dir / "run.cfg").string());
    CHECK(cfg.suite == "traces");
    CHECK(cfg.variant == Variant::Corollary);
    CHECK(cfg.k_max == 7);
    CHECK(cfg.cfl == 0.2);
    CHECK(cfg.level == RunConfig{}.level);
    apply_setting(cfg, "kmax", "5");
    CHECK(cfg.k_max == 5);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("bad configuration is a ConfigError") {
    RunConfig cfg;
    CHECK_THROWS_AS(apply_setting(cfg, "colour", "red"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "kmax", "six"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "kmax", "6.5"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "variant", "sideways"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "csv", "maybe"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);

    RunConfig unknown;
    unknown.suite = "everything";
    CHECK_THROWS_AS(unknown.validate(), ConfigError);
    CHECK_THROWS_AS(run_suite(unknown), ConfigError);
    RunConfig cfl;
    cfl.cfl = 0.5;
    CHECK_THROWS_AS(cfl.validate(), ConfigError);
    RunConfig kmax;
    kmax.k_max = 2;
    CHECK_THROWS_AS(kmax.validate(), ConfigError);
}

// ============================================================================
// Reports
// ============================================================================

TEST_CASE("global verdict accepts only expected witnesses") {
    Report rep;
    rep.suite = "demo";
    CheckRecord pass{"a", 0.0, 1.0, Verdict::Pass};
    CheckRecord expected{"b", 1.0, 0.5, Verdict::Witness, true};
    rep.checks = {pass, expected};
    CHECK(rep.pass());
    rep.checks.push_back({"c", 1.0, 0.5, Verdict::Witness, false});
    CHECK_FALSE(rep.pass());
    rep.checks.back() = {"c", 2.0, 1.0, Verdict::Fail};
    CHECK_FALSE(rep.pass());

    auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j["verdict"] == "FAIL");
    CHECK(j["checks"].size() == 3);
    CHECK(j["checks"][1]["verdict"] == "WITNESS");
    CHECK(j["checks"][1]["expected_witness"] == true);
}

TEST_CASE("a suite run writes its report and passes") {
    auto dir = scratch("suite");
    RunConfig cfg;
    cfg.suite = "mixing";
    cfg.out_dir = dir.string();
    auto rep = run_suite(cfg);
    CHECK(rep.pass());
    CHECK(rep.checks.size() == 4);
    auto j = nlohmann::json::parse(slurp(dir / "report_mixing.json"));
    CHECK(j["verdict"] == "PASS");
    CHECK(fs::exists(dir / "beta3_r0.0625.ppm"));
    CHECK(fs::exists(dir / "chessboard_k3_state0.ppm"));
}

// ============================================================================
// CSV output
// ============================================================================

TEST_CASE("trace CSV has the fixed schema and is byte-identical across worker counts") {
    auto dir = scratch("csv");
    auto field = assemble_field({Variant::Outward, 5});
    ProfileGrid g{1, 4};
    auto p = one_sided_trace(*field, 0.125, TraceSide::Above, g);
    write_trace_csv(p, (dir / "a.csv").string());
    const std::string a = slurp(dir / "a.csv");
    CHECK(a.rfind("t,y1,y2,value,source_tag,orientation\n", 0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 1 + g.nt() * g.ny() * g.ny());

    ::setenv("BVT_THREADS", "3", 1);
    auto p3 = one_sided_trace(*field, 0.125, TraceSide::Above, g);
    write_trace_csv(p3, (dir / "b.csv").string());
    ::unsetenv("BVT_THREADS");
    CHECK(slurp(dir / "b.csv") == a);
}

TEST_CASE("snapshot and log CSVs have the fixed schemas") {
    auto dir = scratch("fvcsv");
    Scenario sc;
    sc.field = make_constant_field({1, 0, 0});
    sc.domain = DomainBox{1.0, 0.5, 0.25};
    sc.level = 3;
    sc.g_bar = [](double, double, double) { return 1.0; };
    auto traj = solve_ibvp(sc);
    write_snapshot_csv(traj.final_state(), (dir / "s.csv").string());
    write_log_csv(traj, (dir / "l.csv").string());
    const std::string s = slurp(dir / "s.csv"), l = slurp(dir / "l.csv");
    CHECK(s.rfind("t,r,y1,y2,u\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 8 * 4 * 4);
    CHECK(l.rfind("step,t,mass,l1,l2,boundary_flux\n", 0) == 0);
    CHECK(std::count(l.begin(), l.end(), '\n') == 1 + static_cast<long>(traj.log.size()));
}

// ============================================================================
// Heatmaps
// ============================================================================

TEST_CASE("heatmap colour map: zero white, positive blue, negative black") {
    auto dir = scratch("ppm");
    const auto path = (dir / "m.ppm").string();
    emit_heatmap({0.0, 1.0, -5.0, 0.5}, 2, 2, -5.0, 1.0, path, 1);
    const std::string img = slurp(path);
    const std::string header = "P6\n2 2\n255\n";
    REQUIRE(img.size() == header.size() + 12);
    CHECK(img.substr(0, header.size()) == header);
    auto px = [&](int i) {
        const auto* d = reinterpret_cast<const unsigned char*>(img.data() + header.size() + 3 * i);
        return std::array<int, 3>{d[0], d[1], d[2]};
    };
    CHECK(px(0) == std::array<int, 3>{255, 255, 255});
    CHECK(px(1)[0] == 0);
    CHECK(px(1)[2] > px(1)[0]);
    CHECK(px(2) == std::array<int, 3>{0, 0, 0});
    CHECK(px(3)[0] > 0);
    CHECK(px(3)[0] < 255);
}

TEST_CASE("zero field renders as a uniform white image") {
    auto dir = scratch("zero");
    auto u = make_cell_field(make_grid(DomainBox{}, 3));
    emit_heatmap(u, 2, (dir / "z.ppm").string(), 2);
    const std::string img = slurp(dir / "z.ppm");
    const std::string header = "P6\n8 8\n255\n";
    REQUIRE(img.size() == header.size() + 8 * 8 * 3);
    CHECK(std::all_of(img.begin() + header.size(), img.end(), [](char c) { return c == '\xff'; }));
    CHECK_THROWS_AS(emit_heatmap(u, 99, (dir / "bad.ppm").string()), ConfigError);
    CHECK_THROWS_AS(emit_heatmap({1.0}, 2, 2, 0, 1, (dir / "bad.ppm").string()), ConfigError);
}

TEST_CASE("beta_3 at r = 2^-4 samples as the three-colour chessboard") {
    BetaField beta(3);
    auto v = lateral_samples(4, 0.5, [&](double y1, double y2) { return beta(0.0, {0.0625, y1, y2})[0]; });
    // b_r: dashed squares 1, white squares 0, black squares -5
    const std::vector<double> expected{1, 0, 1, 0, 0, -5, 0, -5, 1, 0, 1, 0, 0, -5, 0, -5};
    CHECK(v == expected);
}
