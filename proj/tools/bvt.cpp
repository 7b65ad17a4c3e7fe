/// @file bvt.cpp
/// @brief Command-line entry point: catalog, simulate, traces, verify, report.
///
/// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>

#include "bvt/harness.hpp"

using namespace bvt;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

/// Command-line overrides, applied on top of an optional --config file.
struct Overrides {
    std::string config_file;
    std::string suite, variant, kmax, level, out, cfl, tol, T;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_file, "flat key=value configuration file");
    app->add_option("--suite", o.suite, "suite name");
    app->add_option("--variant", o.variant, "construction variant tag");
    app->add_option("--kmax", o.kmax, "finest dyadic level K_max");
    app->add_option("--level", o.level, "grid level (h = 2^-level)");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--cfl", o.cfl, "CFL number");
    app->add_option("--tol", o.tol, "residual tolerance relative to the C1 norm");
    app->add_option("--horizon", o.T, "time horizon T");
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) cfg = load_config(o.config_file, cfg);
    const std::pair<const char*, const std::string*> pairs[] = {
        {"suite", &o.suite}, {"variant", &o.variant}, {"kmax", &o.kmax}, {"level", &o.level},
        {"out", &o.out},     {"cfl", &o.cfl},         {"tol", &o.tol},   {"T", &o.T}};
    for (const auto& [key, value] : pairs)
        if (!value->empty()) apply_setting(cfg, key, *value);
    return cfg;
}

int cmd_catalog(const RunConfig& cfg) {
    fmt::print("{:<18} {:>6} {:>8} {:>10}  {}\n", "variant", "black", "tangent", "Tr b(r=0)", "field");
    for (Variant v : all_variants()) {
        ConstructionVariant cv{v, cfg.k_max};
        auto field = assemble_field(cv);
        fmt::print("{:<18} {:>6g} {:>8} {:>+10g}  {}\n", to_string(v), cv.black(), cv.tangent() ? "yes" : "no",
                   boundary_trace_limit(v), field->name());
    }
    fmt::print("\nschedule for K_max = {}:\n", cfg.k_max);
    for (const auto& I : dyadic_schedule(cfg.k_max))
        fmt::print("  I_{:<2} = ]{:.10g}, {:.10g}[  period {:.10g}\n", I.k, I.lo, I.hi, pow2(2 - I.k));
    fmt::print("\nsuites:");
    for (const auto& s : suite_names()) fmt::print(" {}", s);
    fmt::print("\n");
    return kExitPass;
}

int cmd_simulate(const RunConfig& cfg) {
    Scenario sc;
    sc.name = fmt::format("{}_k{}_l{}", to_string(cfg.variant), cfg.k_max, cfg.level);
    sc.field = assemble_field({cfg.variant, cfg.k_max});
    sc.domain = DomainBox{1.0, 0.5, cfg.T};
    sc.level = cfg.level;
    sc.cfl = cfg.cfl;
    sc.g_bar = [](double, double, double) { return 1.0; };
    auto traj = solve_ibvp(sc);
    const auto& last = traj.log.back();
    fmt::print("{}: {} steps to t = {:.6g}; mass {:.6e}, L1 {:.6e}, L2^2 {:.6e}, sup {:.6g}\n", sc.name, last.step,
               last.t, last.mass, last.l1, last.l2, traj.final_state().max_abs());
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        const auto dir = std::filesystem::path(cfg.out_dir);
        write_log_csv(traj, (dir / (sc.name + "_log.csv")).string());
        if (cfg.write_csv) write_snapshot_csv(traj.final_state(), (dir / (sc.name + "_snapshot.csv")).string());
        if (cfg.write_ppm) {
            const auto& u = traj.final_state();
            for (double r : {0.125, 0.25, 0.5}) {
                const int j = static_cast<int>(r / u.grid.h);
                emit_heatmap(u, j, (dir / fmt::format("{}_r{}.ppm", sc.name, r)).string());
            }
        }
        fmt::print("wrote outputs to {}\n", cfg.out_dir);
    }
    return kExitPass;
}

int cmd_traces(const RunConfig& cfg) {
    ConstructionVariant v{cfg.variant, std::min(cfg.k_max, 8)};
    auto field = assemble_field(v);
    auto u = exact_solution(v);
    ProfileGrid g{2, std::min(cfg.level, 8)};
    fmt::print("{:>4} {:>12} {:>12} {:>12} {:>12}\n", "k", "r_k", "mean Tr b", "mean Tr bu", "L1 to limit");
    const auto limit = constant_profile(g, boundary_trace_limit(v.tag));
    for (int k = 3; k <= v.k_max; ++k) {
        const double rk = pow2(2 - k);
        auto tb = one_sided_trace(*field, rk, TraceSide::Above, g);
        auto tbu = flux_trace(*field, *u, 1, rk, TraceSide::Above, g);
        fmt::print("{:>4} {:>12.6g} {:>12.6g} {:>12.6g} {:>12.6g}\n", k, rk, tb.mean(), tbu.mean(),
                   tb.l1_distance(limit));
        if (!cfg.out_dir.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            const auto dir = std::filesystem::path(cfg.out_dir);
            const std::string stem = fmt::format("{}_k{}", to_string(v.tag), k);
            if (cfg.write_csv) {
                write_trace_csv(tb, (dir / ("trace_b_" + stem + ".csv")).string());
                write_trace_csv(tbu, (dir / ("trace_bu_" + stem + ".csv")).string());
            }
            if (cfg.write_ppm) emit_heatmap(tb, 0, (dir / ("trace_b_" + stem + ".ppm")).string());
        }
    }
    return kExitPass;
}

int cmd_verify(const RunConfig& cfg) {
    auto rep = run_suite(cfg);
    std::cout << rep.to_text();
    return rep.pass() ? kExitPass : kExitFail;
}

int cmd_report(const RunConfig& cfg, bool all) {
    std::vector<std::string> suites = all ? suite_names() : std::vector<std::string>{cfg.suite};
    bool pass = true;
    for (const auto& s : suites) {
        RunConfig c = cfg;
        c.suite = s;
        auto rep = run_suite(c);
        pass = pass && rep.pass();
        std::cout << rep.to_json() << "\n";
    }
    return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transport-equation boundary-trace verification harness"};
    app.require_subcommand(1);
    Overrides o;
    bool all = false;
    auto* catalog = app.add_subcommand("catalog", "list construction variants, schedule and suites");
    auto* simulate = app.add_subcommand("simulate", "upwind finite-volume run on an assembled field (inflow 1)");
    auto* traces = app.add_subcommand("traces", "one-sided normal trace profiles at r = 2^{2-k}");
    auto* verify = app.add_subcommand("verify", "run a suite and print PASS/FAIL per check");
    auto* report = app.add_subcommand("report", "run suites and print structured JSON reports");
    for (auto* sc : {catalog, simulate, traces, verify, report}) add_common(sc, o);
    report->add_flag("--all", all, "run every suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitUsage;
    }

    try {
        RunConfig cfg = resolve(o);
        cfg.validate();
        if (*catalog) return cmd_catalog(cfg);
        if (*simulate) return cmd_simulate(cfg);
        if (*traces) return cmd_traces(cfg);
        if (*verify) return cmd_verify(cfg);
        if (*report) return cmd_report(cfg, all);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return kExitUsage;
    } catch (const ScheduleError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return kExitUsage;
    } catch (const ResolutionError& e) {
        fmt::print(stderr, "resolution error: {}\n", e.what());
        return kExitUsage;
    } catch (const CflError& e) {
        fmt::print(stderr, "CFL error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitFail;
    }
    return kExitUsage;
}
