#include "bvt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <random>
#include <sstream>

#include "bvt/transport.hpp"

namespace bvt {

// ============================================================================
// Configuration
// ============================================================================

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"wellposed", "nonuniqueness_inward", "nonuniqueness_outward",
                                                "corollary", "traces", "mixing"};
    return names;
}

void RunConfig::validate() const {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end())
        throw ConfigError(fmt::format("unknown suite '{}'", suite));
    ConstructionVariant{variant, k_max}.validate();
    if (level < 3 || level > 10) throw ConfigError(fmt::format("grid level {} outside [3, 10]", level));
    if (!(T > 0.0) || T > 1.0) throw ConfigError(fmt::format("horizon {} outside ]0, 1]", T));
    if (!(cfl > 0.0) || cfl > 0.45) throw ConfigError(fmt::format("CFL number {} outside ]0, 0.45]", cfl));
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
    }
}

int parse_int(const std::string& key, const std::string& v) {
    double x = parse_double(key, v);
    if (x != std::floor(x)) throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
    return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "suite")
        cfg.suite = value;
    else if (key == "variant")
        cfg.variant = parse_variant(value);
    else if (key == "kmax")
        cfg.k_max = parse_int(key, value);
    else if (key == "level")
        cfg.level = parse_int(key, value);
    else if (key == "T")
        cfg.T = parse_double(key, value);
    else if (key == "cfl")
        cfg.cfl = parse_double(key, value);
    else if (key == "tol")
        cfg.tol = parse_double(key, value);
    else if (key == "out")
        cfg.out_dir = value;
    else if (key == "csv")
        cfg.write_csv = parse_bool(key, value);
    else if (key == "ppm")
        cfg.write_ppm = parse_bool(key, value);
    else
        throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected key=value", path, n));
        apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

// ============================================================================
// Reports
// ============================================================================

bool Report::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.ok(); });
}

std::string Report::to_json() const {
    nlohmann::ordered_json j;
    j["suite"] = suite;
    j["config"] = {{"variant", to_string(config.variant)}, {"kmax", config.k_max}, {"level", config.level},
                   {"T", config.T},  {"cfl", config.cfl},   {"tol", config.tol}};
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json r;
        r["name"] = c.name;
        r["measured"] = std::isfinite(c.measured) ? nlohmann::ordered_json(c.measured) : nlohmann::ordered_json();
        r["bound"] = std::isfinite(c.bound) ? nlohmann::ordered_json(c.bound) : nlohmann::ordered_json();
        r["verdict"] = to_string(c.verdict);
        r["expected_witness"] = c.expect_witness;
        r["runtime_s"] = c.runtime_s;
        r["detail"] = c.detail;
        arr.push_back(r);
    }
    j["checks"] = arr;
    j["verdict"] = pass() ? "PASS" : "FAIL";
    j["runtime_s"] = runtime_s;
    return j.dump(2);
}

std::string Report::to_text() const {
    std::string s = fmt::format("suite {} ({} checks, {:.1f} s)\n", suite, checks.size(), runtime_s);
    for (const auto& c : checks)
        s += fmt::format("  {:<8} {:<36} measured {:<12.5g} bound {:<12.5g} {}\n", to_string(c.verdict), c.name,
                         c.measured, c.bound, c.detail);
    s += fmt::format("verdict: {}\n", pass() ? "PASS" : "FAIL");
    return s;
}

// ============================================================================
// Check helpers
// ============================================================================

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Record with measured <= bound as the pass condition.
CheckRecord upper(std::string name, double measured, double bound, std::string detail = {}) {
    CheckRecord c;
    c.name = std::move(name);
    c.measured = measured;
    c.bound = bound;
    c.verdict = measured <= bound ? Verdict::Pass : Verdict::Fail;
    c.detail = std::move(detail);
    return c;
}

/// Record with measured >= bound as the pass condition.
CheckRecord lower(std::string name, double measured, double bound, std::string detail = {}) {
    CheckRecord c = upper(std::move(name), measured, bound, std::move(detail));
    c.verdict = measured >= bound ? Verdict::Pass : Verdict::Fail;
    return c;
}

/// Expected witness: WITNESS when measured >= threshold.
CheckRecord witness(std::string name, double measured, double threshold, std::string detail = {}) {
    CheckRecord c = lower(std::move(name), measured, threshold, std::move(detail));
    c.verdict = measured >= threshold ? Verdict::Witness : Verdict::Fail;
    c.expect_witness = true;
    return c;
}

const DomainBox kUnitDomain{1.0, 0.5, 1.0};

/// ∫_0^T ∫_D φ_surface (a constant trace value 1).
double surface_mass(const TestFunction& phi, double T) {
    return phi.amplitude * phi.factor_integral(0, 0.0, T) *
           phi.factor_integral(2, phi.centre[2] - phi.width[2], phi.centre[2] + phi.width[2]) *
           phi.factor_integral(3, phi.centre[3] - phi.width[3], phi.centre[3] + phi.width[3]);
}

/// Weak-star summary of trace pairings at r_k = 2^{2-k}, k = 3..k_max, against a constant limit.
WeakStarReport plane_pairings(const VelocityField& field, const ScalarSolution* u, int k_max, double limit,
                              const std::vector<TestFunction>& tests, double C) {
    ProfileGrid fallback{k_max, k_max + 3};
    std::vector<PairingRow> rows;
    for (int k = 3; k <= k_max; ++k) {
        const double rk = pow2(2 - k);
        for (std::size_t i = 0; i < tests.size(); ++i) {
            const double p = trace_pairing_exact(field, u, 1, rk, TraceSide::Above, tests[i], fallback);
            rows.push_back({static_cast<std::size_t>(k), rk, i, std::fabs(p - limit * surface_mass(tests[i], 1.0)),
                            0.0});
        }
    }
    return weak_star_summary(std::move(rows), tests, C);
}

std::string rate_detail(const WeakStarReport& w) {
    return fmt::format("max error/(Lip r_k) = {:.3g}, fitted rate {:.2f}", w.max_ratio, w.fitted_rate);
}

struct PieceMass : PieceVisitor {
    double mass = 0.0, abs_mass = 0.0;
    void rect(double a1, double b1, double a2, double b2, double U, const Vec3&) override {
        const double a = (b1 - a1) * (b2 - a2);
        mass += U * a;
        abs_mass += std::fabs(U) * a;
    }
    void fan(const FanPiece& f, double U, double, double) override {
        const double a = 0.5 * f.half * f.half * (f.ub - f.ua);
        mass += U * a;
        abs_mass += std::fabs(U) * a;
    }
};

/// ∫_{r0}^{r1} ∫_D |U| for a solution that is stationary below the surface.
double pieces_l1(const ScalarSolution& u, double r0, double r1, double L) {
    std::vector<double> cuts{r0};
    for (double b : u.r_breakpoints(r0, r1)) cuts.push_back(b);
    cuts.push_back(r1);
    const GaussRule& g = gauss_legendre(2);
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s], b = cuts[s + 1];
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            PieceMass pm;
            u.pieces(a + 0.5 * (b - a) * (g.x[i] + 1.0), 0.0, L, 0.0, L, pm);
            total += 0.5 * (b - a) * g.w[i] * pm.abs_mass;
        }
    }
    return total;
}

double max_residual_ratio(const ScalarSolution& u, const VelocityField& field, const std::vector<TestFunction>& tests,
                          const ResidualData& data, std::string* method) {
    double worst = 0.0;
    for (const auto& phi : tests) {
        auto rep = weak_residual(u, field, phi, kUnitDomain, data);
        worst = std::max(worst, std::fabs(rep.value) / rep.c1_norm);
        if (method) *method = rep.method;
    }
    return worst;
}

double max_abs_divergence(const FaceFluxField& flux, int j_lo, int j_hi) {
    auto div = discrete_divergence(flux);
    double m = 0.0;
    for (int j = std::max(j_lo, div.j0); j < std::min(j_hi, div.j1); ++j)
        for (int i1 = 0; i1 < div.grid.ny; ++i1)
            for (int i2 = 0; i2 < div.grid.ny; ++i2) m = std::max(m, std::fabs(div.values[div.at(j, i1, i2)]));
    return m;
}

double smooth_G(double xi, double e1, double e2) {
    return std::sin(2 * M_PI * xi) * std::cos(4 * M_PI * e1) + 0.5 * std::cos(4 * M_PI * e2);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

}  // namespace

// ============================================================================
// Checks
// ============================================================================

std::vector<CheckRecord> check_divergence_exactness(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    auto t0 = Clock::now();
    double worst_beta = 0.0, worst_tilde = 0.0;
    for (int k = 3; k <= 6; ++k) {
        const double s = pow2(-k), w = s / 4.0;
        const DyadicGrid grid = make_grid(kUnitDomain, k + 2);
        BetaField beta(k);
        TildeBetaField tilde(k);
        for (int j = 0; j < 4; ++j) {
            auto f = sample_face_fluxes(beta, grid, Slab{SlabAxis::R, j * s, (j + 1) * s});
            worst_beta = std::max(worst_beta, max_abs_divergence(f, 0, grid.nr));
        }
        const std::array<double, 7> cuts{0.0, w, 3 * w, s, 2 * s, 3 * s, 4 * s};
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            auto f = sample_face_fluxes(tilde, grid, Slab{SlabAxis::R, cuts[c], cuts[c + 1]});
            worst_tilde = std::max(worst_tilde, max_abs_divergence(f, 0, grid.nr));
        }
    }
    out.push_back(upper("divergence_beta_k", worst_beta, 1e-12, "k = 3..6, level k+2, every cell of each step slab"));
    out.push_back(upper("divergence_tilde_beta_k", worst_tilde, 1e-12, "k = 3..6, level k+2, stage and step slabs"));
    out.back().runtime_s = out.front().runtime_s = seconds_since(t0);

    auto t1 = Clock::now();
    const int kmax = std::min(cfg.k_max, 6);
    const DyadicGrid grid = make_grid(kUnitDomain, kmax + 2);
    double worst = 0.0;
    for (Variant v : all_variants()) {
        auto field = assemble_field({v, kmax});
        // t = 1/2 puts the surface r = t mid-domain: Λ⁻ below it, Λ⁺ above
        auto f = sample_face_fluxes(*field, grid, Slab{SlabAxis::Time, 0.5, 0.5});
        worst = std::max(worst, max_abs_divergence(f, 0, grid.nr));
    }
    out.push_back(upper("divergence_assembled", worst, 1e-12,
                        fmt::format("all variants, K_max = {}, level {}, t = 1/2, every cell",
                                    kmax, kmax + 2)));
    out.back().runtime_s = seconds_since(t1);
    return out;
}

std::vector<CheckRecord> check_boundary_traces(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    const auto tests = test_battery();
    const int kmax = cfg.k_max;
    for (auto [v, limit] : {std::pair{Variant::Outward, 1.0}, std::pair{Variant::Inward, -1.0}}) {
        auto t0 = Clock::now();
        auto field = assemble_field({v, kmax});
        auto w = plane_pairings(*field, nullptr, kmax, limit, tests, 4.0);
        CheckRecord c = upper(fmt::format("trace_b_{}", to_string(v)), w.max_ratio, 4.0,
                              fmt::format("limit {:+g}; {}", limit, rate_detail(w)));
        c.verdict = w.pass ? Verdict::Pass : Verdict::Fail;
        c.runtime_s = seconds_since(t0);
        out.push_back(c);
    }
    return out;
}

std::vector<CheckRecord> check_outward_witness(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    const auto tests = test_battery();
    ConstructionVariant v{Variant::Outward, cfg.k_max};
    auto field = assemble_field(v);
    auto u = exact_solution(v);
    ZeroSolution zero;

    auto t0 = Clock::now();
    std::string method;
    const double ru = max_residual_ratio(*u, *field, tests, {}, &method);
    out.push_back(upper("residual_outward_solution", ru, cfg.tol,
                        fmt::format("max |R(phi)|/|phi|_C1 over 20 tests, K_max = {}, {}", cfg.k_max, method)));
    out.back().runtime_s = seconds_since(t0);

    t0 = Clock::now();
    const double rz = max_residual_ratio(zero, *field, tests, {}, nullptr);
    out.push_back(upper("residual_zero_solution", rz, cfg.tol, "u = 0 with zero data"));
    out.back().runtime_s = seconds_since(t0);

    // dashed-area fraction over one period cell, on every level including the frozen one
    t0 = Clock::now();
    double worst = 0.0;
    for (int k = 3; k <= cfg.k_max; ++k) {
        const double a = pow2(2 - k), s = pow2(-k);
        for (double f : {0.1, 0.6, 1.3, 1.9, 2.5, 3.7}) {
            PieceMass pm;
            u->pieces(a + f * s, 0.0, 4 * s, 0.0, 4 * s, pm);
            worst = std::max(worst, std::fabs(pm.mass / (16 * s * s) - 0.25));
        }
    }
    {
        const double s = pow2(-cfg.k_max);
        PieceMass pm;
        u->pieces(0.5 * pow2(2 - cfg.k_max), 0.0, 4 * s, 0.0, 4 * s, pm);
        worst = std::max(worst, std::fabs(pm.mass / (16 * s * s) - 0.25));
    }
    out.push_back(upper("period_average_deviation", worst, 0.02, "|mean of u over a period cell - 1/4| in Lambda-"));
    out.back().runtime_s = seconds_since(t0);

    const double l1 = pieces_l1(*u, 0.0, 0.5, 0.5);
    out.push_back(witness("nonunique_outward", l1, 0.01,
                          "||u(1/2)||_L1 of the nontrivial solution; u = 0 solves the same problem"));
    return out;
}

std::vector<CheckRecord> check_inward_witness(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    const auto tests = test_battery();
    const int kmax = std::min(cfg.k_max, 6);
    ConstructionVariant v{Variant::Inward, kmax};
    auto field = assemble_field(v);
    auto u = exact_solution(v);

    auto t0 = Clock::now();
    ResidualData data;
    auto zero = [](double, double, double) { return 0.0; };
    data.tr_bu = boundary_flux_data([](double, double, double) { return -1.0; }, zero, nullptr);
    std::string method;
    const double r = max_residual_ratio(*u, *field, tests, data, &method);
    out.push_back(upper("residual_inward_solution", r, cfg.tol,
                        fmt::format("zero initial and inflow data, K_max = {}, {}", kmax, method)));
    out.back().runtime_s = seconds_since(t0);

    t0 = Clock::now();
    const double l1 = pieces_l1(*u, 0.0, 0.5, 0.5);
    out.push_back(lower("inward_l1_lambda_minus", l1, 0.1, "||v(1/2)||_L1 over Lambda-"));
    out.back().runtime_s = seconds_since(t0);

    t0 = Clock::now();
    auto w = plane_pairings(*field, u.get(), kmax, 0.0, tests, 4.0);
    CheckRecord c = upper("inward_flux_trace_to_zero", w.max_ratio, 4.0, rate_detail(w));
    c.verdict = w.pass ? Verdict::Pass : Verdict::Fail;
    c.runtime_s = seconds_since(t0);
    out.push_back(c);
    out.push_back(witness("nonunique_inward", l1, 0.1, "nontrivial solution with zero data; u = 0 also solves"));
    return out;
}

std::vector<CheckRecord> check_corollary_traces(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    const auto tests = test_battery();
    const int kmax = std::min(cfg.k_max, 6);
    ConstructionVariant v{Variant::Corollary, kmax};
    auto field = assemble_field(v);
    auto u = exact_solution(v);

    auto t0 = Clock::now();
    auto wbu = plane_pairings(*field, u.get(), kmax, 0.0, tests, 4.0);
    CheckRecord c = upper("corollary_flux_trace_to_zero", wbu.max_ratio, 4.0, rate_detail(wbu));
    c.verdict = wbu.pass ? Verdict::Pass : Verdict::Fail;
    c.runtime_s = seconds_since(t0);
    out.push_back(c);

    t0 = Clock::now();
    auto wb = plane_pairings(*field, nullptr, kmax, 1.0, tests, 4.0);
    c = upper("corollary_trace_b_to_one", wb.max_ratio, 4.0, rate_detail(wb));
    c.verdict = wb.pass ? Verdict::Pass : Verdict::Fail;
    c.runtime_s = seconds_since(t0);
    out.push_back(c);

    // outward variant: the boundary flux averages to -1/4 against every test
    t0 = Clock::now();
    ConstructionVariant ov{Variant::Outward, cfg.k_max};
    auto ofield = assemble_field(ov);
    auto ou = exact_solution(ov);
    double worst = 0.0;
    ProfileGrid fallback{cfg.k_max, cfg.k_max + 3};
    for (const auto& phi : tests) {
        const double p = trace_pairing_exact(*ofield, ou.get(), 1, 0.0, TraceSide::Above, phi, fallback);
        worst = std::max(worst, std::fabs(p / surface_mass(phi, 1.0) + 0.25));
    }
    out.push_back(upper("outward_flux_trace_quarter", worst, 0.02,
                        fmt::format("max |<Tr(bu), phi>/<1, phi> + 1/4| at r = 0, K_max = {}", cfg.k_max)));
    out.back().runtime_s = seconds_since(t0);
    return out;
}

std::vector<CheckRecord> check_trace_renormalization(const RunConfig&) {
    auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t triples = 0, points = 0;
    for (int k = 3; k <= 5; ++k) {
        const double s = pow2(-k);
        BetaField beta(k);
        TildeBetaField tilde(k);
        auto ub = beta_dashed_solution(k);
        auto ut = tilde_beta_solution(k);
        ProfileGrid g{0, k + 4};
        for (double f : {0.25, 0.5, 0.75, 1.0, 1.5, 2.25, 3.0, 3.5})
            for (TraceSide side : {TraceSide::Above, TraceSide::Below})
                for (int which = 0; which < 2; ++which) {
                    const VelocityField& field = which == 0 ? static_cast<const VelocityField&>(beta) : tilde;
                    const ScalarSolution& u = which == 0 ? *ub : *ut;
                    auto tb = one_sided_trace(field, f * s, side, g);
                    auto tub = flux_trace(field, u, 1, f * s, side, g);
                    auto tu2b = flux_trace(field, u, 2, f * s, side, g);
                    auto rep = renormalization_trace_check(tu2b, tub, tb);
                    worst = std::max(worst, rep.max_residual);
                    points += rep.points;
                    ++triples;
                }
    }
    auto c = upper("trace_renormalization", worst, 1e-12,
                   fmt::format("{} profile triples ({} points), beta_k and tilde beta_k, k = 3..5", triples, points));
    c.runtime_s = seconds_since(t0);
    return {c};
}

std::vector<CheckRecord> check_strong_traces(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    auto t0 = Clock::now();
    bool within = true, to_zero = true;
    double worst_ratio = 0.0;
    for (int k = 3; k <= 5; ++k) {
        const double s = pow2(-k);
        BetaField beta(k);
        ProfileGrid g{0, k + 4};
        for (double f0 : {1.25, 2.5}) {
            const double r0 = f0 * s;
            auto limit = one_sided_trace(beta, r0, TraceSide::Above, g);
            std::vector<TraceProfile> gam;
            std::vector<double> bounds;
            for (int j = 0; j < 6; ++j) {
                const double r = r0 + s * pow2(-j - 2);
                gam.push_back(one_sided_trace(beta, r, TraceSide::Above, g));
                bounds.push_back(beta_slab_total_variation(k, beta.black(), r0, r));
            }
            auto rep = strong_l1_check(gam, limit, bounds);
            within = within && rep.within_bound;
            to_zero = to_zero && rep.decreasing && rep.rows.back().l1 <= rep.rows.front().l1 / 8.0;
            for (const auto& row : rep.rows)
                if (row.bound > 0) worst_ratio = std::max(worst_ratio, row.l1 / row.bound);
        }
    }
    CheckRecord c = upper("strong_trace_fixed_k", worst_ratio, 1.0,
                          fmt::format("max ||gamma_r - gamma_0||_L1 / |Db|(S); converging to zero: {}", to_zero));
    c.verdict = within && to_zero && worst_ratio <= 1.0 ? Verdict::Pass : Verdict::Fail;
    c.runtime_s = seconds_since(t0);
    out.push_back(c);

    // outward variant at r0 = 0: no strong convergence to the weak-star limit
    t0 = Clock::now();
    const int kmax = std::min(cfg.k_max, 6);
    auto field = assemble_field({Variant::Outward, kmax});
    ProfileGrid g{kmax, kmax + 2};
    auto limit = constant_profile(g, boundary_trace_limit(Variant::Outward));
    double least = std::numeric_limits<double>::infinity();
    for (int k = 3; k <= kmax; ++k)
        least = std::min(least, one_sided_trace(*field, pow2(2 - k), TraceSide::Above, g).l1_distance(limit));
    out.push_back(lower("strong_trace_fails_outward", least, 0.3,
                        fmt::format("min over k <= {} of ||gamma_(r_k) - gamma_0||_L1", kmax)));
    out.back().runtime_s = seconds_since(t0);
    return out;
}

std::vector<CheckRecord> check_wellposed_fv(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    auto t0 = Clock::now();
    auto field = std::make_shared<SmoothShearField>(0.5, 2 * M_PI);
    const double T = 0.5;
    auto scenario = [&](int level, double cfl) {
        Scenario sc;
        sc.name = fmt::format("smooth_l{}_cfl{}", level, cfl);
        sc.field = field;
        sc.domain = DomainBox{1.0, 0.5, T};
        sc.level = level;
        sc.cfl = cfl;
        sc.u_bar = [field](const Vec3& x) {
            auto A = field->lateral_shift(x[0]);
            return smooth_G(x[0], x[1] - A[0], x[2] - A[1]);
        };
        sc.g_bar = [](double t, double y1, double y2) { return smooth_G(-t, y1, y2); };
        return sc;
    };
    FunctionSolution exact(
        "smooth_exact",
        [field](double t, const Vec3& x) {
            auto A = field->lateral_shift(x[0]);
            return smooth_G(x[0] - t, x[1] - A[0], x[2] - A[1]);
        },
        1.5);

    std::vector<double> err;
    std::vector<CellScalarField> finals;
    bool l2_ok = true, max_ok = true;
    Trajectory first;
    for (int level : {5, 6, 7}) {
        auto traj = solve_ibvp(scenario(level, 0.4));
        const auto& u = traj.final_state();
        err.push_back(l1_difference(u, sample_solution(exact, u, u.t)));
        l2_ok = l2_ok && l2_balance_report(traj).nonincreasing;
        max_ok = max_ok && u.max_abs() <= 1.5 + 1e-12;
        finals.push_back(u);
        if (level == 5) first = std::move(traj);
    }
    const double order = std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
    out.push_back(lower("fv_observed_order", order, 0.5,
                        fmt::format("L1 errors {:.3e}, {:.3e}, {:.3e} at levels 5, 6, 7", err[0], err[1], err[2])));
    out.back().runtime_s = seconds_since(t0);
    out.push_back(upper("fv_l2_nonincreasing", l2_ok ? 0.0 : 1.0, 0.0, "per-step L2 balance with boundary u^2 b flux"));
    out.push_back(upper("fv_max_principle", finals.back().max_abs(), 1.5, "sup |u_h| <= max(|u_bar|, |g_bar|)"));

    t0 = Clock::now();
    auto u02 = solve_ibvp(scenario(7, 0.2)).final_state();
    const double h7 = pow2(-7);
    const double diff = l1_difference(u02, finals.back());
    out.push_back(upper("fv_cfl_independence", diff, std::sqrt(h7), "||u(CFL 0.2) - u(CFL 0.4)||_L1 at level 7"));
    out.back().runtime_s = seconds_since(t0);

    // cone energy of the error, with C calibrated on the front scenario at level 5
    t0 = Clock::now();
    ConeWeight w;
    w.t_bar = T;
    w.apex = {0.25, 0.25, 0.25};
    w.speed = field->linf_bound;
    Scenario front;
    front.name = "front";
    front.field = make_constant_field({1, 0, 0});
    front.domain = DomainBox{1.0, 0.5, T};
    front.level = 5;
    front.g_bar = [](double, double, double) { return 1.0; };
    auto uf = solve_ibvp(front).final_state();
    FunctionSolution front_exact("front", [](double t, const Vec3& x) { return x[0] < t ? 1.0 : 0.0; }, 1.0);
    auto diff_field = [](CellScalarField a, const CellScalarField& b) {
        for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= b.values[i];
        return a;
    };
    const double C = cone_energy(diff_field(uf, sample_solution(front_exact, uf, uf.t)), w) / pow2(-5);
    const double e7 = cone_energy(diff_field(finals.back(), sample_solution(exact, finals.back(), T)), w);
    out.push_back(upper("fv_cone_energy_error", e7, 10.0 * C * h7,
                        fmt::format("E(t_bar) of u_h - u at level 7; C = {:.4g} from the front scenario", C)));
    auto zero_sc = scenario(6, 0.4);
    zero_sc.u_bar = nullptr;
    zero_sc.g_bar = nullptr;
    const double ez = cone_energy(solve_ibvp(zero_sc).final_state(), w);
    out.push_back(upper("fv_cone_energy_zero_data", ez, 10.0 * C * pow2(-6), "zero data, level 6"));
    out.back().runtime_s = out[out.size() - 2].runtime_s = seconds_since(t0);

    if (!cfg.out_dir.empty() && cfg.write_csv) {
        write_log_csv(first, out_path(cfg, "wellposed_log_l5.csv"));
        write_snapshot_csv(first.final_state(), out_path(cfg, "wellposed_snapshot_l5.csv"));
    }
    if (!cfg.out_dir.empty() && cfg.write_ppm) emit_heatmap(first.final_state(), 4, out_path(cfg, "wellposed_u_l5.ppm"));
    return out;
}

std::vector<CheckRecord> check_gronwall_witness(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    auto t0 = Clock::now();
    ConstructionVariant v{Variant::Outward, cfg.k_max};
    auto field = assemble_field(v);
    ConeWeight w;
    w.t_bar = 0.5;
    w.apex = {0.0, 0.25, 0.25};
    w.speed = field->linf_bound;
    const int level = 6;
    auto rep = cone_energy_check(*exact_solution(v), *field, w, kUnitDomain, level, 1e-3);
    CheckRecord c = witness("cone_energy_outward", rep.energy, 0.01,
                            fmt::format("E(1/2) with zero data, div b = 0 (Gronwall bound {:.3g})", rep.gronwall_bound));
    c.verdict = rep.verdict;
    c.runtime_s = seconds_since(t0);
    out.push_back(c);

    // BV truncation: the FV solution from zero data at the same resolution
    t0 = Clock::now();
    Scenario sc;
    sc.name = "bv_truncation";
    sc.field = assemble_field({Variant::Outward, 4});
    sc.domain = DomainBox{1.0, 0.5, 0.5};
    sc.level = level;
    sc.cfl = cfg.cfl;
    auto traj = solve_ibvp(sc);
    const double e = cone_energy(traj.final_state(), w);
    out.push_back(upper("cone_energy_bv_truncation", e, 1e-3, "FV from zero data on the K_max = 4 field, level 6"));
    out.back().runtime_s = seconds_since(t0);
    auto inv = check_cone_invariants(w, 100000, kUnitDomain);
    out.push_back(upper("cone_weight_invariants", static_cast<double>(inv.violations), 0.0,
                        fmt::format("1e5 samples; the |t - t_bar| form violates at {} points",
                                    inv.symmetric_violations)));
    if (!inv.profile_monotone || !inv.cutoff_monotone) out.back().verdict = Verdict::Fail;
    return out;
}

std::vector<CheckRecord> check_mixing(const RunConfig& cfg) {
    std::vector<CheckRecord> out;
    auto t0 = Clock::now();
    const int kmax = std::min(cfg.k_max, 6);
    auto u = exact_solution({Variant::Inward, kmax});
    // boxes whose side is an even multiple of the chessboard cell average to exactly 0,
    // so generic offsets and a non-dyadic side are sampled as well
    const int n = 256;
    double worst_ratio = 0.0;
    for (int k = 3; k <= kmax; ++k) {
        const double rk = pow2(2 - k);
        for (double f : {0.3, 0.55, 0.8, 0.95})
            for (double box : {0.125, 0.1})
                for (double off : {0.0, 0.0625, 0.1015625, 0.0123, 0.271, 0.3999}) {
                    const double r = f * rk, hs = box / n;
                    double s = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            s += (*u)(1.0, {r, off + (a + 0.5) * hs, 0.7 * off + (b + 0.5) * hs});
                    worst_ratio = std::max(worst_ratio, std::fabs(s / (n * n)) / pow2(3 - k));
                }
    }
    out.push_back(upper("mixing_box_averages", worst_ratio, 1.0,
                        "max |box average| / 2^{3-k}, boxes of side 1/8 and 0.1 at r < 2^{2-k}, t = 1"));
    out.back().runtime_s = seconds_since(t0);

    t0 = Clock::now();
    int mismatched = 0;
    for (int k : {3, 4}) {
        auto S = evolve_chessboard(k);
        auto M = marker_oracle(k, 64, 400);
        for (std::size_t i = 0; i < S.size(); ++i) mismatched += S[i] == M[i] ? 0 : 1;
        if (!cfg.out_dir.empty() && cfg.write_ppm)
            for (std::size_t i = 0; i < S.size(); ++i) {
                std::vector<double> vals(S[i].v.begin(), S[i].v.end());
                emit_heatmap(vals, 4, 4, -1.0, 1.0, out_path(cfg, fmt::format("chessboard_k{}_state{}.ppm", k, i)), 16);
            }
    }
    out.push_back(upper("chessboard_marker_oracle", mismatched, 0.0, "states at r = 0, w, 3w, 4w for k = 3, 4"));
    out.back().runtime_s = seconds_since(t0);
    return out;
}

std::vector<CheckRecord> check_flow_map(const RunConfig&) {
    std::vector<CheckRecord> out;
    auto t0 = Clock::now();
    const int k = 3;
    const double w = pow2(-2 - k);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-w, w);
    double worst = 0.0;
    int not_identity = 0;
    for (int i = 0; i < 1000; ++i) {
        std::array<double, 2> d{U(rng), U(rng)};
        auto q = quarter_turn(k, d);
        auto ode = integrate_block_ode(k, d, w, 1e-6);
        worst = std::max({worst, std::fabs(ode[0] - q[0]), std::fabs(ode[1] - q[1])});
        auto p = d;
        for (int n = 0; n < 4; ++n) p = quarter_turn(k, p);
        if (p != d || square_rotate(d, 8.0) != d) ++not_identity;
    }
    out.push_back(upper("quarter_turn_vs_ode", worst, 1e-8, "1000 points, step 1e-6, k = 3"));
    out.back().runtime_s = seconds_since(t0);
    out.push_back(upper("four_quarter_turns_identity", not_identity, 0.0, "exact equality"));
    return out;
}

// ============================================================================
// Suites
// ============================================================================

namespace {

void append(std::vector<CheckRecord>& to, std::vector<CheckRecord> from) {
    for (auto& c : from) to.push_back(std::move(c));
}

void write_catalog_pictures(const RunConfig& cfg) {
    // β_3 at r = 2^-4 over one period cell, and z_3 at the end of its cycle
    BetaField beta(3);
    auto b = lateral_samples(4, 0.5, [&](double y1, double y2) { return beta(0.0, {0.0625, y1, y2})[0]; });
    emit_heatmap(b, 4, 4, -5.0, 1.0, out_path(cfg, "beta3_r0.0625.ppm"), 32);
    auto z = lateral_samples(4, 0.125, [](double y1, double y2) { return z_value(3, 0.125, y1, y2); });
    emit_heatmap(z, 4, 4, -1.0, 1.0, out_path(cfg, "z3_r0.125.ppm"), 32);
}

void write_trace_files(const RunConfig& cfg) {
    const Variant tag = cfg.suite == "corollary" ? Variant::Corollary : cfg.variant;
    ConstructionVariant v{tag, std::min(cfg.k_max, 6)};
    auto field = assemble_field(v);
    auto u = exact_solution(v);
    ProfileGrid g{2, 5};
    for (int k = 3; k <= v.k_max; ++k) {
        const double rk = pow2(2 - k);
        auto tb = one_sided_trace(*field, rk, TraceSide::Above, g);
        auto tbu = flux_trace(*field, *u, 1, rk, TraceSide::Above, g);
        if (cfg.write_csv) {
            write_trace_csv(tb, out_path(cfg, fmt::format("trace_b_{}_k{}.csv", to_string(v.tag), k)));
            write_trace_csv(tbu, out_path(cfg, fmt::format("trace_bu_{}_k{}.csv", to_string(v.tag), k)));
        }
        if (cfg.write_ppm) emit_heatmap(tb, g.nt() - 1, out_path(cfg, fmt::format("trace_b_{}_k{}.ppm", to_string(v.tag), k)), 8);
    }
}

}  // namespace

Report run_suite(const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", cfg.out_dir, ec.message()));
    }
    auto t0 = Clock::now();
    Report rep;
    rep.suite = cfg.suite;
    rep.config = cfg;
    auto& c = rep.checks;
    if (cfg.suite == "wellposed") {
        append(c, check_wellposed_fv(cfg));
        append(c, check_divergence_exactness(cfg));
    } else if (cfg.suite == "nonuniqueness_outward") {
        append(c, check_outward_witness(cfg));
        append(c, check_gronwall_witness(cfg));
        append(c, check_boundary_traces(cfg));
    } else if (cfg.suite == "nonuniqueness_inward") {
        append(c, check_inward_witness(cfg));
        append(c, check_boundary_traces(cfg));
    } else if (cfg.suite == "corollary") {
        append(c, check_corollary_traces(cfg));
    } else if (cfg.suite == "traces") {
        append(c, check_trace_renormalization(cfg));
        append(c, check_strong_traces(cfg));
    } else if (cfg.suite == "mixing") {
        append(c, check_mixing(cfg));
        append(c, check_flow_map(cfg));
    }
    rep.runtime_s = seconds_since(t0);
    if (!cfg.out_dir.empty()) {
        if (cfg.suite == "traces" || cfg.suite == "corollary") write_trace_files(cfg);
        if (cfg.write_ppm) write_catalog_pictures(cfg);
        write_text(rep.to_json(), out_path(cfg, fmt::format("report_{}.json", cfg.suite)));
    }
    return rep;
}

// ============================================================================
// Output
// ============================================================================

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
    return f;
}

}  // namespace

void write_trace_csv(const TraceProfile& p, const std::string& path) {
    auto f = open_out(path);
    f << "t,y1,y2,value,source_tag,orientation\n";
    const std::string orient = p.orientation_string();
    for (int it = 0; it < p.grid.nt(); ++it)
        for (int i1 = 0; i1 < p.grid.ny(); ++i1)
            for (int i2 = 0; i2 < p.grid.ny(); ++i2)
                f << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},\"{}\"\n", p.grid.tc(it), p.grid.yc(i1),
                                 p.grid.yc(i2), p.at(it, i1, i2), p.source_tag, orient);
}

void write_snapshot_csv(const CellScalarField& u, const std::string& path) {
    auto f = open_out(path);
    f << "t,r,y1,y2,u\n";
    const DyadicGrid& g = u.grid;
    for (int j = u.j0; j < u.j1; ++j)
        for (int i1 = 0; i1 < g.ny; ++i1)
            for (int i2 = 0; i2 < g.ny; ++i2)
                f << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", u.t, g.rc(j), g.yc(i1), g.yc(i2),
                                 u.values[u.at(j, i1, i2)]);
}

void write_log_csv(const Trajectory& traj, const std::string& path) {
    auto f = open_out(path);
    f << "step,t,mass,l1,l2,boundary_flux\n";
    for (const auto& r : traj.log)
        f << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.step, r.t, r.mass, r.l1, r.l2,
                         r.boundary_flux);
}

void write_text(const std::string& text, const std::string& path) {
    auto f = open_out(path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

void emit_heatmap(const std::vector<double>& values, int rows, int cols, double vmin, double vmax,
                  const std::string& path, int scale) {
    if (rows <= 0 || cols <= 0 || values.size() != static_cast<std::size_t>(rows) * cols)
        throw ConfigError("heatmap needs rows x cols values");
    auto f = open_out(path);
    f << "P6\n" << cols * scale << " " << rows * scale << "\n255\n";
    auto colour = [&](double v) -> std::array<unsigned char, 3> {
        if (v > 0.0 && vmax > 0.0) {
            const double a = std::min(1.0, v / vmax);
            return {static_cast<unsigned char>(255 - a * 255), static_cast<unsigned char>(255 - a * 165),
                    static_cast<unsigned char>(255 - a * 55)};
        }
        if (v < 0.0 && vmin < 0.0) {
            const auto g = static_cast<unsigned char>(255 - std::min(1.0, v / vmin) * 255);
            return {g, g, g};
        }
        return {255, 255, 255};
    };
    std::string row;
    for (int r = 0; r < rows; ++r) {
        row.clear();
        for (int c = 0; c < cols; ++c) {
            auto px = colour(values[static_cast<std::size_t>(r) * cols + c]);
            for (int s = 0; s < scale; ++s) row.append(reinterpret_cast<const char*>(px.data()), 3);
        }
        for (int s = 0; s < scale; ++s) f.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

void emit_heatmap(const CellScalarField& u, int j, const std::string& path, int scale) {
    if (j < u.j0 || j >= u.j1) throw ConfigError("heatmap slice outside the cell range");
    const int ny = u.grid.ny;
    std::vector<double> vals(static_cast<std::size_t>(ny) * ny);
    double lo = 0.0, hi = 0.0;
    for (int i1 = 0; i1 < ny; ++i1)
        for (int i2 = 0; i2 < ny; ++i2) {
            const double v = u.values[u.at(j, i1, i2)];
            vals[static_cast<std::size_t>(i1) * ny + i2] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    emit_heatmap(vals, ny, ny, lo, hi, path, scale);
}

void emit_heatmap(const TraceProfile& p, int it, const std::string& path, int scale) {
    if (it < 0 || it >= p.grid.nt()) throw ConfigError("heatmap time cell outside the profile");
    const int ny = p.grid.ny();
    std::vector<double> vals(p.values.begin() + static_cast<std::ptrdiff_t>(p.index(it, 0, 0)),
                             p.values.begin() + static_cast<std::ptrdiff_t>(p.index(it, 0, 0) + ny * ny));
    double lo = 0.0, hi = 0.0;
    for (double v : vals) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    emit_heatmap(vals, ny, ny, lo, hi, path, scale);
}

std::vector<double> lateral_samples(int n, double side, const std::function<double(double, double)>& fn) {
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    const double c = side / n;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2) v[static_cast<std::size_t>(i1) * n + i2] = fn((i1 + 0.5) * c, (i2 + 0.5) * c);
    return v;
}

}  // namespace bvt
