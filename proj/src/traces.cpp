#include "bvt/traces.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <limits>

namespace bvt {

namespace {

// One-sided offset from a trace plane; far below every construction scale.
constexpr double kTraceOffset = 0x1p-36;

double max_bump_slope() {
    static const double m = [] {
        double best = 0.0;
        for (int i = 1; i < 20000; ++i) best = std::max(best, std::fabs(bump::deriv(-1.0 + i * 1e-4)));
        return best * 1.001;
    }();
    return m;
}

bool lateral(int axis) { return axis >= 2; }

}  // namespace

// ============================================================================
// Test functions
// ============================================================================

double TestFunction::factor(int axis, double x) const {
    double d = x - centre[static_cast<std::size_t>(axis)];
    if (lateral(axis)) d = wrap(d + 0.5 * L, L) - 0.5 * L;
    return bump::value(d / width[static_cast<std::size_t>(axis)]);
}

double TestFunction::factor_deriv(int axis, double x) const {
    const double w = width[static_cast<std::size_t>(axis)];
    double d = x - centre[static_cast<std::size_t>(axis)];
    if (lateral(axis)) d = wrap(d + 0.5 * L, L) - 0.5 * L;
    return bump::deriv(d / w) / w;
}

double TestFunction::factor_integral(int axis, double a, double b) const {
    const double c = centre[static_cast<std::size_t>(axis)], w = width[static_cast<std::size_t>(axis)];
    return w * (bump::integral((b - c) / w) - bump::integral((a - c) / w));
}

double TestFunction::value(double t, const Vec3& x) const {
    return amplitude * factor(0, t) * factor(1, x[0]) * factor(2, x[1]) * factor(3, x[2]);
}

std::array<double, 4> TestFunction::gradient(double t, const Vec3& x) const {
    const std::array<double, 4> p{t, x[0], x[1], x[2]};
    std::array<double, 4> f{}, df{}, g{};
    for (int a = 0; a < 4; ++a) {
        f[static_cast<std::size_t>(a)] = factor(a, p[static_cast<std::size_t>(a)]);
        df[static_cast<std::size_t>(a)] = factor_deriv(a, p[static_cast<std::size_t>(a)]);
    }
    for (std::size_t a = 0; a < 4; ++a) {
        double v = amplitude * df[a];
        for (std::size_t b = 0; b < 4; ++b)
            if (b != a) v *= f[b];
        g[a] = v;
    }
    return g;
}

double TestFunction::surface_value(double t, double y1, double y2) const {
    return amplitude * factor(0, t) * factor(2, y1) * factor(3, y2);
}

double TestFunction::c1_norm() const {
    double q = 0.0;
    for (double w : width) q += 1.0 / (w * w);
    return std::fabs(amplitude) * (1.0 + max_bump_slope() * std::sqrt(q));
}

double TestFunction::surface_lipschitz() const {
    double q = 1.0 / (width[0] * width[0]) + 1.0 / (width[2] * width[2]) + 1.0 / (width[3] * width[3]);
    return std::fabs(amplitude) * max_bump_slope() * std::sqrt(q);
}

std::vector<TestFunction> test_battery(double L) {
    const std::array<double, 3> scales{0.125, 0.0625, 0.03125};
    const std::array<double, 5> r_centres{0.5, 0.25, 0.375, 0.625, 0.75};
    const std::array<double, 4> t_centres{0.5, 0.375, 0.625, 0.75};
    std::vector<TestFunction> out;
    for (int i = 0; i < 20; ++i) {
        TestFunction f;
        f.L = L;
        const double w = scales[static_cast<std::size_t>(i % 3)];
        const bool at_boundary = i % 4 == 0, at_start = i % 5 == 0;
        f.centre[0] = at_start ? 0.125 : t_centres[static_cast<std::size_t>(i % 4)];
        f.width[0] = at_start ? 0.25 : 0.1875;
        f.centre[1] = at_boundary ? 0.0 : r_centres[static_cast<std::size_t>(i % 5)];
        f.width[1] = at_boundary ? 0.125 : std::min(0.125, 2.0 * w);
        f.centre[2] = wrap(0.0625 * (3 * i + 1), L);
        f.centre[3] = wrap(0.0625 * (5 * i + 2), L);
        f.width[2] = w;
        f.width[3] = i % 2 == 0 ? w : std::min(0.125, 2.0 * w);
        f.amplitude = 1.0;
        f.tag = fmt::format("phi{:02d}{}{}", i, at_boundary ? "_boundary" : "", at_start ? "_initial" : "");
        out.push_back(f);
    }
    return out;
}

// ============================================================================
// Trace profiles
// ============================================================================

double TraceProfile::linf() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

double TraceProfile::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double TraceProfile::l1_distance(const TraceProfile& o) const {
    if (o.values.size() != values.size()) throw ConfigError("profiles on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += std::fabs(values[i] - o.values[i]);
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double TraceProfile::pairing(const TestFunction& phi) const {
    const int nt = grid.nt(), ny = grid.ny();
    std::vector<double> ft(static_cast<std::size_t>(nt)), f1(static_cast<std::size_t>(ny)),
        f2(static_cast<std::size_t>(ny));
    for (int i = 0; i < nt; ++i) ft[static_cast<std::size_t>(i)] = phi.factor(0, grid.tc(i));
    for (int i = 0; i < ny; ++i) {
        f1[static_cast<std::size_t>(i)] = phi.factor(2, grid.yc(i));
        f2[static_cast<std::size_t>(i)] = phi.factor(3, grid.yc(i));
    }
    const double vol = std::ldexp(1.0, -grid.level_t) * std::ldexp(1.0, -2 * grid.level_y);
    double s = 0.0;
    for (int it = 0; it < nt; ++it) {
        if (ft[static_cast<std::size_t>(it)] == 0.0) continue;
        double st = 0.0;
        for (int i1 = 0; i1 < ny; ++i1) {
            if (f1[static_cast<std::size_t>(i1)] == 0.0) continue;
            double s1 = 0.0;
            for (int i2 = 0; i2 < ny; ++i2) s1 += at(it, i1, i2) * f2[static_cast<std::size_t>(i2)];
            st += s1 * f1[static_cast<std::size_t>(i1)];
        }
        s += st * ft[static_cast<std::size_t>(it)];
    }
    return phi.amplitude * s * vol;
}

std::string TraceProfile::orientation_string() const {
    return fmt::format("({:g},{:g},{:g},{:g})", orientation[0], orientation[1], orientation[2], orientation[3]);
}

TraceProfile make_profile(const ProfileGrid& g, const std::function<double(double, double, double)>& fn,
                          const std::string& tag) {
    TraceProfile p;
    p.grid = g;
    p.source_tag = tag;
    const int nt = g.nt(), ny = g.ny();
    p.values.assign(static_cast<std::size_t>(nt) * ny * ny, 0.0);
    parallel_chunks(static_cast<std::size_t>(nt), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t it = b; it < e; ++it)
            for (int i1 = 0; i1 < ny; ++i1)
                for (int i2 = 0; i2 < ny; ++i2)
                    p.values[p.index(static_cast<int>(it), i1, i2)] =
                        fn(g.tc(static_cast<int>(it)), g.yc(i1), g.yc(i2));
    });
    return p;
}

TraceProfile constant_profile(const ProfileGrid& g, double value, const std::string& tag) {
    TraceProfile p;
    p.grid = g;
    p.source_tag = tag;
    p.values.assign(static_cast<std::size_t>(g.nt()) * g.ny() * g.ny(), value);
    return p;
}

namespace {

void require_plane(double r0) {
    if (!std::isfinite(r0) || r0 < 0.0 || !is_multiple_of_pow2(r0, 20))
        throw ResolutionError(fmt::format("trace plane r = {} is not a dyadic grid face", r0));
}

double side_r(double r0, TraceSide side) {
    return side == TraceSide::Above ? r0 + kTraceOffset : r0 - kTraceOffset;
}

}  // namespace

TraceProfile one_sided_trace(const VelocityField& field, double r0, TraceSide side, const ProfileGrid& g) {
    require_plane(r0);
    const double r = side_r(r0, side);
    TraceProfile p = make_profile(g, [&](double t, double y1, double y2) { return -field(t, {r, y1, y2})[0]; }, "b");
    p.r0 = r0;
    p.side = side;
    return p;
}

TraceProfile one_sided_trace(const FaceFluxField& flux, double r0) {
    const double h = flux.grid.h;
    const double q = r0 / h;
    if (!(q == std::floor(q)) || q < flux.j0 || q > flux.j1)
        throw ResolutionError(fmt::format("r = {} is not a sampled face of the level-{} grid", r0, flux.grid.level));
    const int j = static_cast<int>(q), ny = flux.grid.ny;
    TraceProfile p;
    p.grid.level_t = 0;
    p.grid.level_y = flux.grid.level;
    p.grid.T = 1.0;
    p.grid.L = flux.grid.domain.y_period;
    p.r0 = r0;
    p.source_tag = "b";
    p.values.resize(static_cast<std::size_t>(ny) * ny);
    for (int i1 = 0; i1 < ny; ++i1)
        for (int i2 = 0; i2 < ny; ++i2) p.values[p.index(0, i1, i2)] = -flux.fr[flux.rface(j, i1, i2)];
    return p;
}

TraceProfile flux_trace(const VelocityField& field, const ScalarSolution& u, int power, double r0, TraceSide side,
                        const ProfileGrid& g) {
    require_plane(r0);
    if (power < 1 || power > 2) throw ConfigError("flux trace power must be 1 or 2");
    const double r = side_r(r0, side);
    TraceProfile p = make_profile(
        g,
        [&](double t, double y1, double y2) {
            const Vec3 x{r, y1, y2};
            const double v = u(t, x);
            return -field(t, x)[0] * (power == 1 ? v : v * v);
        },
        power == 1 ? "bu" : "u2b");
    p.r0 = r0;
    p.side = side;
    return p;
}

TraceProfile trace_jump(const VelocityField& field, double r0, const ProfileGrid& g) {
    if (r0 <= 0.0) throw ResolutionError("the jump of the trace is defined on interior planes only");
    TraceProfile below = one_sided_trace(field, r0, TraceSide::Below, g);
    TraceProfile above = one_sided_trace(field, r0, TraceSide::Above, g);
    for (std::size_t i = 0; i < below.values.size(); ++i) below.values[i] -= above.values[i];
    below.source_tag = "b_jump";
    return below;
}

// ============================================================================
// Exact pairings
// ============================================================================

namespace {

struct LateralPairing : RectVisitor, PieceVisitor {
    const TestFunction& phi;
    int power = 0;  // 0: trace of b
    double sum = 0.0;
    explicit LateralPairing(const TestFunction& f) : phi(f) {}

    double weight(double a1, double b1, double a2, double b2) const {
        return phi.factor_integral(2, a1, b1) * phi.factor_integral(3, a2, b2);
    }
    void rect(double a1, double b1, double a2, double b2, const Vec3& v) override {
        sum += -v[0] * weight(a1, b1, a2, b2);
    }
    void rect(double a1, double b1, double a2, double b2, double U, const Vec3& B) override {
        sum += -B[0] * (power == 1 ? U : U * U) * weight(a1, b1, a2, b2);
    }
    void fan(const FanPiece& f, double U, double Br, double) override {
        const GaussRule& g = gauss_legendre(4);
        double s = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double l = 0.5 * f.half * (g.x[i] + 1.0);
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const double u = f.ua + 0.5 * (f.ub - f.ua) * (g.x[j] + 1.0);
                auto d = fan_direction(f.side, u);
                s += g.w[i] * g.w[j] * l * phi.factor(2, f.c1 + l * d[0]) * phi.factor(3, f.c2 + l * d[1]);
            }
        }
        s *= 0.25 * f.half * (f.ub - f.ua);
        sum += -Br * (power == 1 ? U : U * U) * s;
    }
};

}  // namespace

double trace_pairing_exact(const VelocityField& field, const ScalarSolution* u, int power, double r0,
                           TraceSide side, const TestFunction& phi, const ProfileGrid& fallback) {
    require_plane(r0);
    const double r = side_r(r0, side);
    const double T = fallback.T;
    auto ts = phi.support(0);
    const double ta = std::max(0.0, ts[0]), tb = std::min(T, ts[1]);
    if (tb <= ta) return 0.0;
    std::vector<double> cuts{ta, tb, r0};
    for (double b : field.breakpoints) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return c < ta || c > tb; }), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double y1a = phi.centre[2] - phi.width[2], y1b = phi.centre[2] + phi.width[2];
    const double y2a = phi.centre[3] - phi.width[3], y2b = phi.centre[3] + phi.width[3];
    const bool window_ok = 2.0 * phi.width[2] <= phi.L && 2.0 * phi.width[3] <= phi.L;

    auto lattice = [&](double t) {
        const int ny = fallback.ny();
        const double h = std::ldexp(1.0, -fallback.level_y);
        double s = 0.0;
        for (int i1 = 0; i1 < ny; ++i1) {
            const double f1 = phi.factor(2, fallback.yc(i1));
            if (f1 == 0.0) continue;
            for (int i2 = 0; i2 < ny; ++i2) {
                const double f2 = phi.factor(3, fallback.yc(i2));
                if (f2 == 0.0) continue;
                const Vec3 x{r, fallback.yc(i1), fallback.yc(i2)};
                double v = -field(t, x)[0];
                if (u) {
                    const double w = (*u)(t, x);
                    v *= power == 1 ? w : w * w;
                }
                s += v * f1 * f2;
            }
        }
        return s * h * h;
    };

    auto lateral_integral = [&](double t) {
        if (window_ok) {
            LateralPairing lp(phi);
            if (u) {
                lp.power = power;
                if (u->stationary_below_surface()) {
                    if (r > t) return 0.0;
                    if (u->pieces(r, y1a, y1b, y2a, y2b, lp)) return lp.sum;
                }
            } else if (field.normal_rects(t, r, y1a, y1b, y2a, y2b, lp)) {
                return lp.sum;
            }
        }
        return lattice(t);
    };

    const GaussRule& g = gauss_legendre(8);
    const int panels = 8;
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c], b = cuts[c + 1];
        const double hp = (b - a) / panels;
        for (int q = 0; q < panels; ++q) {
            const double pa = a + q * hp;
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double t = pa + 0.5 * hp * (g.x[i] + 1.0);
                const double ft = phi.factor(0, t);
                if (ft == 0.0) continue;
                total += 0.5 * hp * g.w[i] * ft * lateral_integral(t);
            }
        }
    }
    return phi.amplitude * total;
}

double trace_pairing(const ZeroExtendedField& B, const TestFunction& phi, int level) {
    const DomainBox& dom = B.domain();
    const double h = pow2(-level);
    auto range = [&](int axis, double lo, double hi) {
        auto s = phi.support(axis);
        double a = std::max(lo, std::floor(s[0] / h) * h), b = std::min(hi, std::ceil(s[1] / h) * h);
        return std::array<double, 2>{a, std::max(a, b)};
    };
    const auto tr = range(0, 0.0, dom.T), rr = range(1, 0.0, dom.r_max);
    const auto y1 = range(2, -dom.y_period, 2.0 * dom.y_period), y2 = range(3, -dom.y_period, 2.0 * dom.y_period);
    const int nt = static_cast<int>(std::lround((tr[1] - tr[0]) / h));
    const int nr = static_cast<int>(std::lround((rr[1] - rr[0]) / h));
    const int n1 = static_cast<int>(std::lround((y1[1] - y1[0]) / h));
    const int n2 = static_cast<int>(std::lround((y2[1] - y2[0]) / h));
    const double vol = h * h * h * h;
    return parallel_sum(static_cast<std::size_t>(nt) * nr, [&](std::size_t idx) {
        const double t = tr[0] + (static_cast<double>(idx / nr) + 0.5) * h;
        const double r = rr[0] + (static_cast<double>(idx % nr) + 0.5) * h;
        double s = 0.0;
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i2 = 0; i2 < n2; ++i2) {
                const Vec3 x{r, y1[0] + (i1 + 0.5) * h, y2[0] + (i2 + 0.5) * h};
                auto b = B(t, x);
                if (b[0] == 0.0) continue;
                auto gphi = phi.gradient(t, x);
                s += b[0] * gphi[0] + b[1] * gphi[1] + b[2] * gphi[2] + b[3] * gphi[3];
            }
        return s * vol;
    }, 1);
}

// ============================================================================
// Convergence checks
// ============================================================================

WeakStarReport weak_star_summary(std::vector<PairingRow> rows, const std::vector<TestFunction>& tests, double C) {
    WeakStarReport rep;
    rep.pass = true;
    std::vector<std::pair<double, double>> worst;  // (scale, max error)
    for (auto& row : rows) {
        const double lip = tests.at(row.test).surface_lipschitz();
        row.bound = C * lip * row.scale;
        if (!(row.error <= row.bound)) rep.pass = false;
        rep.max_ratio = std::max(rep.max_ratio, row.error / (lip * row.scale));
        auto it = std::find_if(worst.begin(), worst.end(), [&](const auto& w) { return w.first == row.scale; });
        if (it == worst.end())
            worst.emplace_back(row.scale, row.error);
        else
            it->second = std::max(it->second, row.error);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [s, e] : worst) {
        if (!(e > 0.0) || !(s > 0.0)) continue;
        const double x = std::log(s), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    rep.fitted_rate = n >= 2 && n * sxx - sx * sx > 0 ? (n * sxy - sx * sy) / (n * sxx - sx * sx)
                                                       : std::numeric_limits<double>::quiet_NaN();
    rep.rows = std::move(rows);
    return rep;
}

WeakStarReport weak_star_check(const std::vector<TraceProfile>& profiles, const std::vector<double>& scales,
                               const TraceProfile& limit, const std::vector<TestFunction>& tests, double C) {
    if (profiles.size() != scales.size()) throw ConfigError("one scale per profile required");
    std::vector<PairingRow> rows;
    for (std::size_t p = 0; p < profiles.size(); ++p)
        for (std::size_t i = 0; i < tests.size(); ++i) {
            PairingRow row;
            row.profile = p;
            row.scale = scales[p];
            row.test = i;
            row.error = std::fabs(profiles[p].pairing(tests[i]) - limit.pairing(tests[i]));
            rows.push_back(row);
        }
    return weak_star_summary(std::move(rows), tests, C);
}

StrongL1Report strong_l1_check(const std::vector<TraceProfile>& gamma, const TraceProfile& limit,
                               const std::vector<double>& bounds) {
    StrongL1Report rep;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        StrongRow row;
        row.r = gamma[i].r0;
        row.l1 = gamma[i].l1_distance(limit);
        row.bound = i < bounds.size() ? bounds[i] : std::numeric_limits<double>::quiet_NaN();
        row.bound_available = std::isfinite(row.bound);
        if (row.bound_available && row.l1 > row.bound + 1e-12) rep.within_bound = false;
        if (!rep.rows.empty() && row.l1 > rep.rows.back().l1 + 1e-12) rep.decreasing = false;
        rep.rows.push_back(row);
    }
    return rep;
}

RenormalizationReport renormalization_trace_check(const TraceProfile& tr_u2b, const TraceProfile& tr_ub,
                                                  const TraceProfile& tr_b) {
    if (tr_u2b.values.size() != tr_b.values.size() || tr_ub.values.size() != tr_b.values.size())
        throw ConfigError("renormalization profiles on different grids");
    RenormalizationReport rep;
    rep.pass = true;
    for (std::size_t i = 0; i < tr_b.values.size(); ++i) {
        const double b = tr_b.values[i], ub = tr_ub.values[i], u2b = tr_u2b.values[i];
        double res;
        if (std::fabs(b) >= 1e-6) {
            const double q = ub / b;
            res = std::fabs(u2b - q * q * b) / std::max(1.0, std::fabs(u2b));
        } else {
            res = std::fabs(u2b);
            ++rep.tangential;
        }
        rep.max_residual = std::max(rep.max_residual, res);
        ++rep.points;
    }
    rep.pass = rep.max_residual <= 1e-12;
    return rep;
}

BoundaryReport boundary_condition_check(const TraceProfile& tr_b, const TraceProfile& tr_bu,
                                        const std::function<double(double, double, double)>& g_bar) {
    if (tr_bu.values.size() != tr_b.values.size()) throw ConfigError("boundary profiles on different grids");
    BoundaryReport rep;
    const ProfileGrid& g = tr_b.grid;
    const int nt = g.nt(), ny = g.ny();
    std::size_t minus = 0, zero = 0, plus = 0;
    double disc = 0.0;
    for (int it = 0; it < nt; ++it)
        for (int i1 = 0; i1 < ny; ++i1)
            for (int i2 = 0; i2 < ny; ++i2) {
                const std::size_t k = tr_b.index(it, i1, i2);
                const double b = tr_b.values[k];
                if (std::fabs(b) < 1e-6) {
                    ++zero;
                } else if (b < 0.0) {
                    ++minus;
                    disc += std::fabs(tr_bu.values[k] - g_bar(g.tc(it), g.yc(i1), g.yc(i2)) * b);
                } else {
                    ++plus;
                }
            }
    const double n = static_cast<double>(tr_b.values.size());
    rep.gamma_minus = minus / n;
    rep.gamma_zero = zero / n;
    rep.gamma_plus = plus / n;
    rep.discrepancy_l1 = disc / n;
    rep.checked = minus > 0;
    return rep;
}

TraceProfile coarse_grain(const TraceProfile& p, int coarse_level_y) {
    if (coarse_level_y > p.grid.level_y) throw ConfigError("coarse grain must not refine");
    TraceProfile out = p;
    out.grid.level_y = coarse_level_y;
    const int f = 1 << (p.grid.level_y - coarse_level_y), ny = out.grid.ny(), nt = p.grid.nt();
    out.values.assign(static_cast<std::size_t>(nt) * ny * ny, 0.0);
    for (int it = 0; it < nt; ++it)
        for (int i1 = 0; i1 < ny; ++i1)
            for (int i2 = 0; i2 < ny; ++i2) {
                double s = 0.0;
                for (int a = 0; a < f; ++a)
                    for (int b = 0; b < f; ++b) s += p.at(it, i1 * f + a, i2 * f + b);
                out.values[out.index(it, i1, i2)] = s / (f * f);
            }
    return out;
}

InitialTrace initial_trace(const ScalarSolution& u, const DomainBox& domain, int box_level, int sub) {
    if (sub < 1) throw ConfigError("initial trace needs at least one sample per box axis");
    const DyadicGrid grid = make_grid(domain, box_level);
    const double h = grid.h;
    auto averages = [&](double t) {
        CellScalarField f = make_cell_field(grid, t);
        parallel_chunks(static_cast<std::size_t>(grid.nr), 1, [&](std::size_t b, std::size_t e) {
            for (std::size_t jj = b; jj < e; ++jj) {
                const int j = static_cast<int>(jj);
                for (int i1 = 0; i1 < grid.ny; ++i1)
                    for (int i2 = 0; i2 < grid.ny; ++i2) {
                        double s = 0.0;
                        for (int a = 0; a < sub; ++a)
                            for (int c = 0; c < sub; ++c)
                                for (int d = 0; d < sub; ++d)
                                    s += u(t, {j * h + (a + 0.5) * h / sub, i1 * h + (c + 0.5) * h / sub,
                                               i2 * h + (d + 0.5) * h / sub});
                        f.values[f.at(j, i1, i2)] = s / (sub * sub * sub);
                    }
            }
        });
        return f;
    };
    const CellScalarField a1 = averages(h), a2 = averages(0.5 * h), a4 = averages(0.25 * h);
    InitialTrace out;
    out.max_abs = {a1.max_abs(), a2.max_abs(), a4.max_abs()};
    out.w0 = a4;
    out.w0.t = 0.0;
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < a4.values.size(); ++i) {
        out.w0.values[i] = 2.0 * a4.values[i] - a2.values[i];
        d1 = std::max(d1, std::fabs(a2.values[i] - a1.values[i]));
        d2 = std::max(d2, std::fabs(a4.values[i] - a2.values[i]));
    }
    out.cauchy = d2 <= d1 + 1e-14;
    out.note = fmt::format("sup|a(h/2)-a(h)| = {:.3e}, sup|a(h/4)-a(h/2)| = {:.3e}", d1, d2);
    return out;
}

}  // namespace bvt
