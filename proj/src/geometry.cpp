#include "bvt/geometry.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace bvt {

// ============================================================================
// Grid
// ============================================================================

DyadicGrid make_grid(const DomainBox& domain, int level) {
    if (level < 3 || level > 20) throw ConfigError(fmt::format("grid level {} outside [3, 20]", level));
    if (!(domain.r_max > 0) || !(domain.T > 0) || domain.T > 1.0)
        throw ConfigError("domain requires r_max > 0 and T in ]0, 1]");
    if (!is_multiple_of_pow2(domain.r_max, level) || !is_multiple_of_pow2(domain.y_period, level) ||
        !(domain.y_period > 0))
        throw ConfigError(fmt::format("extents r_max={} L={} are not multiples of 2^-{}", domain.r_max,
                                      domain.y_period, level));
    DyadicGrid g;
    g.domain = domain;
    g.level = level;
    g.h = pow2(-level);
    g.nr = static_cast<int>(std::ldexp(domain.r_max, level));
    g.ny = static_cast<int>(std::ldexp(domain.y_period, level));
    return g;
}

// ============================================================================
// Fields
// ============================================================================

ConstantField::ConstantField(Vec3 v) : v_(v) {
    linf_bound = norm(v);
    finest_scale = std::numeric_limits<double>::infinity();
}

std::optional<LocalMotion> ConstantField::motion(double, const Vec3&, int) const {
    LocalMotion m;
    m.velocity = v_;
    return m;
}

bool ConstantField::lateral_rects(double, double, double y1a, double y1b, double y2a, double y2b,
                                  RectVisitor& v) const {
    v.rect(y1a, y1b, y2a, y2b, v_);
    return true;
}

FieldPtr make_constant_field(Vec3 v) { return std::make_shared<ConstantField>(v); }

std::array<double, 2> square_rotate(std::array<double, 2> d, double dtheta) {
    double l = std::max(std::fabs(d[0]), std::fabs(d[1]));
    if (l == 0.0 || dtheta == 0.0) return d;
    double q = dtheta / 2.0;
    if (q == std::floor(q)) {
        long n = static_cast<long>(std::fmod(q, 4.0));
        if (n < 0) n += 4;
        for (long i = 0; i < n; ++i) d = {d[1], -d[0]};
        return d;
    }
    // perimeter parameter in units of l, clockwise from the top-right corner
    double th;
    if (d[0] == l && d[1] > -l) th = (l - d[1]) / l;
    else if (d[1] == -l && d[0] > -l) th = 2.0 + (l - d[0]) / l;
    else if (d[0] == -l && d[1] < l) th = 4.0 + (d[1] + l) / l;
    else th = 6.0 + (d[0] + l) / l;
    th = wrap(th + dtheta, 8.0);
    int side = std::min(static_cast<int>(th / 2.0), 3);
    double u = th - 2.0 * side;
    switch (side) {
        case 0: return {l, l - u * l};
        case 1: return {l - u * l, -l};
        case 2: return {-l, -l + u * l};
        default: return {-l + u * l, l};
    }
}

// ============================================================================
// Discrete images
// ============================================================================

double CellScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

CellScalarField make_cell_field(const DyadicGrid& g, double t) {
    CellScalarField c;
    c.grid = g;
    c.j0 = 0;
    c.j1 = g.nr;
    c.t = t;
    c.values.assign(g.cells(), 0.0);
    return c;
}

FaceFluxField sample_face_fluxes(const VelocityField& field, const DyadicGrid& grid, const Slab& slab) {
    FaceFluxField f;
    f.grid = grid;
    const double h = grid.h;
    if (slab.hi < slab.lo) throw ConfigError("slab with hi < lo");
    auto straddles = [&](Evolution kind) {
        if (field.evolution != kind) return;
        for (double b : field.breakpoints)
            if (b > slab.lo && b < slab.hi)
                throw ScheduleError(fmt::format("slab ]{}, {}[ straddles schedule breakpoint {} of {}", slab.lo,
                                                slab.hi, b, field.name()));
    };
    if (slab.axis == SlabAxis::R) {
        if (!is_multiple_of_pow2(slab.lo, grid.level) || !is_multiple_of_pow2(slab.hi, grid.level) ||
            slab.lo < 0 || slab.hi > grid.domain.r_max)
            throw ResolutionError("r-slab ends must be grid faces inside the domain");
        straddles(Evolution::RSchedule);
        f.j0 = static_cast<int>(std::ldexp(slab.lo, grid.level));
        f.j1 = static_cast<int>(std::ldexp(slab.hi, grid.level));
        f.t = 0.0;
    } else {
        straddles(Evolution::TimeSchedule);
        f.j0 = 0;
        f.j1 = grid.nr;
        f.t = 0.5 * (slab.lo + slab.hi);
    }
    const int ny = grid.ny, nrs = f.nr();
    f.fr.assign(static_cast<std::size_t>(nrs + 1) * ny * ny, 0.0);
    f.f1.assign(static_cast<std::size_t>(nrs) * ny * ny, 0.0);
    f.f2.assign(static_cast<std::size_t>(nrs) * ny * ny, 0.0);
    const double t = f.t;
    // the top face of an r-slab takes the slab's own (left) limit
    auto rface_at = [&](int j) {
        double r = j * h;
        return slab.axis == SlabAxis::R && j == f.j1 ? std::nextafter(r, -1.0) : r;
    };
    parallel_chunks(static_cast<std::size_t>(nrs + 1), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t jj = b; jj < e; ++jj) {
            int j = f.j0 + static_cast<int>(jj);
            for (int i1 = 0; i1 < ny; ++i1)
                for (int i2 = 0; i2 < ny; ++i2) {
                    f.fr[f.rface(j, i1, i2)] = field(t, {rface_at(j), grid.yc(i1), grid.yc(i2)})[0];
                    if (j < f.j1) {
                        f.f1[f.cell(j, i1, i2)] = field(t, {grid.rc(j), i1 * h, grid.yc(i2)})[1];
                        f.f2[f.cell(j, i1, i2)] = field(t, {grid.rc(j), grid.yc(i1), i2 * h})[2];
                    }
                }
        }
    });
    return f;
}

CellScalarField discrete_divergence(const FaceFluxField& flux) {
    CellScalarField d;
    d.grid = flux.grid;
    d.j0 = flux.j0;
    d.j1 = flux.j1;
    d.t = flux.t;
    const int ny = flux.grid.ny;
    const double h = flux.grid.h;
    d.values.assign(static_cast<std::size_t>(flux.nr()) * ny * ny, 0.0);
    parallel_chunks(static_cast<std::size_t>(flux.nr()), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t jj = b; jj < e; ++jj) {
            int j = flux.j0 + static_cast<int>(jj);
            for (int i1 = 0; i1 < ny; ++i1)
                for (int i2 = 0; i2 < ny; ++i2) {
                    int p1 = (i1 + 1) % ny, p2 = (i2 + 1) % ny;
                    double out = flux.fr[flux.rface(j + 1, i1, i2)] - flux.fr[flux.rface(j, i1, i2)] +
                                 flux.f1[flux.cell(j, p1, i2)] - flux.f1[flux.cell(j, i1, i2)] +
                                 flux.f2[flux.cell(j, i1, p2)] - flux.f2[flux.cell(j, i1, i2)];
                    d.values[d.at(j, i1, i2)] = out * (h * h) / (h * h * h);
                }
        }
    });
    return d;
}

// ============================================================================
// Mollification
// ============================================================================

namespace {
double rho1(double s, double eps) { return bump::value(s / eps) / (bump::mass() * eps); }
double drho1(double s, double eps) { return bump::deriv(s / eps) / (bump::mass() * eps * eps); }
// ∫_a^b rho1(x - z) dz
double rho1_int(double x, double a, double b, double eps) {
    return (bump::integral((x - a) / eps) - bump::integral((x - b) / eps)) / bump::mass();
}
}  // namespace

double Mollifier::value(const Vec3& z) const { return rho1(z[0], eps) * rho1(z[1], eps) * rho1(z[2], eps); }

Vec3 Mollifier::gradient(const Vec3& z) const {
    double a = rho1(z[0], eps), b = rho1(z[1], eps), c = rho1(z[2], eps);
    return {drho1(z[0], eps) * b * c, a * drho1(z[1], eps) * c, a * b * drho1(z[2], eps)};
}

namespace {

// div(b ∗ ρ)(x) = Σ_i ∫ b_i(z) ∂_i ρ(x - z) dz with exact lateral integration
struct DivAccumulator : RectVisitor {
    double x1, x2, eps, wr = 0, dwr = 0, sum = 0;
    void rect(double a1, double b1, double a2, double b2, const Vec3& v) override {
        double i1 = rho1_int(x1, a1, b1, eps), i2 = rho1_int(x2, a2, b2, eps);
        // ∫_a^b ∂_x rho1(x - z) dz = rho1(x - a) - rho1(x - b)
        double d1 = rho1(x1 - a1, eps) - rho1(x1 - b1, eps);
        double d2 = rho1(x2 - a2, eps) - rho1(x2 - b2, eps);
        sum += v[0] * dwr * i1 * i2 + wr * (v[1] * d1 * i2 + v[2] * i1 * d2);
    }
};

double div_pieces(const VelocityField& field, double t, const Vec3& x, double eps) {
    double lo = std::max(0.0, x[0] - eps), hi = x[0] + eps;
    if (hi <= lo) return 0.0;
    std::vector<double> cuts{lo, hi};
    for (double b : field.r_breakpoints(t, lo, hi))
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    const GaussRule& g = gauss_legendre(10);
    DivAccumulator acc;
    acc.x1 = x[1];
    acc.x2 = x[2];
    acc.eps = eps;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double a = cuts[s], b = cuts[s + 1], c = 0.5 * (a + b), hw = 0.5 * (b - a);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            double zr = c + hw * g.x[q];
            acc.wr = rho1(x[0] - zr, eps) * g.w[q] * hw;
            acc.dwr = drho1(x[0] - zr, eps) * g.w[q] * hw;
            field.lateral_rects(t, zr, x[1] - eps, x[1] + eps, x[2] - eps, x[2] + eps, acc);
        }
    }
    return acc.sum;
}

double div_midpoint(const VelocityField& field, double t, const Vec3& x, double eps) {
    const int n = 16;  // resolution eps/8 on [-eps, eps]
    const double dz = 2.0 * eps / n;
    Mollifier m{eps};
    double s = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                Vec3 z{-eps + (a + 0.5) * dz, -eps + (b + 0.5) * dz, -eps + (c + 0.5) * dz};
                Vec3 p = x - z;
                if (p[0] <= 0.0) continue;
                s += dot(field(t, p), m.gradient(z));
            }
    return s * dz * dz * dz;
}

struct ProbeVisitor : RectVisitor {
    void rect(double, double, double, double, const Vec3&) override {}
};

}  // namespace

MollifiedDivergence mollified_divergence_l1(const VelocityField& field, double t, double eps,
                                            const Box3& window, int samples_per_axis) {
    if (!(eps > 0)) throw ConfigError("mollifier radius must be positive");
    MollifiedDivergence out;
    out.boundary_layer = window.lo[0] < eps;
    ProbeVisitor probe;
    out.exact_pieces = field.lateral_rects(t, std::max(window.lo[0], eps), 0, eps, 0, eps, probe);
    const int n = samples_per_axis;
    Vec3 d = {(window.hi[0] - window.lo[0]) / n, (window.hi[1] - window.lo[1]) / n,
              (window.hi[2] - window.lo[2]) / n};
    out.l1 = parallel_sum(static_cast<std::size_t>(n) * n * n, [&](std::size_t idx) {
        int a = static_cast<int>(idx / (n * n)), b = static_cast<int>((idx / n) % n), c = static_cast<int>(idx % n);
        Vec3 x{window.lo[0] + (a + 0.5) * d[0], window.lo[1] + (b + 0.5) * d[1], window.lo[2] + (c + 0.5) * d[2]};
        double g = out.exact_pieces ? div_pieces(field, t, x, eps) : div_midpoint(field, t, x, eps);
        return std::fabs(g) * d[0] * d[1] * d[2];
    }, 16);
    return out;
}

// ============================================================================
// Zero extension
// ============================================================================

ZeroExtendedField::ZeroExtendedField(FieldPtr field, DomainBox domain)
    : linf_bound(std::max(1.0, field->linf_bound)), field_(std::move(field)), domain_(domain) {}

std::array<double, 4> ZeroExtendedField::operator()(double t, const Vec3& x) const {
    if (!(t > 0.0 && t < domain_.T && x[0] > 0.0)) return {0, 0, 0, 0};
    Vec3 b = (*field_)(t, x);
    return {1.0, b[0], b[1], b[2]};
}

ZeroExtendedField zero_extend(FieldPtr field, const DomainBox& domain) { return ZeroExtendedField(std::move(field), domain); }

}  // namespace bvt
