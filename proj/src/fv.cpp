#include "bvt/fv.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <random>

namespace bvt {

// ============================================================================
// Scenario
// ============================================================================

void Scenario::validate() const {
    if (!field) throw ConfigError(fmt::format("scenario {} has no field", name));
    if (!(cfl > 0.0) || cfl > 0.45) throw ConfigError(fmt::format("CFL number {} outside ]0, 0.45]", cfl));
    if (level < 1 || level > 12) throw ConfigError(fmt::format("grid level {} outside [1, 12]", level));
    if (!(domain.T > 0.0)) throw ConfigError("horizon must be positive");
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
}

// ============================================================================
// Upwind step
// ============================================================================

CellScalarField upwind_step(const CellScalarField& state, const FaceFluxField& flux, double dt,
                            const SurfaceFn& g_bar, const SpaceTimeFn& f, const SurfaceFn& g_top,
                            StepDiagnostics* diag) {
    const DyadicGrid& g = state.grid;
    if (state.j0 != 0 || state.j1 != g.nr || flux.j0 != 0 || flux.j1 != g.nr || flux.grid.level != g.level)
        throw ConfigError("upwind step needs full-grid state and flux on the same grid");
    const int nr = g.nr, ny = g.ny;
    const double h = g.h, tm = state.t + 0.5 * dt;

    double fmax = 0.0;
    for (double v : flux.fr) fmax = std::max(fmax, std::fabs(v));
    for (double v : flux.f1) fmax = std::max(fmax, std::fabs(v));
    for (double v : flux.f2) fmax = std::max(fmax, std::fabs(v));
    if (dt * fmax > 0.45 * h * (1.0 + 1e-12))
        throw CflError(fmt::format("dt = {:.6g} exceeds 0.45 h / max|b| = {:.6g}", dt, 0.45 * h / fmax));

    auto u = [&](int j, int i1, int i2) { return state.values[state.at(j, i1, i2)]; };
    auto wrapi = [ny](int i) { return (i + ny) % ny; };

    // boundary inflow values on the r = 0 and r = r_max faces
    std::vector<double> gin(static_cast<std::size_t>(ny) * ny, 0.0), gout(gin.size(), 0.0);
    for (int i1 = 0; i1 < ny; ++i1)
        for (int i2 = 0; i2 < ny; ++i2) {
            const std::size_t k = static_cast<std::size_t>(i1) * ny + i2;
            if (g_bar) gin[k] = g_bar(tm, g.yc(i1), g.yc(i2));
            if (g_top) gout[k] = g_top(tm, g.yc(i1), g.yc(i2));
        }
    // upwinded r-face value of the flux b_r u (and b_r u²)
    auto rflux = [&](int j, int i1, int i2, int power) {
        const double F = flux.fr[flux.rface(j, i1, i2)];
        double up;
        if (F >= 0.0)
            up = j == 0 ? gin[static_cast<std::size_t>(i1) * ny + i2] : u(j - 1, i1, i2);
        else
            up = j == nr ? gout[static_cast<std::size_t>(i1) * ny + i2] : u(j, i1, i2);
        return F * (power == 1 ? up : up * up);
    };

    CellScalarField out = state;
    out.t = state.t + dt;
    bool cfl_ok = true;
    parallel_chunks(static_cast<std::size_t>(nr), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t jj = b; jj < e; ++jj) {
            const int j = static_cast<int>(jj);
            for (int i1 = 0; i1 < ny; ++i1)
                for (int i2 = 0; i2 < ny; ++i2) {
                    const double F1lo = flux.f1[flux.cell(j, i1, i2)];
                    const double F1hi = flux.f1[flux.cell(j, wrapi(i1 + 1), i2)];
                    const double F2lo = flux.f2[flux.cell(j, i1, i2)];
                    const double F2hi = flux.f2[flux.cell(j, i1, wrapi(i2 + 1))];
                    const double Frlo = flux.fr[flux.rface(j, i1, i2)];
                    const double Frhi = flux.fr[flux.rface(j + 1, i1, i2)];
                    const double outflow = std::max(Frhi, 0.0) + std::max(-Frlo, 0.0) + std::max(F1hi, 0.0) +
                                           std::max(-F1lo, 0.0) + std::max(F2hi, 0.0) + std::max(-F2lo, 0.0);
                    if (outflow * dt > h * (1.0 + 1e-12)) cfl_ok = false;
                    auto lat = [&](double F, double lo, double hi) { return F >= 0.0 ? F * lo : F * hi; };
                    const double c = u(j, i1, i2);
                    const double div = rflux(j + 1, i1, i2, 1) - rflux(j, i1, i2, 1) +
                                       lat(F1hi, c, u(j, wrapi(i1 + 1), i2)) -
                                       lat(F1lo, u(j, wrapi(i1 - 1), i2), c) +
                                       lat(F2hi, c, u(j, i1, wrapi(i2 + 1))) -
                                       lat(F2lo, u(j, i1, wrapi(i2 - 1)), c);
                    double v = c - dt / h * div;
                    if (f) v += dt * f(tm, {g.rc(j), g.yc(i1), g.yc(i2)});
                    out.values[out.at(j, i1, i2)] = v;
                }
        }
    });
    if (!cfl_ok) throw CflError("a cell's outflow over the step exceeds its volume");
    if (diag) {
        StepDiagnostics d;
        const double area = h * h;
        for (int i1 = 0; i1 < ny; ++i1)
            for (int i2 = 0; i2 < ny; ++i2) {
                d.boundary_flux += area * (rflux(nr, i1, i2, 1) - rflux(0, i1, i2, 1));
                d.boundary_flux_u2 += area * (rflux(nr, i1, i2, 2) - rflux(0, i1, i2, 2));
            }
        if (f) {
            d.source_mass = dt * h * h * h *
                            parallel_sum(state.values.size(), [&](std::size_t idx) {
                                const int j = static_cast<int>(idx / (static_cast<std::size_t>(ny) * ny));
                                const int i1 = static_cast<int>((idx / ny) % ny), i2 = static_cast<int>(idx % ny);
                                return f(tm, {g.rc(j), g.yc(i1), g.yc(i2)});
                            });
        }
        *diag = d;
    }
    return out;
}

// ============================================================================
// Solver
// ============================================================================

namespace {

StepLog measure(const CellScalarField& u, long step, double dt, const StepDiagnostics& d) {
    const double vol = u.grid.h * u.grid.h * u.grid.h;
    StepLog row;
    row.step = step;
    row.t = u.t;
    row.dt = dt;
    const auto& v = u.values;
    row.mass = vol * parallel_sum(v.size(), [&](std::size_t i) { return v[i]; });
    row.l1 = vol * parallel_sum(v.size(), [&](std::size_t i) { return std::fabs(v[i]); });
    row.l2 = vol * parallel_sum(v.size(), [&](std::size_t i) { return v[i] * v[i]; });
    row.boundary_flux = d.boundary_flux;
    row.boundary_flux_u2 = d.boundary_flux_u2;
    row.source_mass = d.source_mass;
    return row;
}

double max_face_flux(const FaceFluxField& f) {
    double m = 0.0;
    for (const auto* vec : {&f.fr, &f.f1, &f.f2})
        for (double v : *vec) m = std::max(m, std::fabs(v));
    return m;
}

}  // namespace

Trajectory solve_ibvp(const Scenario& sc) {
    sc.validate();
    const VelocityField& field = *sc.field;
    const DyadicGrid grid = make_grid(sc.domain, sc.level);
    CellScalarField state = make_cell_field(grid, 0.0);
    if (sc.u_bar)
        for (int j = 0; j < grid.nr; ++j)
            for (int i1 = 0; i1 < grid.ny; ++i1)
                for (int i2 = 0; i2 < grid.ny; ++i2)
                    state.values[state.at(j, i1, i2)] = sc.u_bar({grid.rc(j), grid.yc(i1), grid.yc(i2)});

    const bool frozen_flux = field.evolution == Evolution::Steady || field.evolution == Evolution::RSchedule;
    FaceFluxField flux;
    if (frozen_flux) flux = sample_face_fluxes(field, grid, Slab{SlabAxis::Time, 0.0, 0.0});
    const double speed = std::max(field.linf_bound, frozen_flux ? max_face_flux(flux) : 0.0);
    const double dt0 = speed > 0.0 ? sc.cfl * grid.h / speed : sc.domain.T;

    Trajectory traj;
    traj.snapshots.emplace_back(0.0, state);
    traj.log.push_back(measure(state, 0, 0.0, {}));
    const double T = sc.domain.T;
    long step = 0;
    while (state.t < T) {
        double t1 = std::min(T, state.t + dt0);
        if (field.evolution == Evolution::TimeSchedule)
            for (double b : field.breakpoints)
                if (b > state.t && b < t1) t1 = b;
        if (T - t1 < 1e-14 * T) t1 = T;
        const double dt = t1 - state.t;
        if (!frozen_flux) flux = sample_face_fluxes(field, grid, Slab{SlabAxis::Time, state.t, t1});
        StepDiagnostics d;
        state = upwind_step(state, flux, dt, sc.g_bar, sc.source, sc.g_top, &d);
        state.t = t1;
        ++step;
        traj.log.push_back(measure(state, step, dt, d));
        if ((sc.snapshot_every > 0 && step % sc.snapshot_every == 0) || state.t >= T)
            traj.snapshots.emplace_back(state.t, state);
    }
    return traj;
}

double l1_difference(const CellScalarField& a, const CellScalarField& b) {
    if (a.values.size() != b.values.size()) throw ConfigError("cell fields on different grids");
    const double vol = a.grid.h * a.grid.h * a.grid.h;
    return vol * parallel_sum(a.values.size(), [&](std::size_t i) { return std::fabs(a.values[i] - b.values[i]); });
}

CellScalarField sample_solution(const ScalarSolution& u, const CellScalarField& like, double t) {
    CellScalarField out = like;
    out.t = t;
    const DyadicGrid& g = like.grid;
    parallel_chunks(static_cast<std::size_t>(like.j1 - like.j0), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t jj = b; jj < e; ++jj) {
            const int j = like.j0 + static_cast<int>(jj);
            for (int i1 = 0; i1 < g.ny; ++i1)
                for (int i2 = 0; i2 < g.ny; ++i2)
                    out.values[out.at(j, i1, i2)] = u(t, {g.rc(j), g.yc(i1), g.yc(i2)});
        }
    });
    return out;
}

// ============================================================================
// Weak residual
// ============================================================================

SurfaceFn boundary_flux_data(const SurfaceFn& tr_b, const SurfaceFn& g_bar, const SurfaceFn& outflow) {
    return [=](double t, double y1, double y2) {
        const double b = tr_b(t, y1, y2);
        if (b < 0.0) return (g_bar ? g_bar(t, y1, y2) : 0.0) * b;
        return outflow ? outflow(t, y1, y2) : 0.0;
    };
}

namespace {

// ∫ U [(-θ(r) ψr + Θ(r) B_r ψr') ψ1 ψ2 + Θ(r) ψr (B_1 ψ1' ψ2 + B_2 ψ1 ψ2')] over lateral pieces.
struct InteriorPieces : PieceVisitor {
    const TestFunction& phi;
    double a = 0.0, c = 0.0;  // multipliers of ψ1ψ2 (without B_r) and of the lateral gradient terms
    double cr = 0.0;          // multiplier of B_r ψ1ψ2
    double sum = 0.0;
    explicit InteriorPieces(const TestFunction& f) : phi(f) {}

    void rect(double a1, double b1, double a2, double b2, double U, const Vec3& B) override {
        const double I1 = phi.factor_integral(2, a1, b1), I2 = phi.factor_integral(3, a2, b2);
        const double D1 = phi.factor(2, b1) - phi.factor(2, a1), D2 = phi.factor(3, b2) - phi.factor(3, a2);
        sum += U * ((a + cr * B[0]) * I1 * I2 + c * (B[1] * D1 * I2 + B[2] * I1 * D2));
    }
    void fan(const FanPiece& f, double U, double Br, double lam) override {
        const GaussRule& g = gauss_legendre(4);
        double s = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double l = 0.5 * f.half * (g.x[i] + 1.0);
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const double uu = f.ua + 0.5 * (f.ub - f.ua) * (g.x[j] + 1.0);
                auto d = fan_direction(f.side, uu);
                const double y1 = f.c1 + l * d[0], y2 = f.c2 + l * d[1];
                auto v = block_velocity(l * d[0], l * d[1]);
                const double p1 = phi.factor(2, y1), p2 = phi.factor(3, y2);
                const double q1 = phi.factor_deriv(2, y1), q2 = phi.factor_deriv(3, y2);
                const double val = (a + cr * Br) * p1 * p2 + c * lam * (v[0] * q1 * p2 + v[1] * p1 * q2);
                s += g.w[i] * g.w[j] * l * val;
            }
        }
        sum += U * s * 0.25 * f.half * (f.ub - f.ua);
    }
};

struct Box4 {
    std::array<double, 2> t, r, y1, y2;
};

Box4 support_box(const TestFunction& phi, const DomainBox& dom, double h) {
    auto clip = [&](int axis, double lo, double hi) {
        auto s = phi.support(axis);
        double a = std::max(lo, std::floor(s[0] / h) * h), b = std::min(hi, std::ceil(s[1] / h) * h);
        return std::array<double, 2>{a, std::max(a, b)};
    };
    return {clip(0, 0.0, dom.T), clip(1, 0.0, dom.r_max), clip(2, -1e9, 1e9), clip(3, -1e9, 1e9)};
}

int count(const std::array<double, 2>& a, double h) { return static_cast<int>(std::lround((a[1] - a[0]) / h)); }

}  // namespace

ResidualReport weak_residual(const ScalarSolution& u, const VelocityField& field, const TestFunction& phi,
                             const DomainBox& domain, const ResidualData& data, const ResidualOptions& opt) {
    ResidualReport rep;
    rep.c1_norm = phi.c1_norm();
    const double h = pow2(-opt.lattice_level);
    const Box4 box = support_box(phi, domain, h);
    const int nt = count(box.t, h), nr = count(box.r, h), n1 = count(box.y1, h), n2 = count(box.y2, h);
    const double T = domain.T;
    const bool window_ok = 2.0 * phi.width[2] <= phi.L && 2.0 * phi.width[3] <= phi.L;

    // ---- interior term
    bool exact = !opt.force_lattice && window_ok && u.stationary_below_surface();
    if (exact) {
        const double y1a = phi.centre[2] - phi.width[2], y1b = phi.centre[2] + phi.width[2];
        const double y2a = phi.centre[3] - phi.width[3], y2b = phi.centre[3] + phi.width[3];
        auto rs = phi.support(1);
        const double ra = std::max(0.0, rs[0]), rb = std::min({domain.r_max, T, rs[1]});
        std::vector<double> cuts{ra};
        for (double b : u.r_breakpoints(ra, rb)) cuts.push_back(b);
        cuts.push_back(rb);
        std::sort(cuts.begin(), cuts.end());
        const GaussRule& g = gauss_legendre(8);
        double total = 0.0;
        for (std::size_t s = 0; s + 1 < cuts.size() && exact; ++s) {
            const double a = cuts[s], b = cuts[s + 1];
            if (!(b > a)) continue;
            const double hp = (b - a) / opt.r_panels;
            for (int q = 0; q < opt.r_panels && exact; ++q)
                for (std::size_t i = 0; i < g.x.size(); ++i) {
                    const double r = a + q * hp + 0.5 * hp * (g.x[i] + 1.0);
                    const double psi = phi.factor(1, r), dpsi = phi.factor_deriv(1, r);
                    if (psi == 0.0 && dpsi == 0.0) continue;
                    const double theta = phi.factor(0, r), Theta = phi.factor_integral(0, r, T);
                    InteriorPieces ip(phi);
                    ip.a = -theta * psi;
                    ip.cr = Theta * dpsi;
                    ip.c = Theta * psi;
                    if (!u.pieces(r, y1a, y1b, y2a, y2b, ip)) {
                        exact = false;
                        break;
                    }
                    total += 0.5 * hp * g.w[i] * ip.sum;
                }
        }
        rep.interior = phi.amplitude * total;
    }
    if (!exact) {
        const double vol = h * h * h * h;
        rep.interior = parallel_sum(static_cast<std::size_t>(nt) * nr, [&](std::size_t idx) {
            const double t = box.t[0] + (static_cast<double>(idx / nr) + 0.5) * h;
            const double r = box.r[0] + (static_cast<double>(idx % nr) + 0.5) * h;
            double s = 0.0;
            for (int i1 = 0; i1 < n1; ++i1)
                for (int i2 = 0; i2 < n2; ++i2) {
                    const Vec3 x{r, box.y1[0] + (i1 + 0.5) * h, box.y2[0] + (i2 + 0.5) * h};
                    const double w = u(t, x);
                    if (w == 0.0) continue;
                    auto gp = phi.gradient(t, x);
                    const Vec3 b = field(t, x);
                    s += w * (gp[0] + b[0] * gp[1] + b[1] * gp[2] + b[2] * gp[3]);
                }
            return s * vol;
        }, 1);
    }
    rep.method = exact ? "pieces" : "lattice";

    // ---- boundary term ∫∫_{r=0} Tr(bu) φ
    const double psi0 = phi.factor(1, 0.0);
    if (psi0 != 0.0) {
        if (!data.tr_bu && window_ok) {
            rep.boundary = u.boundary_flux_limit * phi.amplitude * psi0 * phi.factor_integral(0, 0.0, T) *
                           phi.factor_integral(2, phi.centre[2] - phi.width[2], phi.centre[2] + phi.width[2]) *
                           phi.factor_integral(3, phi.centre[3] - phi.width[3], phi.centre[3] + phi.width[3]);
        } else {
            double s = 0.0;
            for (int it = 0; it < nt; ++it) {
                const double t = box.t[0] + (it + 0.5) * h;
                for (int i1 = 0; i1 < n1; ++i1)
                    for (int i2 = 0; i2 < n2; ++i2) {
                        const double y1 = box.y1[0] + (i1 + 0.5) * h, y2 = box.y2[0] + (i2 + 0.5) * h;
                        const double tr = data.tr_bu ? data.tr_bu(t, y1, y2) : u.boundary_flux_limit;
                        s += tr * phi.value(t, {0.0, y1, y2});
                    }
            }
            rep.boundary = s * h * h * h;
        }
    }

    // ---- initial term ∫ ū φ(0)
    if (data.u_bar && phi.factor(0, 0.0) != 0.0) {
        double s = 0.0;
        for (int j = 0; j < nr; ++j)
            for (int i1 = 0; i1 < n1; ++i1)
                for (int i2 = 0; i2 < n2; ++i2) {
                    const Vec3 x{box.r[0] + (j + 0.5) * h, box.y1[0] + (i1 + 0.5) * h, box.y2[0] + (i2 + 0.5) * h};
                    s += data.u_bar(x) * phi.value(0.0, x);
                }
        rep.initial = s * h * h * h;
    }

    // ---- source term ∫∫ f φ
    if (data.f) {
        const double vol = h * h * h * h;
        rep.source = parallel_sum(static_cast<std::size_t>(nt) * nr, [&](std::size_t idx) {
            const double t = box.t[0] + (static_cast<double>(idx / nr) + 0.5) * h;
            const double r = box.r[0] + (static_cast<double>(idx % nr) + 0.5) * h;
            double s = 0.0;
            for (int i1 = 0; i1 < n1; ++i1)
                for (int i2 = 0; i2 < n2; ++i2) {
                    const Vec3 x{r, box.y1[0] + (i1 + 0.5) * h, box.y2[0] + (i2 + 0.5) * h};
                    s += data.f(t, x) * phi.value(t, x);
                }
            return s * vol;
        }, 1);
    }

    rep.value = rep.interior + rep.source + rep.initial - rep.boundary;
    return rep;
}

// ============================================================================
// Cone weight
// ============================================================================

double ConeWeight::profile(double s) {
    if (s <= 0.25) return 1.0;
    if (s >= 0.5) return 0.0;
    const double x = (s - 0.25) / 0.25;
    return 1.0 - x * x * (3.0 - 2.0 * x);
}

double ConeWeight::profile_deriv(double s) {
    if (s <= 0.25 || s >= 0.5) return 0.0;
    const double x = (s - 0.25) / 0.25;
    return -6.0 * x * (1.0 - x) / 0.25;
}

double ConeWeight::distance(const Vec3& x) const {
    const double dr = x[0] - apex[0];
    const double d1 = wrap(x[1] - apex[1] + 0.5 * L, L) - 0.5 * L;
    const double d2 = wrap(x[2] - apex[2] + 0.5 * L, L) - 0.5 * L;
    return std::sqrt(dr * dr + d1 * d1 + d2 * d2);
}

double ConeWeight::value(double t, const Vec3& x) const { return profile(speed * (t - t_bar) + distance(x)); }

double ConeWeight::value_symmetric(double t, const Vec3& x) const {
    return profile(speed * std::fabs(t - t_bar) + distance(x));
}

double ConeWeight::transport_defect(double t, const Vec3& x, bool symmetric) const {
    const double arg = symmetric ? speed * std::fabs(t - t_bar) + distance(x) : speed * (t - t_bar) + distance(x);
    const double hp = profile_deriv(arg);
    const double dt_sign = symmetric ? (t < t_bar ? -1.0 : 1.0) : 1.0;
    const double grad = distance(x) > 0.0 ? std::fabs(hp) : 0.0;  // |∇|x - x̄|| = 1 away from the apex
    return dt_sign * speed * hp + speed * grad;
}

double ConeWeight::cutoff(int n, double t) const {
    if (t <= t_bar) return 1.0;
    const double x = (t - t_bar) * n;
    if (x >= 1.0) return 0.0;
    return 1.0 - x * x * (3.0 - 2.0 * x);
}

ConeInvariants check_cone_invariants(const ConeWeight& w, std::size_t n, const DomainBox& domain) {
    ConeInvariants rep;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ut(0.0, w.t_bar), ur(0.0, domain.r_max), uy(0.0, domain.y_period);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = ut(rng);
        const Vec3 x{ur(rng), uy(rng), uy(rng)};
        ++rep.samples;
        if (w.transport_defect(t, x, false) > 1e-12) ++rep.violations;
        if (w.transport_defect(t, x, true) > 1e-12) ++rep.symmetric_violations;
    }
    double prev = ConeWeight::profile(-1.0), prevc = w.cutoff(4, 0.0);
    for (int i = 0; i <= 4000; ++i) {
        const double s = -1.0 + i * 1e-3;
        const double v = ConeWeight::profile(s);
        if (v > prev || ConeWeight::profile_deriv(s) > 0.0 || v < 0.0) rep.profile_monotone = false;
        prev = v;
        const double c = w.cutoff(4, i * 2.5e-4 * domain.T * 4.0);
        if (c > prevc) rep.cutoff_monotone = false;
        prevc = c;
    }
    return rep;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Witness: return "WITNESS";
        default: return "FAIL";
    }
}

namespace {

double weighted_energy(const ScalarSolution& u, const ConeWeight& w, const DomainBox& dom, int level, double t) {
    const double h = pow2(-level);
    const int nr = static_cast<int>(std::lround(dom.r_max / h)), ny = static_cast<int>(std::lround(dom.y_period / h));
    return h * h * h * parallel_sum(static_cast<std::size_t>(nr), [&](std::size_t j) {
        double s = 0.0;
        const double r = (static_cast<double>(j) + 0.5) * h;
        for (int i1 = 0; i1 < ny; ++i1)
            for (int i2 = 0; i2 < ny; ++i2) {
                const Vec3 x{r, (i1 + 0.5) * h, (i2 + 0.5) * h};
                const double nu = w.value(t, x);
                if (nu == 0.0) continue;
                const double v = u(t, x);
                s += nu * v * v;
            }
        return s;
    }, 1);
}

}  // namespace

ConeEnergyReport cone_energy_check(const ScalarSolution& u, const VelocityField& field, const ConeWeight& w,
                                   const DomainBox& domain, int level, double pass_tol, double witness_tol,
                                   int time_samples) {
    ConeEnergyReport rep;
    rep.energy = weighted_energy(u, w, domain, level, w.t_bar);
    if (field.div_linf_bound > 0.0) {
        double s = 0.0;
        for (int i = 0; i < time_samples; ++i)
            s += weighted_energy(u, w, domain, level, (i + 0.5) * w.t_bar / time_samples);
        rep.gronwall_bound = field.div_linf_bound * s * w.t_bar / time_samples;
    }
    if (rep.energy <= pass_tol)
        rep.verdict = Verdict::Pass;
    else if (rep.energy >= witness_tol)
        rep.verdict = Verdict::Witness;
    else
        rep.verdict = Verdict::Fail;
    return rep;
}

double cone_energy(const CellScalarField& u, const ConeWeight& w) {
    const DyadicGrid& g = u.grid;
    const double vol = g.h * g.h * g.h;
    return vol * parallel_sum(u.values.size(), [&](std::size_t idx) {
        const int ny = g.ny;
        const int j = u.j0 + static_cast<int>(idx / (static_cast<std::size_t>(ny) * ny));
        const int i1 = static_cast<int>((idx / ny) % ny), i2 = static_cast<int>(idx % ny);
        const double v = u.values[idx];
        return v == 0.0 ? 0.0 : w.value(u.t, {g.rc(j), g.yc(i1), g.yc(i2)}) * v * v;
    });
}

// ============================================================================
// L² balance
// ============================================================================

L2Balance l2_balance_report(const Trajectory& traj) {
    L2Balance rep;
    if (traj.log.empty()) return rep;
    rep.initial = traj.log.front().l2;
    rep.final = traj.log.back().l2;
    for (std::size_t i = 1; i < traj.log.size(); ++i) {
        const auto& a = traj.log[i - 1];
        const auto& b = traj.log[i];
        const double inc = b.l2 - a.l2 + b.dt * b.boundary_flux_u2;
        rep.max_increase = std::max(rep.max_increase, inc);
        rep.total_dissipation -= inc;
        if (inc > 1e-12 * std::max(1.0, a.l2)) rep.nonincreasing = false;
    }
    return rep;
}

}  // namespace bvt
