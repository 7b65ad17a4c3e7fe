#include "bvt/transport.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <map>

#include "bvt/catalog.hpp"

namespace bvt {

// ============================================================================
// Chessboard states
// ============================================================================

int ChessboardState::value(double y1, double y2) const {
    const double c = cell();
    int i1 = std::clamp(static_cast<int>(std::floor(wrap(y1, side()) / c)), 0, n - 1);
    int i2 = std::clamp(static_cast<int>(std::floor(wrap(y2, side()) / c)), 0, n - 1);
    return at(i1, i2);
}

double ChessboardState::mean() const {
    double s = 0.0;
    for (int x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

ChessboardState ChessboardState::refine(int m) const {
    if (m % n != 0) throw ConfigError(fmt::format("refine({}) of a {}-cell state", m, n));
    ChessboardState out;
    out.k = k;
    out.r = r;
    out.n = m;
    out.v.resize(static_cast<std::size_t>(m) * m);
    const int f = m / n;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.at(i, j) = at(i / f, j / f);
    return out;
}

// ============================================================================
// Flow map
// ============================================================================

Vec3 flow_map(const VelocityField& field, double t0, double t1, const Vec3& x0, int* nudges) {
    const int dir = t1 >= t0 ? 1 : -1;
    Vec3 x = x0;
    double t = t0;
    int stalls = 0;
    for (int iter = 0; iter < 1000000 && t != t1; ++iter) {
        auto m = field.motion(t, x, dir);
        if (!m) throw ConfigError(fmt::format("field {} provides no exact motion", field.name()));
        const double rem = std::fabs(t1 - t);
        if (!(m->horizon > 0.0)) {
            // stuck exactly on a corner: nudge along the motion
            if (++stalls > 8) throw ScheduleError("flow map stalled on a region boundary");
            if (nudges) ++*nudges;
            double towards = dir * m->velocity[0] >= 0.0 ? 1e300 : -1e300;
            x[0] = std::nextafter(x[0], towards);
            x[1] = std::nextafter(x[1], 1e300);
            x[2] = std::nextafter(x[2], 1e300);
            continue;
        }
        stalls = 0;
        const bool full = m->horizon <= rem;
        const double dt = full ? m->horizon : rem;
        const double sdt = dir * dt;
        if (m->rotating) {
            x[0] += sdt * m->velocity[0];
            auto d = square_rotate({x[1] - m->c1, x[2] - m->c2}, 2.0 * m->lam * sdt);
            x[1] = m->c1 + d[0];
            x[2] = m->c2 + d[1];
        } else {
            x = x + sdt * m->velocity;
        }
        if (full) {
            if (!std::isnan(m->snap_r)) x[0] = m->snap_r;
            t = std::isnan(m->snap_t) ? t + sdt : m->snap_t;
            if (m->horizon == rem) t = t1;
        } else {
            t = t1;
        }
    }
    return x;
}

// ============================================================================
// Rotation blocks
// ============================================================================

std::array<double, 2> quarter_turn(int, std::array<double, 2> d) { return {d[1], -d[0]}; }

std::array<double, 2> integrate_block_ode(int k, std::array<double, 2> d, double duration, double step) {
    const double w = pow2(-2 - k), lam = 1.0 / w;
    if (std::max(std::fabs(d[0]), std::fabs(d[1])) >= w) return d;
    // Inside each triangle one coordinate is frozen and the other moves at a
    // constant rate, so a step is exact once it stops at the triangle edge.
    auto advance = [&](double tau) {
        while (tau > 0.0) {
            const bool side = std::fabs(d[0]) > std::fabs(d[1]);
            int axis = side ? 1 : 0;
            double v = side ? -2.0 * lam * d[0] : 2.0 * lam * d[1];
            double target = std::copysign(std::fabs(d[1 - axis]), v);
            double tc = (target - d[axis]) / v;
            if (!(tc > 0.0)) {
                // sitting on a corner: continue along the outgoing side
                axis = 1 - axis;
                v = axis == 1 ? -2.0 * lam * d[0] : 2.0 * lam * d[1];
                target = std::copysign(std::fabs(d[1 - axis]), v);
                tc = (target - d[axis]) / v;
            }
            if (v == 0.0) return;
            if (tc >= tau) {
                d[static_cast<std::size_t>(axis)] += v * tau;
                return;
            }
            d[static_cast<std::size_t>(axis)] = target;
            tau -= tc;
        }
    };
    const long n = std::max(1L, static_cast<long>(std::ceil(duration / step)));
    const double h = duration / static_cast<double>(n);
    for (long i = 0; i < n; ++i) advance(h);
    return d;
}

std::vector<ChessboardState> evolve_chessboard(int k) {
    const double w = pow2(-2 - k);
    std::vector<ChessboardState> states{chessboard_datum(k)};
    states[0].r = 0.0;
    const std::array<double, 3> ends{w, 3 * w, 4 * w};
    for (int stage = 0; stage < 3; ++stage) {
        ChessboardState next = states.back();
        next.r = ends[static_cast<std::size_t>(stage)];
        const ChessboardState& prev = states.back();
        for (const auto& c : alpha_centres(k, stage)) {
            int ci = static_cast<int>(std::lround(c[0] / w)), cj = static_cast<int>(std::lround(c[1] / w));
            for (int a = ci - 1; a <= ci; ++a)
                for (int b = cj - 1; b <= cj; ++b) {
                    // cell centre offset in half-cell units: ±1
                    int d1 = 2 * (a - ci) + 1, d2 = 2 * (b - cj) + 1;
                    std::array<int, 2> e{d1, d2};
                    int turns = stage == 1 ? 2 : 1;
                    for (int q = 0; q < turns; ++q) e = {e[1], -e[0]};
                    int na = ci + (e[0] - 1) / 2, nb = cj + (e[1] - 1) / 2;
                    next.at(na, nb) = prev.at(a, b);
                }
        }
        states.push_back(next);
    }
    return states;
}

std::vector<ChessboardState> marker_oracle(int k, int m, int steps_per_stage) {
    const double s = pow2(-k), w = s / 4.0, cell = s / m;
    AlphaField field(k);
    const ChessboardState datum = chessboard_datum(k);
    struct Marker {
        double y1, y2;
        int value;
    };
    std::vector<Marker> markers;
    markers.reserve(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double y1 = (i + 0.5) * cell, y2 = (j + 0.5) * cell;
            markers.push_back({y1, y2, datum.value(y1, y2)});
        }
    auto vote = [&](double r) {
        ChessboardState st;
        st.k = k;
        st.r = r;
        st.n = 4;
        st.v.assign(16, 0);
        std::vector<int> tally(16, 0);
        for (const auto& mk : markers) {
            int i1 = std::clamp(static_cast<int>(std::floor(wrap(mk.y1, s) / w)), 0, 3);
            int i2 = std::clamp(static_cast<int>(std::floor(wrap(mk.y2, s) / w)), 0, 3);
            tally[static_cast<std::size_t>(i1 * 4 + i2)] += mk.value;
        }
        for (std::size_t i = 0; i < 16; ++i) st.v[i] = tally[i] > 0 ? 1 : (tally[i] < 0 ? -1 : 0);
        return st;
    };
    std::vector<ChessboardState> out{vote(0.0)};
    const std::array<double, 4> ends{0.0, w, 3 * w, 4 * w};
    for (int stage = 0; stage < 3; ++stage) {
        const double t0 = ends[static_cast<std::size_t>(stage)], t1 = ends[static_cast<std::size_t>(stage) + 1];
        const double h = (t1 - t0) / steps_per_stage;
        for (auto& mk : markers)
            for (int n = 0; n < steps_per_stage; ++n) {
                double t = t0 + n * h;
                Vec3 a = field(t + 0.5 * h, {0, mk.y1, mk.y2});
                Vec3 b = field(t + 0.5 * h, {0, mk.y1 + 0.5 * h * a[1], mk.y2 + 0.5 * h * a[2]});
                mk.y1 += h * b[1];
                mk.y2 += h * b[2];
            }
        out.push_back(vote(t1));
    }
    return out;
}

// ============================================================================
// Pushforward
// ============================================================================

CellScalarField pushforward_density(const VelocityField& field, const ScalarSolution& datum, double t0, double t,
                                    const DyadicGrid& grid, int j0, int j1, double boundary_value,
                                    std::size_t* flagged) {
    if (j0 < 0 || j1 > grid.nr || j1 < j0) throw ConfigError("pushforward r-cell range outside the grid");
    CellScalarField out;
    out.grid = grid;
    out.j0 = j0;
    out.j1 = j1;
    out.t = t;
    const int ny = grid.ny;
    out.values.assign(static_cast<std::size_t>(j1 - j0) * ny * ny, 0.0);
    std::vector<unsigned char> flag(out.values.size(), 0);
    parallel_chunks(static_cast<std::size_t>(j1 - j0), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t jj = b; jj < e; ++jj) {
            int j = j0 + static_cast<int>(jj);
            for (int i1 = 0; i1 < ny; ++i1)
                for (int i2 = 0; i2 < ny; ++i2) {
                    Vec3 x0 = flow_map(field, t, t0, {grid.rc(j), grid.yc(i1), grid.yc(i2)});
                    std::size_t idx = out.at(j, i1, i2);
                    if (x0[0] <= 0.0) {
                        out.values[idx] = boundary_value;
                        flag[idx] = 1;
                    } else {
                        out.values[idx] = datum(t0, x0);
                    }
                }
        }
    });
    if (flagged) *flagged = static_cast<std::size_t>(std::count(flag.begin(), flag.end(), 1));
    return out;
}

}  // namespace bvt
