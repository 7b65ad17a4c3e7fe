#pragma once
/// @file transport.hpp
/// @brief Exact characteristic flows: event-driven flow map, square quarter
/// turns, chessboard evolutions, backward-traced pushforward.

#include <string>
#include <vector>

#include "bvt/geometry.hpp"
#include "bvt/solution.hpp"

namespace bvt {

/// Block pattern on Q_k = [0, 2^-k]^2: n x n cells of size 2^-k / n.
struct ChessboardState {
    int k = 3;
    double r = 0.0;  ///< evolution parameter within ]0, 2^-k[
    int n = 4;
    std::vector<int> v;  ///< v[i1 * n + i2], values in {-1, 0, 1}

    double side() const { return pow2(-k); }
    double cell() const { return side() / n; }
    int at(int i1, int i2) const { return v[static_cast<std::size_t>(i1) * n + i2]; }
    int& at(int i1, int i2) { return v[static_cast<std::size_t>(i1) * n + i2]; }
    /// Value at a point (lateral coordinates wrapped into Q_k).
    int value(double y1, double y2) const;
    double mean() const;
    /// Resamples on m x m cells (m a multiple of n).
    ChessboardState refine(int m) const;
    bool operator==(const ChessboardState& o) const { return n == o.n && v == o.v; }
};

/// Event-driven exact characteristic x(t1) of dx/dt = b(t, x) through x(t0) = x.
/// Requires field.motion(); t1 < t0 integrates backwards. Trajectories that sit
/// exactly on a region corner are nudged by one ulp (counted in `nudges`).
Vec3 flow_map(const VelocityField& field, double t0, double t1, const Vec3& x, int* nudges = nullptr);

/// Closed-form clockwise quarter turn about the block center: d -> (d2, -d1).
std::array<double, 2> quarter_turn(int k, std::array<double, 2> d);

/// Fixed-step integration of the scaled block field λ_k a_k over `duration`,
/// with each step stopped and restarted at triangle crossings (event location).
std::array<double, 2> integrate_block_ode(int k, std::array<double, 2> d, double duration, double step);

/// States of z_k at r in {0, w, 3w, 4w}, w = 2^{-2-k}: centre quarter turn,
/// four-block half turn, centre quarter turn (applied symbolically on cells).
std::vector<ChessboardState> evolve_chessboard(int k);

/// Forward-integrates m x m marker particles through the α_k schedule with
/// explicit midpoint (steps per sub-interval given) and reports each state's
/// majority value per cell — an oracle independent of the symbolic maps.
std::vector<ChessboardState> marker_oracle(int k, int m, int steps_per_stage);

/// Backward-traced density: value at each cell centre of `grid` (restricted to
/// r-cells [j0, j1)) equals datum(t0, flow_map(field, t, t0, centre)). Cells whose
/// trajectory leaves r > 0 take `boundary_value` and are counted in `flagged`.
CellScalarField pushforward_density(const VelocityField& field, const ScalarSolution& datum, double t0,
                                    double t, const DyadicGrid& grid, int j0, int j1,
                                    double boundary_value = 0.0, std::size_t* flagged = nullptr);

}  // namespace bvt
