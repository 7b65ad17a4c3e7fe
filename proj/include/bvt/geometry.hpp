#pragma once
/// @file geometry.hpp
/// @brief Domain boxes, dyadic grids, velocity-field interface, face sampling,
/// discrete and mollified divergence, zero extension.

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bvt/core.hpp"

namespace bvt {

// ============================================================================
// Domain and grid
// ============================================================================

/// Half-space truncated at r_max, lateral torus of period y_period, horizon T.
struct DomainBox {
    double r_max = 1.0;
    double y_period = 0.5;
    double T = 1.0;
};

/// Uniform dyadic grid: h = 2^-level, cell counts nr x ny x ny.
struct DyadicGrid {
    DomainBox domain;
    int level = 0;
    double h = 0.0;
    int nr = 0, ny = 0;

    std::size_t cells() const { return static_cast<std::size_t>(nr) * ny * ny; }
    std::size_t index(int j, int i1, int i2) const {
        return (static_cast<std::size_t>(j) * ny + i1) * ny + i2;
    }
    double rc(int j) const { return (j + 0.5) * h; }
    double yc(int i) const { return (i + 0.5) * h; }
};

/// Builds the grid; throws ConfigError when an extent is not a multiple of 2^-level.
DyadicGrid make_grid(const DomainBox& domain, int level);

// ============================================================================
// Velocity fields
// ============================================================================

/// Exact local motion of a characteristic, used by the event-driven flow map.
/// Either a translation with `velocity`, or (rotating == true) a clockwise
/// square-level-set rotation of the lateral coordinates about (c1, c2) with
/// angular parameter rate 2*lam, while r moves with velocity[0].
struct LocalMotion {
    Vec3 velocity{0, 0, 0};
    bool rotating = false;
    double c1 = 0, c2 = 0, half = 0, lam = 0;
    double horizon = std::numeric_limits<double>::infinity();
    /// Exact r and t reached when the full horizon is used (NaN if unknown).
    double snap_r = std::numeric_limits<double>::quiet_NaN();
    double snap_t = std::numeric_limits<double>::quiet_NaN();
};

/// Receives axis-aligned lateral rectangles on which a field is constant.
struct RectVisitor {
    virtual ~RectVisitor() = default;
    virtual void rect(double y1a, double y1b, double y2a, double y2b, const Vec3& value) = 0;
};

enum class Evolution {
    Steady,          ///< independent of the evolution variable
    TimeSchedule,    ///< piecewise constant in t between breakpoints
    TimeContinuous,  ///< depends continuously on t (sampled at slab midpoints)
    RSchedule        ///< steady in t; r-structure changes at breakpoints
};

class VelocityField {
public:
    virtual ~VelocityField() = default;
    virtual Vec3 operator()(double t, const Vec3& x) const = 0;
    virtual std::string name() const = 0;

    /// Exact motion data for characteristics; nullopt if the field has none.
    virtual std::optional<LocalMotion> motion(double /*t*/, const Vec3& /*x*/, int /*dir*/) const {
        return std::nullopt;
    }
    /// Enumerates constant pieces of b(t, r, .) over a lateral window; false if unsupported.
    virtual bool lateral_rects(double /*t*/, double /*r*/, double /*y1a*/, double /*y1b*/,
                               double /*y2a*/, double /*y2b*/, RectVisitor& /*v*/) const {
        return false;
    }
    /// Pieces on which the normal component b_r(t, r, .) is constant (the other
    /// components may vary); defaults to lateral_rects.
    virtual bool normal_rects(double t, double r, double y1a, double y1b, double y2a, double y2b,
                              RectVisitor& v) const {
        return lateral_rects(t, r, y1a, y1b, y2a, y2b, v);
    }
    /// r-values in [r0, r1] where lateral_rects at time t changes structure (smooth in between).
    virtual std::vector<double> r_breakpoints(double /*t*/, double /*r0*/, double /*r1*/) const { return {}; }

    double linf_bound = 0.0;
    double div_linf_bound = 0.0;
    double finest_scale = 0.0;
    bool is_measure_divergence = false;
    Evolution evolution = Evolution::Steady;
    std::vector<double> breakpoints;  ///< schedule of the evolution variable
};

using FieldPtr = std::shared_ptr<const VelocityField>;

/// Constant velocity everywhere.
class ConstantField : public VelocityField {
public:
    explicit ConstantField(Vec3 v);
    Vec3 operator()(double, const Vec3&) const override { return v_; }
    std::string name() const override { return "constant"; }
    std::optional<LocalMotion> motion(double, const Vec3&, int) const override;
    bool lateral_rects(double, double, double y1a, double y1b, double y2a, double y2b,
                       RectVisitor& v) const override;

private:
    Vec3 v_;
};

FieldPtr make_constant_field(Vec3 v);

/// Clockwise advance of a lateral offset d along its square level set
/// max(|d1|,|d2|) by `dtheta` side-halves (dtheta = 2 is a quarter turn).
/// Multiples of 2 are applied as exact rigid rotations.
std::array<double, 2> square_rotate(std::array<double, 2> d, double dtheta);

// ============================================================================
// Discrete images
// ============================================================================

enum class SlabAxis { Time, R };

/// Interval of the field's evolution variable over which a flux is sampled.
struct Slab {
    SlabAxis axis = SlabAxis::Time;
    double lo = 0.0, hi = 0.0;
};

/// Face-normal velocities on the cells j in [j0, j1) of a grid.
/// fr has (j1-j0+1)*ny*ny entries (face below cell j at index j-j0);
/// f1/f2 have one entry per cell, the face on the low lateral side (periodic).
struct FaceFluxField {
    DyadicGrid grid;
    int j0 = 0, j1 = 0;
    double t = 0.0;
    std::vector<double> fr, f1, f2;

    int nr() const { return j1 - j0; }
    std::size_t rface(int j, int i1, int i2) const {
        return (static_cast<std::size_t>(j - j0) * grid.ny + i1) * grid.ny + i2;
    }
    std::size_t cell(int j, int i1, int i2) const { return rface(j, i1, i2); }
};

/// Cell values on the cells j in [j0, j1) of a grid.
struct CellScalarField {
    DyadicGrid grid;
    int j0 = 0, j1 = 0;
    double t = 0.0;
    std::vector<double> values;

    std::size_t at(int j, int i1, int i2) const {
        return (static_cast<std::size_t>(j - j0) * grid.ny + i1) * grid.ny + i2;
    }
    double max_abs() const;
};

CellScalarField make_cell_field(const DyadicGrid& g, double t = 0.0);

/// Samples face-normal components at face centroids. Slab axis R restricts the
/// sampled r-range; axis Time sets the evaluation time (midpoint). Throws
/// ScheduleError if the slab straddles a breakpoint of the field's schedule.
FaceFluxField sample_face_fluxes(const VelocityField& field, const DyadicGrid& grid, const Slab& slab);

/// Sum of outgoing face fluxes times face area over cell volume. Cells touching
/// the r-range ends are included (their outer faces are sampled too).
CellScalarField discrete_divergence(const FaceFluxField& flux);

// ============================================================================
// Mollification
// ============================================================================

/// Tensor-product bump kernel on the max-norm ε-ball with unit mass.
struct Mollifier {
    double eps = 0.0;
    double value(const Vec3& z) const;
    Vec3 gradient(const Vec3& z) const;
};

struct Box3 {
    Vec3 lo{0, 0, 0}, hi{0, 0, 0};
};

struct MollifiedDivergence {
    double l1 = 0.0;
    bool boundary_layer = false;  ///< window closer than eps to r = 0
    bool exact_pieces = false;    ///< computed with exact lateral integration
};

/// Approximates ∫_window |div(b ∗ ρ_ε)| at time t. Fields exposing lateral
/// rectangles are integrated exactly in y and by Gauss in r; otherwise a
/// tensor midpoint rule at resolution eps/8 is used. The field is extended by
/// zero for r < 0.
MollifiedDivergence mollified_divergence_l1(const VelocityField& field, double t, double eps,
                                            const Box3& window, int samples_per_axis = 8);

/// Space-time field (1, b) inside ]0,T[ × Ω and 0 outside.
class ZeroExtendedField {
public:
    ZeroExtendedField(FieldPtr field, DomainBox domain);
    std::array<double, 4> operator()(double t, const Vec3& x) const;
    const VelocityField& inner() const { return *field_; }
    const DomainBox& domain() const { return domain_; }
    double linf_bound;
    bool is_measure_divergence = true;

private:
    FieldPtr field_;
    DomainBox domain_;
};

ZeroExtendedField zero_extend(FieldPtr field, const DomainBox& domain);

}  // namespace bvt
