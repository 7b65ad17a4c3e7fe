#pragma once
/// @file catalog.hpp
/// @brief Exact counterexample fields and solutions: rotation blocks, the
/// dyadic β_k / β̃_k constructions, their assembly on ]0,1[ × Ω, and the
/// solutions they carry.

#include <array>
#include <string>
#include <vector>

#include "bvt/geometry.hpp"
#include "bvt/solution.hpp"
#include "bvt/transport.hpp"

namespace bvt {

// ============================================================================
// Variants and schedule
// ============================================================================

enum class Variant { Inward, Outward, Corollary, TangentOutward, TangentCorollary };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);  ///< throws ConfigError
const std::vector<Variant>& all_variants();

struct ConstructionVariant {
    Variant tag = Variant::Outward;
    int k_max = 6;
    /// r-component on black squares: -5, or -1 for the tangent variants.
    double black() const;
    bool tangent() const { return tag == Variant::TangentOutward || tag == Variant::TangentCorollary; }
    bool corollary() const { return tag == Variant::Corollary || tag == Variant::TangentCorollary; }
    void validate() const;  ///< throws ConfigError unless 4 <= k_max <= 12
};

struct DyadicInterval {
    int k;
    double lo, hi;  ///< I_k = ]2^{2-k}, 2^{3-k}[
};
std::vector<DyadicInterval> dyadic_schedule(int k_max);

/// Locates σ in the schedule: level k and unit offset P = (σ - 2^{2-k}) / 2^-k in [0, 4).
/// frozen == true below the left end of I_{k_max} (then k = k_max, P = 0).
struct ScheduleLocation {
    int k;
    double P;
    bool frozen;
};
ScheduleLocation locate(double sigma, int k_max);

// ============================================================================
// β_k branch table in unit coordinates (s = 2^-k, period cell [0,4)^2)
// ============================================================================

/// Rectangle Y1 ∈ [a1 + m1 dP, b1 + m1 dP), Y2 ∈ [a2 + m2 dP, b2 + m2 dP) where dP is
/// the offset into the step; value b_r * (1, m1, m2) with b_r = 1 (dashed) or black.
struct RectBranch {
    bool dashed;
    double a1, b1, m1, a2, b2, m2;
};

struct BetaStep {
    double p0, p1;
    std::vector<RectBranch> branches;
};

const std::array<BetaStep, 4>& beta_steps();
int beta_step_index(double P);
Vec3 branch_value(const RectBranch& br, double black);

/// Branch containing unit point (Y in [0,4)^2) at offset dP of step `step`; -1 for the zero region.
int beta_find(int step, double dP, double Y1, double Y2);

/// β_k value at unit coordinates.
Vec3 beta_unit(double P, double Y1, double Y2, double black);

/// Visits the rectangles of β_k(P, .) intersecting [y1a,y1b]x[y2a,y2b]
/// (physical coordinates, period 4s); only_dashed skips black branches.
void beta_rects(int k, double P, double black, double y1a, double y1b, double y2a, double y2b,
                RectVisitor& v, bool only_dashed = false);

// ============================================================================
// Fields
// ============================================================================

/// Rotation block λ_k a_k on the square of half-width 2^{-2-k} about the origin
/// (planar: reads x[1], x[2]; t unused). λ_k = 2^{2+k}, or 1 when unscaled.
class RotationBlockField : public VelocityField {
public:
    RotationBlockField(int k, bool scaled);
    Vec3 operator()(double t, const Vec3& x) const override;
    std::string name() const override { return "rotation_block"; }
    double lambda() const { return lam_; }
    double half() const { return half_; }

private:
    int k_;
    double lam_, half_;
};

/// α_k on Q_k: planar field whose evolution variable is t (standing for r).
class AlphaField : public VelocityField {
public:
    explicit AlphaField(int k);
    Vec3 operator()(double t, const Vec3& x) const override;
    std::string name() const override { return "alpha_k"; }
    std::optional<LocalMotion> motion(double t, const Vec3& x, int dir) const override;
    int k() const { return k_; }

private:
    int k_;
};

/// Stage data of α_k at unit offset ρ in [0, 4w): stage index, its start, centres.
struct AlphaStage {
    int stage;      ///< 0 centre, 1 four blocks, 2 centre; -1 outside ]0, 2^-k[
    double start;   ///< stage start (physical ρ)
    double dtheta;  ///< rotation parameter advanced since stage start
};
AlphaStage alpha_stage(int k, double rho);
/// Block centres (local to Q_k) active in a stage.
std::vector<std::array<double, 2>> alpha_centres(int k, int stage);
/// α_k(ρ, y) with y local to Q_k.
std::array<double, 2> alpha_value(int k, double rho, double y1, double y2);

/// β_k on ]0, 2^{2-k}[ × torus, 2^{2-k}-periodic; zero outside the r-range.
class BetaField : public VelocityField {
public:
    BetaField(int k, double black = -5.0);
    Vec3 operator()(double t, const Vec3& x) const override;
    std::string name() const override;
    std::optional<LocalMotion> motion(double t, const Vec3& x, int dir) const override;
    bool lateral_rects(double t, double r, double y1a, double y1b, double y2a, double y2b,
                       RectVisitor& v) const override;
    std::vector<double> r_breakpoints(double t, double r0, double r1) const override;
    int k() const { return k_; }
    double black() const { return black_; }

private:
    int k_;
    double black_;
};

/// β̃_k: β_k with the rotation blocks α_k on the dashed squares for r < 2^-k.
class TildeBetaField : public VelocityField {
public:
    TildeBetaField(int k, double black = -5.0);
    Vec3 operator()(double t, const Vec3& x) const override;
    std::string name() const override;
    std::optional<LocalMotion> motion(double t, const Vec3& x, int dir) const override;
    int k() const { return k_; }

private:
    int k_;
    double black_;
};

/// Wraps the lateral coordinates of a field modulo `period`.
class PeriodicField : public VelocityField {
public:
    PeriodicField(FieldPtr inner, double period);
    Vec3 operator()(double t, const Vec3& x) const override;
    std::string name() const override { return inner_->name() + "_periodic"; }
    std::optional<LocalMotion> motion(double t, const Vec3& x, int dir) const override;

private:
    FieldPtr inner_;
    double period_;
};

/// Throws ConfigError unless `period` divides the lateral period L.
FieldPtr periodic_extend(FieldPtr field, double period, double L = 0.5);

/// Assembled variant field on ]0,1[ × Ω (Λ⁻: r <= t, Λ⁺: r > t); the planes r = 0
/// and r = 1 take the one-sided limits from inside, so boundary faces carry flux.
class AssembledField : public VelocityField {
public:
    explicit AssembledField(ConstructionVariant v);
    Vec3 operator()(double t, const Vec3& x) const override;
    std::string name() const override;
    bool lateral_rects(double t, double r, double y1a, double y1b, double y2a, double y2b,
                       RectVisitor& v) const override;
    bool normal_rects(double t, double r, double y1a, double y1b, double y2a, double y2b,
                      RectVisitor& v) const override;
    std::vector<double> r_breakpoints(double t, double r0, double r1) const override;
    const ConstructionVariant& variant() const { return v_; }

private:
    ConstructionVariant v_;
};

FieldPtr assemble_field(const ConstructionVariant& v);

/// Smooth divergence-free baseline b = (1, a sin(ω r), a cos(ω r)).
class SmoothShearField : public VelocityField {
public:
    SmoothShearField(double amplitude, double omega);
    Vec3 operator()(double t, const Vec3& x) const override;
    std::string name() const override { return "smooth_shear"; }
    /// ∫_0^r of the lateral components.
    std::array<double, 2> lateral_shift(double r) const;

private:
    double a_, w_;
};

// ============================================================================
// Data and solutions
// ============================================================================

/// Sign of the datum at level k: z̄_k = (-1)^k C_k with C_k(i,j) = (-1)^{i+j}.
int datum_sign(int k);

/// z̄_k on Q_k: 4 x 4 cells of size 2^{-2-k}.
ChessboardState chessboard_datum(int k);

/// Value of the α_k evolution z_k(ρ, y) (y local to Q_k), ρ in [0, 2^-k];
/// the full-cycle pattern is returned for ρ >= 2^-k.
double z_value(int k, double rho, double y1, double y2);

/// Exact solution of a variant: outward 1 on the Λ⁻ dashed regions; corollary
/// the transported chessboards u_k; inward the mixing solution v.
SolutionPtr exact_solution(const ConstructionVariant& v);

/// Steady solutions of the fixed-k fields: 1 on the dashed branches of β_k,
/// and u_k for β̃_k. Time-independent; zero outside ]0, 2^{2-k}[.
SolutionPtr beta_dashed_solution(int k, double black = -5.0);
SolutionPtr tilde_beta_solution(int k, double black = -5.0);

/// |Db|(S) per unit lateral area for β_k on the slab r ∈ ]r0, r1[ (jump
/// surfaces weighted by their true area, including r-plane jumps).
double beta_slab_total_variation(int k, double black, double r0, double r1);

/// Normal trace Tr b = -b_r(0+, .) as a weak-star limit (variant constant).
double boundary_trace_limit(Variant v);

}  // namespace bvt
