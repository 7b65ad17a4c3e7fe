#pragma once
/// @file traces.hpp
/// @brief Normal traces on planes r = const: test functions, one-sided trace
/// profiles of b, bu and u²b, jump profiles, weak-star and strong L¹
/// convergence checks, trace renormalization, boundary classification, and
/// initial traces.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "bvt/geometry.hpp"
#include "bvt/solution.hpp"

namespace bvt {

// ============================================================================
// Test functions
// ============================================================================

/// φ(t, r, y) = A ψ_t(t) ψ_r(r) ψ_1(y1) ψ_2(y2) with ψ_i(x) = b((x - c_i) / w_i),
/// b the standard bump; the lateral factors are periodized with period L.
struct TestFunction {
    std::array<double, 4> centre{0.5, 0.5, 0.25, 0.25};  ///< (t, r, y1, y2)
    std::array<double, 4> width{0.2, 0.1, 0.1, 0.1};
    double amplitude = 1.0;
    double L = 0.5;
    std::string tag;

    bool vanishes_on_boundary() const { return centre[1] - width[1] >= 0.0; }
    bool vanishes_at_t0() const { return centre[0] - width[0] >= 0.0; }
    std::array<double, 2> support(int axis) const {
        return {centre[axis] - width[axis], centre[axis] + width[axis]};
    }

    double factor(int axis, double x) const;
    double factor_deriv(int axis, double x) const;
    /// ∫_a^b ψ_axis (a, b in the unwrapped frame around the centre).
    double factor_integral(int axis, double a, double b) const;

    double value(double t, const Vec3& x) const;
    /// (∂t, ∂r, ∂y1, ∂y2) φ.
    std::array<double, 4> gradient(double t, const Vec3& x) const;
    /// φ on a plane with the r factor dropped: A ψ_t ψ_1 ψ_2.
    double surface_value(double t, double y1, double y2) const;

    /// sup|φ| + sup|∇φ| (the latter bounded by the per-axis maxima).
    double c1_norm() const;
    /// Lipschitz bound of surface_value in (t, y1, y2).
    double surface_lipschitz() const;
};

/// 20 tensor bumps with dyadic centres and three width scales; some touch
/// r = 0 or t = 0, all vanish near t = T.
std::vector<TestFunction> test_battery(double L = 0.5);

// ============================================================================
// Trace profiles
// ============================================================================

/// Plane r = r0 with the fixed orientation (0, -1, 0, 0) in (t, r, y1, y2).
struct GraphFamily {
    double r = 0.0;
    std::array<double, 4> orientation{0.0, -1.0, 0.0, 0.0};
};

/// Above: the side r > r0 (the region whose outward normal is the orientation,
/// i.e. Tr⁻); Below: the side r < r0 (Tr⁺).
enum class TraceSide { Above, Below };

/// Cell-centred (t, y1, y2) grid over ]0,T[ × D with 2^level_t x (L 2^level_y)^2 cells.
struct ProfileGrid {
    int level_t = 4;
    int level_y = 6;
    double T = 1.0;
    double L = 0.5;
    int nt() const { return static_cast<int>(std::ldexp(T, level_t)); }
    int ny() const { return static_cast<int>(std::ldexp(L, level_y)); }
    double tc(int i) const { return (i + 0.5) * std::ldexp(1.0, -level_t); }
    double yc(int i) const { return (i + 0.5) * std::ldexp(1.0, -level_y); }
};

struct TraceProfile {
    ProfileGrid grid;
    double r0 = 0.0;
    TraceSide side = TraceSide::Above;
    std::string source_tag = "b";  ///< "b", "bu" or "u2b"
    std::array<double, 4> orientation{0.0, -1.0, 0.0, 0.0};
    std::vector<double> values;

    std::size_t index(int it, int i1, int i2) const {
        return (static_cast<std::size_t>(it) * grid.ny() + i1) * grid.ny() + i2;
    }
    double at(int it, int i1, int i2) const { return values[index(it, i1, i2)]; }
    double linf() const;
    /// Mean over ]0,T[ × D.
    double mean() const;
    /// Mean of |this - o| over ]0,T[ × D (normalized L¹ distance).
    double l1_distance(const TraceProfile& o) const;
    /// Midpoint-rule ∫∫ value · φ_surface dt dy.
    double pairing(const TestFunction& phi) const;
    std::string orientation_string() const;
};

/// Profile of a function of (t, y1, y2) sampled at cell centres.
TraceProfile make_profile(const ProfileGrid& g, const std::function<double(double, double, double)>& fn,
                          const std::string& tag);
TraceProfile constant_profile(const ProfileGrid& g, double value, const std::string& tag = "b");

/// One-sided normal trace of (1, b) on r = r0: value -b_r(t, r0 ± δ, y).
/// Throws ResolutionError unless r0 is a dyadic plane (multiple of 2^-20).
TraceProfile one_sided_trace(const VelocityField& field, double r0, TraceSide side, const ProfileGrid& g);

/// Trace from sampled face fluxes: the r-face values at r0 (single-valued), one
/// time cell at the flux sampling time. Throws ResolutionError if r0 is not a face.
TraceProfile one_sided_trace(const FaceFluxField& flux, double r0);

/// One-sided trace of the flux (u^power b): value -b_r u^power at r0 ± δ.
TraceProfile flux_trace(const VelocityField& field, const ScalarSolution& u, int power, double r0, TraceSide side,
                        const ProfileGrid& g);

/// Tr⁺ - Tr⁻ = (Below profile) - (Above profile).
TraceProfile trace_jump(const VelocityField& field, double r0, const ProfileGrid& g);

/// ∫_0^T ∫_D (trace value) φ_surface exactly on the lateral pieces when the
/// field/solution exposes them (Gauss in t), else a midpoint lattice at g.
/// With u == nullptr the trace of b is paired; else that of u^power b.
double trace_pairing_exact(const VelocityField& field, const ScalarSolution* u, int power, double r0,
                           TraceSide side, const TestFunction& phi, const ProfileGrid& fallback);

/// ∫_Λ ∇φ·B over Λ = ]0,T[ × Ω for B = (1, b) zero-extended (divergence term
/// zero for divergence-free fields), by a midpoint lattice of spacing 2^-level.
double trace_pairing(const ZeroExtendedField& B, const TestFunction& phi, int level);

// ============================================================================
// Convergence checks
// ============================================================================

struct PairingRow {
    std::size_t profile = 0;
    double scale = 0.0;  ///< r_k or another resolution parameter
    std::size_t test = 0;
    double error = 0.0;  ///< |⟨α - limit, φ⟩|
    double bound = 0.0;  ///< C Lip(φ) scale
};

struct WeakStarReport {
    std::vector<PairingRow> rows;
    double max_ratio = 0.0;    ///< max error / (Lip(φ) scale)
    double fitted_rate = 0.0;  ///< slope of log(max error) vs log(scale)
    bool pass = false;
};

/// Pairing errors given directly (rows[i].error filled by the caller, e.g. via
/// trace_pairing_exact); computes bounds C Lip(φ) scale, ratios and the fit.
WeakStarReport weak_star_summary(std::vector<PairingRow> rows, const std::vector<TestFunction>& tests, double C);

/// Profile-based variant: errors |⟨α_k - limit, φ⟩| by midpoint pairing.
WeakStarReport weak_star_check(const std::vector<TraceProfile>& profiles, const std::vector<double>& scales,
                               const TraceProfile& limit, const std::vector<TestFunction>& tests, double C);

struct StrongRow {
    double r = 0.0;
    double l1 = 0.0;     ///< normalized ‖γ_r - γ₀‖_{L¹}
    double bound = 0.0;  ///< |Db|(S) per unit area; NaN if unavailable
    bool bound_available = false;
};

struct StrongL1Report {
    std::vector<StrongRow> rows;
    bool within_bound = true;  ///< every available bound respected
    bool decreasing = true;    ///< l1 nonincreasing as r -> r0
};

/// bounds[i] is the slab variation between r0 and r_i (NaN when the slab
/// touches the non-BV boundary).
StrongL1Report strong_l1_check(const std::vector<TraceProfile>& gamma, const TraceProfile& limit,
                               const std::vector<double>& bounds);

struct RenormalizationReport {
    double max_residual = 0.0;
    std::size_t points = 0, tangential = 0;
    bool pass = false;
};

/// Tr(u²b) = (Tr(ub)/Tr b)² Tr b where |Tr b| >= 1e-6, Tr(u²b) = 0 elsewhere; tolerance 1e-12.
RenormalizationReport renormalization_trace_check(const TraceProfile& tr_u2b, const TraceProfile& tr_ub,
                                                  const TraceProfile& tr_b);

struct BoundaryReport {
    double gamma_minus = 0.0, gamma_zero = 0.0, gamma_plus = 0.0;  ///< area fractions
    double discrepancy_l1 = 0.0;  ///< normalized ∫_{Γ⁻} |Tr(bu) - ḡ Tr b|
    bool checked = false;         ///< false when Γ⁻ is empty
};

/// Classifies r = 0 by the sign of the Tr b limit profile (|Tr b| < 1e-6 is Γ⁰)
/// and measures the inflow condition on Γ⁻.
BoundaryReport boundary_condition_check(const TraceProfile& tr_b, const TraceProfile& tr_bu,
                                        const std::function<double(double, double, double)>& g_bar);

/// Weak-star limit profile at r = 0 estimated by block averages of the
/// one-sided profile on the finest plane (block = 2^-coarse_level laterally).
TraceProfile coarse_grain(const TraceProfile& p, int coarse_level_y);

struct InitialTrace {
    CellScalarField w0;                ///< extrapolated box averages
    std::array<double, 3> max_abs{};   ///< max |box average| at t = h, h/2, h/4
    bool cauchy = false;               ///< successive differences shrink
    std::string note;
};

/// Box averages of u(t, ·) on the cells of a level-`box_level` grid at
/// t = h, h/2, h/4 (h = 2^-box_level), each box sampled with `sub`^3 points;
/// extrapolated linearly to t = 0.
InitialTrace initial_trace(const ScalarSolution& u, const DomainBox& domain, int box_level, int sub);

}  // namespace bvt
