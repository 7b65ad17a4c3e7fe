#pragma once
/// @file fv.hpp
/// @brief First-order upwind finite volumes for the initial-boundary value
/// problem, weak-formulation residuals, cone-energy (Gronwall) checks and the
/// L² balance.

#include <functional>
#include <string>
#include <vector>

#include "bvt/geometry.hpp"
#include "bvt/solution.hpp"
#include "bvt/traces.hpp"

namespace bvt {

using SurfaceFn = std::function<double(double, double, double)>;  ///< (t, y1, y2)
using SpaceTimeFn = std::function<double(double, const Vec3&)>;    ///< (t, x)

// ============================================================================
// Scenario and trajectory
// ============================================================================

struct Scenario {
    std::string name = "scenario";
    FieldPtr field;
    DomainBox domain;
    int level = 5;
    double cfl = 0.4;
    std::function<double(const Vec3&)> u_bar;  ///< initial datum (cell-centre sampled); null = 0
    SurfaceFn g_bar;                           ///< inflow datum on r = 0; null = 0
    SurfaceFn g_top;                           ///< inflow datum on r = r_max; null = 0
    SpaceTimeFn source;                        ///< f; null = 0
    int snapshot_every = 0;                    ///< steps between snapshots (0: initial and final only)

    void validate() const;  ///< throws ConfigError
};

/// Conserved quantities after a step: mass ∫u, ‖u‖_{L¹}, ‖u‖²_{L²}, and the
/// outward boundary fluxes of u b and u² b (rates).
struct StepLog {
    long step = 0;
    double t = 0.0, dt = 0.0;
    double mass = 0.0, l1 = 0.0, l2 = 0.0;
    double boundary_flux = 0.0;
    double boundary_flux_u2 = 0.0;
    double source_mass = 0.0;  ///< ∫ f over the step
};

struct Trajectory {
    std::vector<std::pair<double, CellScalarField>> snapshots;
    std::vector<StepLog> log;
    const CellScalarField& final_state() const { return snapshots.back().second; }
};

struct StepDiagnostics {
    double boundary_flux = 0.0;     ///< outward ∫ u b·n over r = 0 and r = r_max
    double boundary_flux_u2 = 0.0;  ///< same for u²
    double source_mass = 0.0;
};

/// Donor-cell update over dt with flux sampled for [state.t, state.t + dt].
/// Inflowing boundary faces take ḡ (r = 0) or g_top (r = r_max) at the step
/// midpoint; outflow faces upwind the interior cell; lateral faces are periodic.
/// Throws CflError when dt exceeds 0.45 h / max|b| or a cell's outflow exceeds its content.
CellScalarField upwind_step(const CellScalarField& state, const FaceFluxField& flux, double dt,
                            const SurfaceFn& g_bar, const SpaceTimeFn& f, const SurfaceFn& g_top = nullptr,
                            StepDiagnostics* diag = nullptr);

/// Integrates to the horizon T with dt = cfl h / max|b|, shortened so steps
/// never straddle a breakpoint of a time-scheduled field.
Trajectory solve_ibvp(const Scenario& sc);

/// ∫ |a - b| over the cells (unnormalized, volume h³ per cell).
double l1_difference(const CellScalarField& a, const CellScalarField& b);

/// Cell-centre samples of an exact solution on the grid of `like`.
CellScalarField sample_solution(const ScalarSolution& u, const CellScalarField& like, double t);

// ============================================================================
// Weak residual
// ============================================================================

struct ResidualData {
    SurfaceFn tr_bu;                              ///< Tr(bu) on r = 0; null = solution.boundary_flux_limit
    std::function<double(const Vec3&)> u_bar;     ///< initial datum; null = 0
    SpaceTimeFn f;                                ///< source; null = 0
};

/// Boundary flux data for the residual: ḡ Tr b on Γ⁻ (Tr b < 0), else the
/// solution's own outward flux `outflow`.
SurfaceFn boundary_flux_data(const SurfaceFn& tr_b, const SurfaceFn& g_bar, const SurfaceFn& outflow);

struct ResidualReport {
    double value = 0.0;     ///< LHS - RHS of the weak formulation
    double interior = 0.0;  ///< ∫∫ u (φ_t + b·∇φ)
    double boundary = 0.0;  ///< ∫∫_{r=0} Tr(bu) φ
    double initial = 0.0;   ///< ∫ ū φ(0)
    double source = 0.0;    ///< ∫∫ f φ
    double c1_norm = 0.0;
    std::string method;     ///< "pieces" or "lattice"
};

struct ResidualOptions {
    int lattice_level = 7;        ///< midpoint spacing 2^-level for non-exact terms
    bool force_lattice = false;   ///< skip the exact lateral decomposition
    int r_panels = 2;             ///< Gauss panels per r-segment (8 points each)
};

/// R(φ) = ∫∫ u(φ_t + b·∇φ) + ∫∫ fφ + ∫ ū φ(0) - ∫∫_{r=0} Tr(bu) φ. Solutions that
/// are stationary below the surface r = t are integrated exactly in t and on
/// their lateral pieces, with Gauss in r; otherwise a 4D midpoint lattice is used.
ResidualReport weak_residual(const ScalarSolution& u, const VelocityField& field, const TestFunction& phi,
                             const DomainBox& domain, const ResidualData& data, const ResidualOptions& opt = {});

// ============================================================================
// Cone energy
// ============================================================================

/// ν(t, x) = h(‖b‖ (t - t̄) + |x - x̄|) with h ≡ 1 for arguments <= 1/4, a
/// smoothstep down to 0 at 1/2, and h(s) = 1 for s < 0. |x - x̄| uses the
/// lateral periodic distance.
struct ConeWeight {
    double t_bar = 0.5;
    Vec3 apex{0.0, 0.25, 0.25};
    double speed = 1.0;
    double L = 0.5;

    static double profile(double s);
    static double profile_deriv(double s);
    double distance(const Vec3& x) const;
    double value(double t, const Vec3& x) const;
    /// The weight with |t - t̄| in place of (t - t̄).
    double value_symmetric(double t, const Vec3& x) const;
    /// ∂t ν + ‖b‖ |∇ν| (by differentiating the profile).
    double transport_defect(double t, const Vec3& x, bool symmetric = false) const;
    /// χ_n(t): 1 on [0, t̄], smoothstep to 0 at t̄ + 1/n.
    double cutoff(int n, double t) const;
};

struct ConeInvariants {
    std::size_t samples = 0;
    std::size_t violations = 0;            ///< ∂tν + ‖b‖|∇ν| > 1e-12 for t < t̄
    std::size_t symmetric_violations = 0;  ///< same for the |t - t̄| form
    bool profile_monotone = true;
    bool cutoff_monotone = true;
};

/// Samples the invariants on `n` deterministic pseudo-random points.
ConeInvariants check_cone_invariants(const ConeWeight& w, std::size_t n, const DomainBox& domain);

enum class Verdict { Pass, Fail, Witness };
std::string to_string(Verdict v);

struct ConeEnergyReport {
    double energy = 0.0;          ///< E(t̄) = ∫ ν(t̄) u²(t̄)
    double gronwall_bound = 0.0;  ///< ‖div b‖∞ ∫_0^{t̄} ∫ ν u²
    Verdict verdict = Verdict::Fail;
};

/// E(t̄) of an exact solution by a midpoint lattice of spacing 2^-level (the
/// bound's time integral uses `time_samples` midpoints). PASS when
/// E <= pass_tol, WITNESS when E >= witness_tol, FAIL otherwise.
ConeEnergyReport cone_energy_check(const ScalarSolution& u, const VelocityField& field, const ConeWeight& w,
                                   const DomainBox& domain, int level, double pass_tol, double witness_tol = 0.01,
                                   int time_samples = 8);

/// E(t̄) of a cell field (cell-centre weights) at its own time.
double cone_energy(const CellScalarField& u, const ConeWeight& w);

// ============================================================================
// L² balance
// ============================================================================

struct L2Balance {
    double max_increase = 0.0;       ///< max over steps of Δ∫u² + dt·(outward u²b flux)
    double total_dissipation = 0.0;  ///< -Σ of the same quantity
    double initial = 0.0, final = 0.0;
    bool nonincreasing = true;       ///< every step within 1e-12 of dissipative
};

L2Balance l2_balance_report(const Trajectory& traj);

}  // namespace bvt
