#pragma once
/// @file solution.hpp
/// @brief Scalar solution evaluators and their exact lateral decompositions.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bvt/core.hpp"

namespace bvt {

/// Sector of a square rotation block: points c + l * d(u) with l in (0, half)
/// and u in (ua, ub) on one side (0 right, 1 bottom, 2 left, 3 top), where d(u)
/// runs clockwise along the unit square starting at the side's first corner.
struct FanPiece {
    double c1 = 0, c2 = 0, half = 0;
    int side = 0;
    double ua = 0, ub = 0;
};

/// Lateral direction of a fan parameter: the area element is l dl du.
inline std::array<double, 2> fan_direction(int side, double u) {
    switch (side) {
        case 0: return {1.0, 1.0 - u};
        case 1: return {1.0 - u, -1.0};
        case 2: return {-1.0, -1.0 + u};
        default: return {-1.0 + u, 1.0};
    }
}

/// Unscaled rotation block velocity: (0, -2 d1) where |d1| > |d2|, else (2 d2, 0).
inline std::array<double, 2> block_velocity(double d1, double d2) {
    if (std::fabs(d1) > std::fabs(d2)) return {0.0, -2.0 * d1};
    return {2.0 * d2, 0.0};
}

/// Receives pieces of (U, B) at fixed r: rectangles with constant values, and
/// rotation sectors where B = (Br, lam * block_velocity(y - c)).
struct PieceVisitor {
    virtual ~PieceVisitor() = default;
    virtual void rect(double y1a, double y1b, double y2a, double y2b, double U, const Vec3& B) = 0;
    virtual void fan(const FanPiece& f, double U, double Br, double lam) = 0;
};

class ScalarSolution {
public:
    virtual ~ScalarSolution() = default;
    virtual double operator()(double t, const Vec3& x) const = 0;
    virtual std::string name() const = 0;

    /// True if u(t,x) = U(x) for r <= t and 0 for r > t, with b(t,x) = B(x) on r <= t.
    virtual bool stationary_below_surface() const { return false; }
    /// Pieces of U (nonzero only) and B over a lateral window at fixed r.
    virtual bool pieces(double /*r*/, double /*y1a*/, double /*y1b*/, double /*y2a*/, double /*y2b*/,
                        PieceVisitor& /*v*/) const {
        return false;
    }
    /// r-values in [r0, r1] where the piece structure changes.
    virtual std::vector<double> r_breakpoints(double /*r0*/, double /*r1*/) const { return {}; }

    double linf_bound = 1.0;
    /// Weak-star limit of the outward boundary flux Tr(bu) at r = 0.
    double boundary_flux_limit = 0.0;
};

using SolutionPtr = std::shared_ptr<const ScalarSolution>;

/// Wraps a closed-form evaluator.
class FunctionSolution : public ScalarSolution {
public:
    FunctionSolution(std::string name, std::function<double(double, const Vec3&)> fn, double linf)
        : name_(std::move(name)), fn_(std::move(fn)) {
        linf_bound = linf;
    }
    double operator()(double t, const Vec3& x) const override { return fn_(t, x); }
    std::string name() const override { return name_; }

private:
    std::string name_;
    std::function<double(double, const Vec3&)> fn_;
};

/// u ≡ 0 (stationary below the surface, with no pieces).
class ZeroSolution : public ScalarSolution {
public:
    ZeroSolution() { linf_bound = 0.0; }
    double operator()(double, const Vec3&) const override { return 0.0; }
    std::string name() const override { return "zero"; }
    bool stationary_below_surface() const override { return true; }
    bool pieces(double, double, double, double, double, PieceVisitor&) const override { return true; }
};

}  // namespace bvt
