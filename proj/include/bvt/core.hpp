#pragma once
/// @file core.hpp
/// @brief Shared vocabulary: points, error kinds, dyadic helpers, deterministic parallel loops.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvt {

/// Point or vector in Ω coordinates (r, y1, y2).
using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// ============================================================================
// Error kinds (each maps onto a CLI exit code in the harness)
// ============================================================================

struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ScheduleError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ResolutionError : std::runtime_error { using std::runtime_error::runtime_error; };
struct CflError : std::runtime_error { using std::runtime_error::runtime_error; };

// ============================================================================
// Dyadic helpers
// ============================================================================

/// 2^e as an exact double (normal range built from the exponent bits).
inline double pow2(int e) {
    if (e < -1022 || e > 1023) return std::ldexp(1.0, e);
    return std::bit_cast<double>(static_cast<std::uint64_t>(e + 1023) << 52);
}

/// True if x is an integer multiple of 2^-level (exact test; x assumed finite).
inline bool is_multiple_of_pow2(double x, int level) {
    double q = std::ldexp(x, level);
    return q == std::floor(q);
}

/// x mod p in [0, p); exact for dyadic x and p.
inline double wrap(double x, double p) {
    // a positive power of two has an empty mantissa: x - p floor(x/p) is then exact
    const bool dyadic = (std::bit_cast<std::uint64_t>(p) & ((std::uint64_t{1} << 52) - 1)) == 0 && p > 0;
    double m = dyadic ? x - p * std::floor(x / p) : std::fmod(x, p);
    if (m < 0) m += p;
    if (m >= p) m -= p;
    return m;
}

// ============================================================================
// Deterministic data-parallel loops
// ============================================================================

/// Worker count: BVT_THREADS if set (>=1), else hardware concurrency.
int worker_count();

/// Runs body(begin, end) over fixed-size chunks of [0, n). Chunking depends
/// only on n and chunk, never on the worker count.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Sum of term(i) over [0, n), reduced chunk-by-chunk in fixed order so the
/// result is bit-identical for every worker count.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term,
                    std::size_t chunk = 4096);

// ============================================================================
// Quadrature
// ============================================================================

/// Gauss–Legendre nodes/weights on [-1, 1].
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

/// Integrates f over [a, b] with n-point Gauss–Legendre.
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int n);

// ============================================================================
// Smooth bump b(s) = exp(1 - 1/(1 - s^2)) on |s| < 1, b(0) = 1
// ============================================================================

namespace bump {
double value(double s);
double deriv(double s);
double second(double s);
/// ∫_{-1}^{s} b, clamped outside [-1, 1]; tabulated with cubic Hermite
/// interpolation (absolute error below 1e-13).
double integral(double s);
/// ∫_{-1}^{1} b.
double mass();
}  // namespace bump

}  // namespace bvt
