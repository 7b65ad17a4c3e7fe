#include "bvt/catalog.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <mutex>

namespace bvt {

// ============================================================================
// Variants and schedule
// ============================================================================

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Inward: return "inward_depauw";
        case Variant::Outward: return "outward";
        case Variant::Corollary: return "corollary";
        case Variant::TangentOutward: return "tangent_outward";
        case Variant::TangentCorollary: return "tangent_corollary";
    }
    return "unknown";
}

Variant parse_variant(const std::string& s) {
    for (Variant v : all_variants())
        if (to_string(v) == s) return v;
    throw ConfigError(fmt::format("unknown variant '{}'", s));
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> v{Variant::Inward, Variant::Outward, Variant::Corollary,
                                        Variant::TangentOutward, Variant::TangentCorollary};
    return v;
}

double ConstructionVariant::black() const { return tangent() ? -1.0 : -5.0; }

void ConstructionVariant::validate() const {
    if (k_max < 4 || k_max > 12) throw ConfigError(fmt::format("kmax {} outside [4, 12]", k_max));
}

std::vector<DyadicInterval> dyadic_schedule(int k_max) {
    std::vector<DyadicInterval> out;
    for (int k = 3; k <= k_max; ++k) out.push_back({k, pow2(2 - k), pow2(3 - k)});
    return out;
}

ScheduleLocation locate(double sigma, int k_max) {
    if (sigma < pow2(2 - k_max)) return {k_max, 0.0, true};
    int e = 0;
    std::frexp(sigma, &e);  // sigma in [2^(e-1), 2^e)
    int k = std::max(3 - e, 3);
    double s = pow2(-k);
    double P = (sigma - 4.0 * s) / s;
    if (P >= 4.0) P = std::nextafter(4.0, 0.0);
    return {k, P, false};
}

// ============================================================================
// β_k branch table
// ============================================================================

const std::array<BetaStep, 4>& beta_steps() {
    static const std::array<BetaStep, 4> steps{{
        {0, 1,
         {{true, 0, 1, 0, 0, 1, 0},
          {true, 2, 3, 0, 0, 1, 0},
          {true, 0, 1, 0, 2, 3, 0},
          {true, 2, 3, 0, 2, 3, 0},
          {false, 1, 2, 0, 1, 2, 0},
          {false, 3, 4, 0, 1, 2, 0},
          {false, 1, 2, 0, 3, 4, 0},
          {false, 3, 4, 0, 3, 4, 0}}},
        {1, 2,
         {{true, 0, 1, 0, 0, 1, 0},
          {true, 0, 1, 0, 2, 3, 0},
          {true, 2, 3, -1, 0, 1, 0},
          {true, 2, 3, -1, 2, 3, 0},
          {false, 3, 4, 0, 1, 2, 0},
          {false, 3, 4, 0, 3, 4, 0},
          {false, 1, 2, 1, 1, 2, 0},
          {false, 1, 2, 1, 3, 4, 0}}},
        {2, 3,
         {{true, 0, 2, 0, 0, 1, 0},
          {true, 0, 2, 0, 2, 3, -1},
          {false, 2, 4, 0, 3, 4, 0},
          {false, 2, 4, 0, 1, 2, 1}}},
        {3, 4, {{true, 0, 2, 0, 0, 2, 0}, {false, 2, 4, 0, 2, 4, 0}}},
    }};
    return steps;
}

int beta_step_index(double P) { return std::clamp(static_cast<int>(std::floor(P)), 0, 3); }

Vec3 branch_value(const RectBranch& br, double black) {
    double b = br.dashed ? 1.0 : black;
    return {b, b * br.m1, b * br.m2};
}

int beta_find(int step, double dP, double Y1, double Y2) {
    const auto& st = beta_steps()[static_cast<std::size_t>(step)];
    for (std::size_t i = 0; i < st.branches.size(); ++i) {
        const auto& b = st.branches[i];
        if (Y1 >= b.a1 + b.m1 * dP && Y1 < b.b1 + b.m1 * dP && Y2 >= b.a2 + b.m2 * dP && Y2 < b.b2 + b.m2 * dP)
            return static_cast<int>(i);
    }
    return -1;
}

Vec3 beta_unit(double P, double Y1, double Y2, double black) {
    if (P < 0.0 || P >= 4.0) return {0, 0, 0};
    int step = beta_step_index(P);
    int b = beta_find(step, P - step, Y1, Y2);
    if (b < 0) return {0, 0, 0};
    return branch_value(beta_steps()[static_cast<std::size_t>(step)].branches[static_cast<std::size_t>(b)], black);
}

namespace {

// Tile index range [n0, n1) of period p covering [a, b].
std::pair<long, long> tile_range(double a, double b, double p) {
    return {static_cast<long>(std::floor(a / p)), static_cast<long>(std::ceil(b / p))};
}

bool clip(double& a, double& b, double lo, double hi) {
    a = std::max(a, lo);
    b = std::min(b, hi);
    return b > a;
}

}  // namespace

void beta_rects(int k, double P, double black, double y1a, double y1b, double y2a, double y2b, RectVisitor& v,
                bool only_dashed) {
    if (P < 0.0 || P >= 4.0) return;
    const double s = pow2(-k), p = 4.0 * s;
    int step = beta_step_index(P);
    double dP = P - step;
    const auto& st = beta_steps()[static_cast<std::size_t>(step)];
    auto [n1a, n1b] = tile_range(y1a, y1b, p);
    auto [n2a, n2b] = tile_range(y2a, y2b, p);
    for (long n1 = n1a; n1 < n1b; ++n1)
        for (long n2 = n2a; n2 < n2b; ++n2)
            for (const auto& br : st.branches) {
                if (only_dashed && !br.dashed) continue;
                double a1 = n1 * p + (br.a1 + br.m1 * dP) * s, b1 = n1 * p + (br.b1 + br.m1 * dP) * s;
                double a2 = n2 * p + (br.a2 + br.m2 * dP) * s, b2 = n2 * p + (br.b2 + br.m2 * dP) * s;
                if (clip(a1, b1, y1a, y1b) && clip(a2, b2, y2a, y2b)) v.rect(a1, b1, a2, b2, branch_value(br, black));
            }
}

// ============================================================================
// Rotation blocks
// ============================================================================

RotationBlockField::RotationBlockField(int k, bool scaled)
    : k_(k), lam_(scaled ? pow2(2 + k) : 1.0), half_(pow2(-2 - k)) {
    linf_bound = 2.0 * lam_ * half_;
    finest_scale = half_;
}

Vec3 RotationBlockField::operator()(double, const Vec3& x) const {
    if (std::max(std::fabs(x[1]), std::fabs(x[2])) >= half_) return {0, 0, 0};
    auto a = block_velocity(x[1], x[2]);
    return {0.0, lam_ * a[0], lam_ * a[1]};
}

AlphaStage alpha_stage(int k, double rho) {
    const double w = pow2(-2 - k);
    if (rho < 0.0 || rho >= 4.0 * w) return {-1, 0.0, 0.0};
    double start = rho < w ? 0.0 : (rho < 3.0 * w ? w : 3.0 * w);
    int stage = rho < w ? 0 : (rho < 3.0 * w ? 1 : 2);
    return {stage, start, 2.0 * (rho - start) / w};
}

namespace {

/// Non-allocating form of alpha_centres for the evaluation hot path; returns the count.
int centres_into(int k, int stage, std::array<std::array<double, 2>, 4>& out) {
    const double w = pow2(-2 - k);
    if (stage == 1) {
        out = {{{w, w}, {3 * w, w}, {w, 3 * w}, {3 * w, 3 * w}}};
        return 4;
    }
    if (stage == 0 || stage == 2) {
        out[0] = {2 * w, 2 * w};
        return 1;
    }
    return 0;
}

}  // namespace

std::vector<std::array<double, 2>> alpha_centres(int k, int stage) {
    std::array<std::array<double, 2>, 4> c;
    const int n = centres_into(k, stage, c);
    return {c.begin(), c.begin() + n};
}

std::array<double, 2> alpha_value(int k, double rho, double y1, double y2) {
    AlphaStage st = alpha_stage(k, rho);
    if (st.stage < 0) return {0, 0};
    const double w = pow2(-2 - k);
    std::array<std::array<double, 2>, 4> cs;
    const int n = centres_into(k, st.stage, cs);
    for (int i = 0; i < n; ++i) {
        const auto& c = cs[static_cast<std::size_t>(i)];
        double d1 = y1 - c[0], d2 = y2 - c[1];
        if (std::max(std::fabs(d1), std::fabs(d2)) < w) {
            auto a = block_velocity(d1, d2);
            return {a[0] / w, a[1] / w};
        }
    }
    return {0, 0};
}

namespace {

// Active block of stage `stage` containing local point y (Q_k coordinates); -1 if none.
int active_block(int k, int stage, double y1, double y2) {
    const double w = pow2(-2 - k);
    std::array<std::array<double, 2>, 4> cs;
    const auto n = static_cast<std::size_t>(centres_into(k, stage, cs));
    for (std::size_t i = 0; i < n; ++i)
        if (std::max(std::fabs(y1 - cs[i][0]), std::fabs(y2 - cs[i][1])) < w) return static_cast<int>(i);
    return -1;
}

}  // namespace

AlphaField::AlphaField(int k) : k_(k) {
    const double w = pow2(-2 - k);
    linf_bound = 2.0;
    finest_scale = w;
    evolution = Evolution::TimeSchedule;
    breakpoints = {0.0, w, 3 * w, 4 * w};
}

Vec3 AlphaField::operator()(double t, const Vec3& x) const {
    const double s = pow2(-k_);
    auto a = alpha_value(k_, t, wrap(x[1], s), wrap(x[2], s));
    return {0.0, a[0], a[1]};
}

std::optional<LocalMotion> AlphaField::motion(double t, const Vec3& x, int dir) const {
    const double s = pow2(-k_), w = s / 4.0;
    LocalMotion m;
    if (dir > 0 ? (t < 0.0 || t >= 4 * w) : (t <= 0.0 || t > 4 * w)) {
        if (dir > 0 && t < 0.0) m.horizon = -t, m.snap_t = 0.0;
        if (dir < 0 && t > 4 * w) m.horizon = t - 4 * w, m.snap_t = 4 * w;
        return m;
    }
    // stage containing t on the side we move into
    double probe = dir > 0 ? t : std::nextafter(t, -1.0);
    AlphaStage st = alpha_stage(k_, probe);
    double end = st.stage == 0 ? w : (st.stage == 1 ? 3 * w : 4 * w);
    m.horizon = dir > 0 ? end - t : t - st.start;
    m.snap_t = dir > 0 ? end : st.start;
    double o1 = std::floor(x[1] / s) * s, o2 = std::floor(x[2] / s) * s;
    int b = active_block(k_, st.stage, x[1] - o1, x[2] - o2);
    if (b >= 0) {
        auto c = alpha_centres(k_, st.stage)[static_cast<std::size_t>(b)];
        m.rotating = true;
        m.c1 = o1 + c[0];
        m.c2 = o2 + c[1];
        m.half = w;
        m.lam = 1.0 / w;
    }
    return m;
}

// ============================================================================
// β_k, β̃_k
// ============================================================================

namespace {

// Region of the (tilde) β pattern containing a unit point: constant velocity or
// a rotation block, valid on the unit r-range [p0, p1).
struct Region {
    bool found = false;
    Vec3 v{0, 0, 0};
    bool rot = false;
    double c1 = 0, c2 = 0;  // block centre relative to the 4s tile origin (physical)
    double p0 = 0, p1 = 0;
};

Region region_at(int k, double black, double P, double Y1, double Y2, bool rotation) {
    Region R;
    if (P < 0.0 || P >= 4.0) return R;
    const double s = pow2(-k);
    if (rotation && P < 1.0) {
        int q1 = static_cast<int>(std::floor(Y1)), q2 = static_cast<int>(std::floor(Y2));
        if (q1 % 2 == 1 && q2 % 2 == 1) {
            R.found = true;
            R.v = {black, 0, 0};
            R.p0 = 0.0;
            R.p1 = 1.0;
        } else if (q1 % 2 == 0 && q2 % 2 == 0) {
            AlphaStage st = alpha_stage(k, P * s);
            R.found = true;
            R.v = {1, 0, 0};
            R.p0 = st.start / s;
            R.p1 = st.stage == 0 ? 0.25 : (st.stage == 1 ? 0.75 : 1.0);
            int b = active_block(k, st.stage, (Y1 - q1) * s, (Y2 - q2) * s);
            if (b >= 0) {
                auto c = alpha_centres(k, st.stage)[static_cast<std::size_t>(b)];
                R.rot = true;
                R.c1 = q1 * s + c[0];
                R.c2 = q2 * s + c[1];
            }
        }
        return R;
    }
    int step = beta_step_index(P);
    int b = beta_find(step, P - step, Y1, Y2);
    if (b < 0) return R;
    R.found = true;
    R.v = branch_value(beta_steps()[static_cast<std::size_t>(step)].branches[static_cast<std::size_t>(b)], black);
    R.p0 = step;
    R.p1 = step + 1.0;
    return R;
}

std::optional<LocalMotion> pattern_motion(int k, double black, const Vec3& x, int dir, bool rotation) {
    const double s = pow2(-k), p = 4.0 * s, w = s / 4.0;
    LocalMotion m;
    double P = x[0] / s;
    double o1 = std::floor(x[1] / p) * p, o2 = std::floor(x[2] / p) * p;
    double Y1 = (x[1] - o1) / s, Y2 = (x[2] - o2) / s;
    Region R = region_at(k, black, P, Y1, Y2, rotation);
    if (P > 0.0 && P * 4.0 == std::floor(P * 4.0)) {
        Region L = region_at(k, black, std::nextafter(P, -1.0), Y1, Y2, rotation);
        if (L.found && dir * L.v[0] < 0.0) R = L;
    }
    if (!R.found) return m;
    m.velocity = R.v;
    double speed = std::fabs(R.v[0]);
    if (dir * R.v[0] > 0.0) {
        m.horizon = (R.p1 - P) * s / speed;
        m.snap_r = R.p1 * s;
    } else {
        m.horizon = (P - R.p0) * s / speed;
        m.snap_r = R.p0 * s;
    }
    if (R.rot) {
        m.rotating = true;
        m.c1 = o1 + R.c1;
        m.c2 = o2 + R.c2;
        m.half = w;
        m.lam = 1.0 / w;
    }
    return m;
}

}  // namespace

BetaField::BetaField(int k, double black) : k_(k), black_(black) {
    const double s = pow2(-k);
    linf_bound = std::max(1.0, std::fabs(black)) * std::sqrt(2.0);
    finest_scale = s;
    evolution = Evolution::RSchedule;
    breakpoints = {0.0, s, 2 * s, 3 * s, 4 * s};
}

std::string BetaField::name() const { return fmt::format("beta_{}", k_); }

Vec3 BetaField::operator()(double, const Vec3& x) const {
    const double s = pow2(-k_), p = 4.0 * s;
    return beta_unit(x[0] / s, wrap(x[1], p) / s, wrap(x[2], p) / s, black_);
}

std::optional<LocalMotion> BetaField::motion(double, const Vec3& x, int dir) const {
    return pattern_motion(k_, black_, x, dir, false);
}

bool BetaField::lateral_rects(double, double r, double y1a, double y1b, double y2a, double y2b,
                              RectVisitor& v) const {
    beta_rects(k_, r / pow2(-k_), black_, y1a, y1b, y2a, y2b, v);
    return true;
}

std::vector<double> BetaField::r_breakpoints(double, double r0, double r1) const {
    std::vector<double> out;
    for (double b : breakpoints)
        if (b > r0 && b < r1) out.push_back(b);
    return out;
}

TildeBetaField::TildeBetaField(int k, double black) : k_(k), black_(black) {
    const double s = pow2(-k), w = s / 4.0;
    linf_bound = std::max({std::sqrt(5.0), std::fabs(black) * std::sqrt(2.0), std::sqrt(2.0)});
    finest_scale = w;
    evolution = Evolution::RSchedule;
    breakpoints = {0.0, w, 3 * w, s, 2 * s, 3 * s, 4 * s};
}

std::string TildeBetaField::name() const { return fmt::format("tilde_beta_{}", k_); }

Vec3 TildeBetaField::operator()(double, const Vec3& x) const {
    const double s = pow2(-k_), p = 4.0 * s;
    double P = x[0] / s, Y1 = wrap(x[1], p) / s, Y2 = wrap(x[2], p) / s;
    if (P >= 0.0 && P < 1.0) {
        int q1 = static_cast<int>(Y1), q2 = static_cast<int>(Y2);
        if (q1 % 2 == 0 && q2 % 2 == 0) {
            auto a = alpha_value(k_, x[0], (Y1 - q1) * s, (Y2 - q2) * s);
            return {1.0, a[0], a[1]};
        }
    }
    return beta_unit(P, Y1, Y2, black_);
}

std::optional<LocalMotion> TildeBetaField::motion(double, const Vec3& x, int dir) const {
    return pattern_motion(k_, black_, x, dir, true);
}

// ============================================================================
// Periodic extension
// ============================================================================

PeriodicField::PeriodicField(FieldPtr inner, double period) : inner_(std::move(inner)), period_(period) {
    linf_bound = inner_->linf_bound;
    div_linf_bound = inner_->div_linf_bound;
    finest_scale = inner_->finest_scale;
    is_measure_divergence = inner_->is_measure_divergence;
    evolution = inner_->evolution;
    breakpoints = inner_->breakpoints;
}

Vec3 PeriodicField::operator()(double t, const Vec3& x) const {
    return (*inner_)(t, {x[0], wrap(x[1], period_), wrap(x[2], period_)});
}

std::optional<LocalMotion> PeriodicField::motion(double t, const Vec3& x, int dir) const {
    Vec3 xw{x[0], wrap(x[1], period_), wrap(x[2], period_)};
    auto m = inner_->motion(t, xw, dir);
    if (m && m->rotating) {
        m->c1 += x[1] - xw[1];
        m->c2 += x[2] - xw[2];
    }
    return m;
}

FieldPtr periodic_extend(FieldPtr field, double period, double L) {
    double q = L / period;
    if (!(period > 0) || q < 1.0 || q != std::floor(q) || std::exp2(std::round(std::log2(q))) != q)
        throw ConfigError(fmt::format("period {} does not divide the lateral period {} dyadically", period, L));
    return std::make_shared<PeriodicField>(std::move(field), period);
}

// ============================================================================
// Assembled fields
// ============================================================================

AssembledField::AssembledField(ConstructionVariant v) : v_(v) {
    v_.validate();
    linf_bound = std::max({std::sqrt(5.0), std::fabs(v_.black()) * std::sqrt(2.0), std::sqrt(2.0)});
    finest_scale = pow2(-2 - v_.k_max);
    evolution = Evolution::TimeContinuous;
    breakpoints.push_back(0.0);
    for (const auto& I : dyadic_schedule(v_.k_max))
        for (int j = 0; j < 4; ++j) breakpoints.push_back(I.lo + j * pow2(-I.k));
    breakpoints.push_back(1.0);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
}

std::string AssembledField::name() const { return "assembled_" + to_string(v_.tag); }

Vec3 AssembledField::operator()(double t, const Vec3& x) const {
    const double r = x[0];
    if (r < 0.0 || r > 1.0) return {0, 0, 0};
    const bool minus = r <= t;
    auto loc = locate(minus ? r : t, v_.k_max);
    const double s = pow2(-loc.k), p = 4.0 * s;
    const double Y1 = wrap(x[1], p) / s, Y2 = wrap(x[2], p) / s;
    if (v_.tag == Variant::Inward) {
        if (!minus || loc.frozen || loc.P >= 1.0) return {1, 0, 0};
        auto c = alpha_value(loc.k, loc.P * s, wrap(x[1], s), wrap(x[2], s));
        return {1.0, c[0], c[1]};
    }
    if (minus && v_.corollary() && !loc.frozen && loc.P < 1.0) {
        int q1 = static_cast<int>(Y1), q2 = static_cast<int>(Y2);
        if (q1 % 2 == 0 && q2 % 2 == 0) {
            auto a = alpha_value(loc.k, loc.P * s, (Y1 - q1) * s, (Y2 - q2) * s);
            return {1.0, a[0], a[1]};
        }
    }
    Vec3 b = beta_unit(loc.P, Y1, Y2, v_.black());
    if (!minus) b[1] = b[2] = 0.0;
    return b;
}

namespace {
struct RadialOnly : RectVisitor {
    RectVisitor& inner;
    explicit RadialOnly(RectVisitor& v) : inner(v) {}
    void rect(double a1, double b1, double a2, double b2, const Vec3& v) override {
        inner.rect(a1, b1, a2, b2, {v[0], 0.0, 0.0});
    }
};

std::vector<double> schedule_points(int k_max, bool stages) {
    std::vector<double> out{pow2(2 - k_max)};
    for (int k = 3; k <= k_max; ++k) {
        double a = pow2(2 - k), s = pow2(-k), w = s / 4.0;
        for (int j = 0; j <= 4; ++j) out.push_back(a + j * s);
        if (stages)
            for (double f : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5}) out.push_back(a + f * w);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> filter_open(const std::vector<double>& pts, double r0, double r1) {
    std::vector<double> out;
    for (double b : pts)
        if (b > r0 && b < r1) out.push_back(b);
    return out;
}
}  // namespace

bool AssembledField::lateral_rects(double t, double r, double y1a, double y1b, double y2a, double y2b,
                                   RectVisitor& v) const {
    if (v_.tag != Variant::Outward && v_.tag != Variant::TangentOutward) return false;
    if (r < 0.0 || r > 1.0) return true;
    const bool minus = r <= t;
    auto loc = locate(minus ? r : t, v_.k_max);
    if (minus) {
        beta_rects(loc.k, loc.P, v_.black(), y1a, y1b, y2a, y2b, v);
    } else {
        RadialOnly ro(v);
        beta_rects(loc.k, loc.P, v_.black(), y1a, y1b, y2a, y2b, ro);
    }
    return true;
}

bool AssembledField::normal_rects(double t, double r, double y1a, double y1b, double y2a, double y2b,
                                  RectVisitor& v) const {
    if (r < 0.0 || r > 1.0) return true;
    if (v_.tag == Variant::Inward) {
        v.rect(y1a, y1b, y2a, y2b, {1.0, 0.0, 0.0});
        return true;
    }
    // the rotation blocks of the corollary variant keep b_r = 1 on the dashed squares
    auto loc = locate(r <= t ? r : t, v_.k_max);
    RadialOnly ro(v);
    beta_rects(loc.k, loc.P, v_.black(), y1a, y1b, y2a, y2b, ro);
    return true;
}

std::vector<double> AssembledField::r_breakpoints(double t, double r0, double r1) const {
    auto pts = schedule_points(v_.k_max, v_.tag == Variant::Inward || v_.corollary());
    pts.push_back(t);
    pts.push_back(0.0);
    pts.push_back(1.0);
    std::sort(pts.begin(), pts.end());
    return filter_open(pts, r0, r1);
}

FieldPtr assemble_field(const ConstructionVariant& v) { return std::make_shared<AssembledField>(v); }

SmoothShearField::SmoothShearField(double amplitude, double omega) : a_(amplitude), w_(omega) {
    linf_bound = std::sqrt(1.0 + a_ * a_);
    finest_scale = 2.0 * M_PI / w_;
}

Vec3 SmoothShearField::operator()(double, const Vec3& x) const {
    return {1.0, a_ * std::sin(w_ * x[0]), a_ * std::cos(w_ * x[0])};
}

std::array<double, 2> SmoothShearField::lateral_shift(double r) const {
    return {a_ * (1.0 - std::cos(w_ * r)) / w_, a_ * std::sin(w_ * r) / w_};
}

// ============================================================================
// Data
// ============================================================================

int datum_sign(int k) { return k % 2 == 0 ? 1 : -1; }

ChessboardState chessboard_datum(int k) {
    ChessboardState c;
    c.k = k;
    c.n = 4;
    c.v.resize(16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) c.at(i, j) = datum_sign(k) * ((i + j) % 2 == 0 ? 1 : -1);
    return c;
}

namespace {

// Stage-start states of the evolution of +C (k even), cached.
const std::vector<ChessboardState>& base_states() {
    static const std::vector<ChessboardState> states = evolve_chessboard(4);
    return states;
}

int cell_of(double y, double w) { return std::clamp(static_cast<int>(std::floor(y / w)), 0, 3); }

}  // namespace

double z_value(int k, double rho, double y1, double y2) {
    const double s = pow2(-k), w = s / 4.0;
    const auto& S = base_states();
    const int sign = datum_sign(k);
    if (rho < 0.0) return sign * S[0].at(cell_of(y1, w), cell_of(y2, w));
    AlphaStage st = alpha_stage(k, rho);
    if (st.stage < 0) return sign * S[3].at(cell_of(y1, w), cell_of(y2, w));
    const auto& S0 = S[static_cast<std::size_t>(st.stage)];
    int b = active_block(k, st.stage, y1, y2);
    if (b >= 0) {
        auto c = alpha_centres(k, st.stage)[static_cast<std::size_t>(b)];
        auto d0 = square_rotate({y1 - c[0], y2 - c[1]}, -st.dtheta);
        y1 = c[0] + d0[0];
        y2 = c[1] + d0[1];
    }
    return sign * S0.at(cell_of(y1, w), cell_of(y2, w));
}

// ============================================================================
// Solutions
// ============================================================================

namespace {

struct UnitValue : RectVisitor {
    PieceVisitor& out;
    explicit UnitValue(PieceVisitor& v) : out(v) {}
    void rect(double a1, double b1, double a2, double b2, const Vec3& B) override { out.rect(a1, b1, a2, b2, 1.0, B); }
};

// Pieces of the z-pattern on a copy of Q_k at origin (o1, o2): state `fixed`
// (>= 0) is laid out statically; otherwise the α_k rotation at ρ is used.
void tile_pieces(int k, double rho, int fixed, int sign, double o1, double o2, double y1a, double y1b, double y2a,
                 double y2b, PieceVisitor& v) {
    const double w = pow2(-2 - k);
    const auto& S = base_states();
    int stage = -1;
    double dtheta = 0.0;
    std::vector<std::array<double, 2>> centres;
    if (fixed < 0) {
        AlphaStage st = alpha_stage(k, rho);
        if (st.stage < 0) {
            fixed = rho < 0.0 ? 0 : 3;
        } else {
            stage = st.stage;
            dtheta = st.dtheta;
            centres = alpha_centres(k, stage);
        }
    }
    const ChessboardState& state = S[static_cast<std::size_t>(fixed >= 0 ? fixed : stage)];
    bool covered[4][4] = {};
    for (const auto& c : centres) {
        int ci = static_cast<int>(std::lround(c[0] / w)), cj = static_cast<int>(std::lround(c[1] / w));
        for (int a = ci - 1; a <= ci; ++a)
            for (int b = cj - 1; b <= cj; ++b) covered[a][b] = true;
    }
    for (int i1 = 0; i1 < 4; ++i1)
        for (int i2 = 0; i2 < 4; ++i2) {
            if (covered[i1][i2]) continue;
            int U = sign * state.at(i1, i2);
            if (U == 0) continue;
            double a1 = o1 + i1 * w, b1 = a1 + w, a2 = o2 + i2 * w, b2 = a2 + w;
            if (clip(a1, b1, y1a, y1b) && clip(a2, b2, y2a, y2b)) v.rect(a1, b1, a2, b2, U, {1, 0, 0});
        }
    for (const auto& c : centres) {
        double c1 = o1 + c[0], c2 = o2 + c[1];
        if (c1 + w <= y1a || c1 - w >= y1b || c2 + w <= y2a || c2 - w >= y2b) continue;
        int ci = static_cast<int>(std::lround(c[0] / w)), cj = static_cast<int>(std::lround(c[1] / w));
        // quadrants in perimeter parameter at stage start: BR [1,3), BL [3,5), TL [5,7), TR [7,9)
        const std::array<std::array<int, 2>, 4> cells{{{ci, cj - 1}, {ci - 1, cj - 1}, {ci - 1, cj}, {ci, cj}}};
        for (int q = 0; q < 4; ++q) {
            int U = sign * state.at(cells[q][0], cells[q][1]);
            if (U == 0) continue;
            double lo = wrap(1.0 + 2.0 * q + dtheta, 8.0), hi = lo + 2.0;
            for (double x = lo; x < hi;) {
                double seg = std::floor(x / 2.0);
                double nxt = std::min(hi, 2.0 * (seg + 1.0));
                FanPiece f;
                f.c1 = c1;
                f.c2 = c2;
                f.half = w;
                f.side = static_cast<int>(seg) % 4;
                f.ua = x - 2.0 * seg;
                f.ub = nxt - 2.0 * seg;
                if (f.ub > f.ua) v.fan(f, U, 1.0, 1.0 / w);
                x = nxt;
            }
        }
    }
}

// Dashed unit squares (even, even) of step 0 with origins in the window.
template <class F>
void for_dashed_squares(double s, double y1a, double y1b, double y2a, double y2b, F&& f) {
    auto [n1a, n1b] = tile_range(y1a, y1b, 2.0 * s);
    auto [n2a, n2b] = tile_range(y2a, y2b, 2.0 * s);
    for (long n1 = n1a; n1 < n1b; ++n1)
        for (long n2 = n2a; n2 < n2b; ++n2) {
            double o1 = n1 * 2.0 * s, o2 = n2 * 2.0 * s;
            if (o1 + s <= y1a || o2 + s <= y2a) continue;
            f(o1, o2);
        }
}

// u_k on β̃_k at unit coordinates (Y in [0,4)^2).
double tilde_unit(int k, double black, double P, double Y1, double Y2) {
    const double s = pow2(-k);
    if (P < 0.0 || P >= 4.0) return 0.0;
    if (P < 1.0) {
        int q1 = static_cast<int>(Y1), q2 = static_cast<int>(Y2);
        if (q1 % 2 != 0 || q2 % 2 != 0) return 0.0;
        return z_value(k, P * s, (Y1 - q1) * s, (Y2 - q2) * s);
    }
    (void)black;
    int step = beta_step_index(P);
    double dP = P - step;
    for (; step >= 1; --step) {
        int b = beta_find(step, dP, Y1, Y2);
        if (b < 0) return 0.0;
        const auto& br = beta_steps()[static_cast<std::size_t>(step)].branches[static_cast<std::size_t>(b)];
        if (!br.dashed) return 0.0;
        Y1 -= br.m1 * dP;
        Y2 -= br.m2 * dP;
        dP = 1.0;
    }
    double q1 = std::floor(Y1), q2 = std::floor(Y2);
    return z_value(k, s, (Y1 - q1) * s, (Y2 - q2) * s);
}

class OutwardSolution : public ScalarSolution {
public:
    explicit OutwardSolution(ConstructionVariant v) : v_(v) {
        linf_bound = 1.0;
        boundary_flux_limit = -0.25;
    }
    double operator()(double t, const Vec3& x) const override {
        const double r = x[0];
        if (r <= 0.0 || r > t || r >= 1.0) return 0.0;
        auto loc = locate(r, v_.k_max);
        const double s = pow2(-loc.k), p = 4.0 * s;
        int step = beta_step_index(loc.P);
        int b = beta_find(step, loc.P - step, wrap(x[1], p) / s, wrap(x[2], p) / s);
        return b >= 0 && beta_steps()[static_cast<std::size_t>(step)].branches[static_cast<std::size_t>(b)].dashed
                   ? 1.0
                   : 0.0;
    }
    std::string name() const override { return "outward_" + to_string(v_.tag); }
    bool stationary_below_surface() const override { return true; }
    bool pieces(double r, double y1a, double y1b, double y2a, double y2b, PieceVisitor& v) const override {
        if (r <= 0.0 || r >= 1.0) return true;
        auto loc = locate(r, v_.k_max);
        UnitValue uv(v);
        beta_rects(loc.k, loc.P, v_.black(), y1a, y1b, y2a, y2b, uv, true);
        return true;
    }
    std::vector<double> r_breakpoints(double r0, double r1) const override {
        return filter_open(schedule_points(v_.k_max, false), r0, r1);
    }

private:
    ConstructionVariant v_;
};

class CorollarySolution : public ScalarSolution {
public:
    explicit CorollarySolution(ConstructionVariant v) : v_(v) {
        linf_bound = 1.0;
        boundary_flux_limit = 0.0;
    }
    double operator()(double t, const Vec3& x) const override {
        const double r = x[0];
        if (r <= 0.0 || r > t || r >= 1.0) return 0.0;
        auto loc = locate(r, v_.k_max);
        const double s = pow2(-loc.k), p = 4.0 * s;
        const double Y1 = wrap(x[1], p) / s, Y2 = wrap(x[2], p) / s;
        if (loc.frozen) {
            int q1 = static_cast<int>(Y1), q2 = static_cast<int>(Y2);
            if (q1 % 2 != 0 || q2 % 2 != 0) return 0.0;
            return z_value(loc.k, -1.0, (Y1 - q1) * s, (Y2 - q2) * s);
        }
        return tilde_unit(loc.k, v_.black(), loc.P, Y1, Y2);
    }
    std::string name() const override { return "corollary_" + to_string(v_.tag); }
    bool stationary_below_surface() const override { return true; }
    bool pieces(double r, double y1a, double y1b, double y2a, double y2b, PieceVisitor& v) const override {
        if (r <= 0.0 || r >= 1.0) return true;
        auto loc = locate(r, v_.k_max);
        const int k = loc.k;
        const double s = pow2(-k);
        if (loc.frozen || loc.P < 1.0) {
            for_dashed_squares(s, y1a, y1b, y2a, y2b, [&](double o1, double o2) {
                tile_pieces(k, loc.P * s, loc.frozen ? 0 : -1, datum_sign(k), o1, o2, y1a, y1b, y2a, y2b, v);
            });
            return true;
        }
        const double p = 4.0 * s;
        int step = beta_step_index(loc.P);
        double dP = loc.P - step;
        auto [n1a, n1b] = tile_range(y1a, y1b, p);
        auto [n2a, n2b] = tile_range(y2a, y2b, p);
        for (long n1 = n1a; n1 < n1b; ++n1)
            for (long n2 = n2a; n2 < n2b; ++n2)
                for (const auto& br : beta_steps()[static_cast<std::size_t>(step)].branches) {
                    if (!br.dashed) continue;
                    Vec3 B = branch_value(br, v_.black());
                    double A1 = br.a1 + br.m1 * dP, A2 = br.a2 + br.m2 * dP;
                    int h1 = static_cast<int>(std::lround(2.0 * (br.b1 - br.a1)));
                    int h2 = static_cast<int>(std::lround(2.0 * (br.b2 - br.a2)));
                    for (int i = 0; i < h1; ++i)
                        for (int j = 0; j < h2; ++j) {
                            double u1 = A1 + 0.5 * i, u2 = A2 + 0.5 * j;
                            double U = tilde_unit(k, v_.black(), loc.P, u1 + 0.25, u2 + 0.25);
                            if (U == 0.0) continue;
                            double a1 = n1 * p + u1 * s, b1 = a1 + 0.5 * s, a2 = n2 * p + u2 * s, b2 = a2 + 0.5 * s;
                            if (clip(a1, b1, y1a, y1b) && clip(a2, b2, y2a, y2b)) v.rect(a1, b1, a2, b2, U, B);
                        }
                }
        return true;
    }
    std::vector<double> r_breakpoints(double r0, double r1) const override {
        return filter_open(schedule_points(v_.k_max, true), r0, r1);
    }

private:
    ConstructionVariant v_;
};

class InwardSolution : public ScalarSolution {
public:
    explicit InwardSolution(ConstructionVariant v) : v_(v) {
        linf_bound = 1.0;
        boundary_flux_limit = 0.0;
    }
    double operator()(double t, const Vec3& x) const override {
        const double r = x[0];
        if (r <= 0.0 || r > t || r >= 1.0) return 0.0;
        auto loc = locate(r, v_.k_max);
        const double s = pow2(-loc.k);
        return z_value(loc.k, loc.frozen ? -1.0 : loc.P * s, wrap(x[1], s), wrap(x[2], s));
    }
    std::string name() const override { return "mixing_inward"; }
    bool stationary_below_surface() const override { return true; }
    bool pieces(double r, double y1a, double y1b, double y2a, double y2b, PieceVisitor& v) const override {
        if (r <= 0.0 || r >= 1.0) return true;
        auto loc = locate(r, v_.k_max);
        const double s = pow2(-loc.k);
        auto [n1a, n1b] = tile_range(y1a, y1b, s);
        auto [n2a, n2b] = tile_range(y2a, y2b, s);
        for (long n1 = n1a; n1 < n1b; ++n1)
            for (long n2 = n2a; n2 < n2b; ++n2)
                tile_pieces(loc.k, loc.P * s, loc.frozen ? 0 : (loc.P >= 1.0 ? 3 : -1), datum_sign(loc.k), n1 * s,
                            n2 * s, y1a, y1b, y2a, y2b, v);
        return true;
    }
    std::vector<double> r_breakpoints(double r0, double r1) const override {
        return filter_open(schedule_points(v_.k_max, true), r0, r1);
    }

private:
    ConstructionVariant v_;
};

}  // namespace

SolutionPtr exact_solution(const ConstructionVariant& v) {
    v.validate();
    switch (v.tag) {
        case Variant::Inward: return std::make_shared<InwardSolution>(v);
        case Variant::Outward:
        case Variant::TangentOutward: return std::make_shared<OutwardSolution>(v);
        default: return std::make_shared<CorollarySolution>(v);
    }
}

SolutionPtr beta_dashed_solution(int k, double black) {
    (void)black;
    return std::make_shared<FunctionSolution>(
        fmt::format("beta_{}_dashed", k),
        [k](double, const Vec3& x) {
            const double s = pow2(-k), p = 4.0 * s, P = x[0] / s;
            if (P < 0.0 || P >= 4.0) return 0.0;
            int step = beta_step_index(P);
            int b = beta_find(step, P - step, wrap(x[1], p) / s, wrap(x[2], p) / s);
            return b >= 0 && beta_steps()[static_cast<std::size_t>(step)].branches[static_cast<std::size_t>(b)].dashed
                       ? 1.0
                       : 0.0;
        },
        1.0);
}

SolutionPtr tilde_beta_solution(int k, double black) {
    return std::make_shared<FunctionSolution>(
        fmt::format("tilde_beta_{}_u", k),
        [k, black](double, const Vec3& x) {
            const double s = pow2(-k), p = 4.0 * s;
            return tilde_unit(k, black, x[0] / s, wrap(x[1], p) / s, wrap(x[2], p) / s);
        },
        1.0);
}

// ============================================================================
// Total variation
// ============================================================================

namespace {

Vec3 step_value(int step, double dP, double Y1, double Y2, double black) {
    int b = beta_find(step, dP, wrap(Y1, 4.0), wrap(Y2, 4.0));
    if (b < 0) return {0, 0, 0};
    return branch_value(beta_steps()[static_cast<std::size_t>(step)].branches[static_cast<std::size_t>(b)], black);
}

// ∫_0^4 (sum of |jump| * area factor along lines in direction ax) d(other), unit cell.
double lines_tv(int step, double dP, double black, int ax) {
    const auto& st = beta_steps()[static_cast<std::size_t>(step)];
    std::vector<double> cuts{0.0, 4.0};
    for (const auto& br : st.branches) {
        double lo = ax == 0 ? br.a2 + br.m2 * dP : br.a1 + br.m1 * dP;
        double hi = ax == 0 ? br.b2 + br.m2 * dP : br.b1 + br.m1 * dP;
        cuts.push_back(std::clamp(lo, 0.0, 4.0));
        cuts.push_back(std::clamp(hi, 0.0, 4.0));
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double len = cuts[c + 1] - cuts[c];
        if (len <= 0.0) continue;
        double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        std::vector<std::pair<double, double>> pos;  // (position mod 4, area factor)
        for (const auto& br : st.branches) {
            double olo = ax == 0 ? br.a2 + br.m2 * dP : br.a1 + br.m1 * dP;
            double ohi = ax == 0 ? br.b2 + br.m2 * dP : br.b1 + br.m1 * dP;
            if (mid < olo || mid >= ohi) continue;
            double m = ax == 0 ? br.m1 : br.m2;
            double fac = std::sqrt(1.0 + m * m);
            double lo = ax == 0 ? br.a1 + br.m1 * dP : br.a2 + br.m2 * dP;
            double hi = ax == 0 ? br.b1 + br.m1 * dP : br.b2 + br.m2 * dP;
            pos.push_back({wrap(lo, 4.0), fac});
            pos.push_back({wrap(hi, 4.0), fac});
        }
        if (pos.empty()) continue;
        std::sort(pos.begin(), pos.end());
        std::vector<std::pair<double, double>> uniq;
        for (const auto& q : pos)
            if (uniq.empty() || q.first - uniq.back().first > 1e-12) uniq.push_back(q);
            else uniq.back().second = std::max(uniq.back().second, q.second);
        const std::size_t n = uniq.size();
        double line = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double prev = i == 0 ? uniq[n - 1].first - 4.0 : uniq[i - 1].first;
            double next = i + 1 == n ? uniq[0].first + 4.0 : uniq[i + 1].first;
            double x = uniq[i].first;
            double xl = 0.5 * (prev + x), xr = 0.5 * (x + next);
            if (n == 1) xl = x - 1e-3, xr = x + 1e-3;
            Vec3 vl = ax == 0 ? step_value(step, dP, xl, mid, black) : step_value(step, dP, mid, xl, black);
            Vec3 vr = ax == 0 ? step_value(step, dP, xr, mid, black) : step_value(step, dP, mid, xr, black);
            line += norm(vr - vl) * uniq[i].second;
        }
        total += line * len;
    }
    return total;
}

// ∫_{[0,4)^2} |β(P_b+) - β(P_b-)| at the step boundary P_b = step (1..3).
double plane_jump(int step, double black) {
    std::vector<double> c1{0, 4}, c2{0, 4};
    auto add = [&](int st, double dP) {
        for (const auto& br : beta_steps()[static_cast<std::size_t>(st)].branches) {
            c1.push_back(std::clamp(br.a1 + br.m1 * dP, 0.0, 4.0));
            c1.push_back(std::clamp(br.b1 + br.m1 * dP, 0.0, 4.0));
            c2.push_back(std::clamp(br.a2 + br.m2 * dP, 0.0, 4.0));
            c2.push_back(std::clamp(br.b2 + br.m2 * dP, 0.0, 4.0));
        }
    };
    add(step, 0.0);
    add(step - 1, 1.0);
    std::sort(c1.begin(), c1.end());
    std::sort(c2.begin(), c2.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < c1.size(); ++i)
        for (std::size_t j = 0; j + 1 < c2.size(); ++j) {
            double a = (c1[i + 1] - c1[i]) * (c2[j + 1] - c2[j]);
            if (a <= 0.0) continue;
            double m1 = 0.5 * (c1[i] + c1[i + 1]), m2 = 0.5 * (c2[j] + c2[j + 1]);
            total += a * norm(step_value(step, 0.0, m1, m2, black) - step_value(step - 1, 1.0, m1, m2, black));
        }
    return total;
}

}  // namespace

double beta_slab_total_variation(int k, double black, double r0, double r1) {
    const double s = pow2(-k);
    double P0 = std::clamp(r0 / s, 0.0, 4.0), P1 = std::clamp(r1 / s, 0.0, 4.0);
    if (P1 <= P0) return 0.0;
    const auto& g = gauss_legendre(4);
    double total = 0.0;
    for (int step = 0; step < 4; ++step) {
        double a = std::max(P0, double(step)), b = std::min(P1, step + 1.0);
        if (b > a) {
            const int panels = 16;
            double hpan = (b - a) / panels;
            for (int q = 0; q < panels; ++q) {
                double lo = a + q * hpan;
                for (std::size_t i = 0; i < g.x.size(); ++i) {
                    double dP = lo + 0.5 * hpan * (1.0 + g.x[i]) - step;
                    total += 0.5 * hpan * g.w[i] * (lines_tv(step, dP, black, 0) + lines_tv(step, dP, black, 1));
                }
            }
        }
        if (step >= 1 && step > P0 && step < P1) total += plane_jump(step, black);
    }
    return total / 16.0;
}

double boundary_trace_limit(Variant v) {
    switch (v) {
        case Variant::Inward: return -1.0;
        case Variant::TangentOutward:
        case Variant::TangentCorollary: return 0.0;
        default: return 1.0;
    }
}

}  // namespace bvt
