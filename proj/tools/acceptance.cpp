/// @file acceptance.cpp
/// @brief Runs the eleven acceptance criteria with pinned configurations and
/// prints one PASS/FAIL line per criterion (details for each record below it).
///
/// Exit code 0 when every criterion passes, 1 otherwise.

#include <chrono>
#include <fmt/format.h>
#include <functional>

#include "bvt/harness.hpp"

using namespace bvt;

namespace {

struct Criterion {
    int id;
    std::string name;
    double budget_s;  ///< wall-clock budget; infinity when none is pinned
    RunConfig cfg;
    std::function<std::vector<CheckRecord>(const RunConfig&)> run;
};

RunConfig pinned(int k_max) {
    RunConfig c;
    c.k_max = k_max;
    c.level = 6;
    c.cfl = 0.4;
    c.tol = 1e-3;
    return c;
}

constexpr double kNoBudget = std::numeric_limits<double>::infinity();

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "divergence-free exactness", 10.0, pinned(6), check_divergence_exactness},
        {2, "boundary trace values", 30.0, pinned(8), check_boundary_traces},
        {3, "non-uniqueness witness (outward)", 60.0, pinned(8), check_outward_witness},
        {4, "non-uniqueness witness (inward)", kNoBudget, pinned(6), check_inward_witness},
        {5, "corollary traces", kNoBudget, pinned(8), check_corollary_traces},
        {6, "trace renormalization", kNoBudget, pinned(6), check_trace_renormalization},
        {7, "strong L1 trace convergence", kNoBudget, pinned(6), check_strong_traces},
        {8, "well-posedness regime", 120.0, pinned(6), check_wellposed_fv},
        {9, "Gronwall failure witness", kNoBudget, pinned(8), check_gronwall_witness},
        {10, "mixing", kNoBudget, pinned(6), check_mixing},
        {11, "flow-map oracle", kNoBudget, pinned(6), check_flow_map},
    };

    int failed = 0;
    std::vector<std::string> details;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<CheckRecord> recs;
        std::string error;
        try {
            recs = c.run(c.cfg);
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool ok = error.empty() && !recs.empty() && dt <= c.budget_s;
        for (const auto& r : recs) ok = ok && r.ok();
        failed += ok ? 0 : 1;
        std::string budget = std::isfinite(c.budget_s) ? fmt::format(" (budget {:.0f} s)", c.budget_s) : "";
        fmt::print("criterion {:>2} {}: {}  [{:.1f} s{}]\n", c.id, c.name, ok ? "PASS" : "FAIL", dt, budget);
        if (!error.empty()) fmt::print("    error: {}\n", error);
        for (const auto& r : recs)
            fmt::print("    {:<8} {:<32} measured {:<12.5g} bound {:<12.5g} {}\n", to_string(r.verdict), r.name,
                       r.measured, r.bound, r.detail);
        std::fflush(stdout);
    }
    fmt::print("acceptance: {} of {} criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
