// Acceptance gate: every criterion runs its verification suite, prints one
// PASS/FAIL line and enforces the suite's wall-clock budget. Exit 0 only when
// all eight hold.
#include <cstdio>
#include <string>
#include <vector>

#include "psbfem/verify.hpp"

namespace {

struct Criterion {
    int number;
    const char* suite;
    const char* statement;
    double budget_seconds;
};

const std::vector<Criterion> kCriteria = {
    {1, "patch", "linear patch field reproduced on the mixed polygon mesh", 5.0},
    {2, "element", "element invariants hold on random star-convex polygons", 30.0},
    {3, "convergence", "steady L2 error converges at second order", 60.0},
    {4, "fem-compare", "polygon solver matches the bilinear reference on rectangle meshes",
     30.0},
    {5, "inclusion", "impermeable inclusion flow matches the reference solver", 30.0},
    {6, "transient-oracle", "time marching tracks the dense high-order integrator", 30.0},
    {7, "transient-fem", "transient polygon run tracks the reference element run", 60.0},
    {8, "parser", "deck and native formats parse, reject and round-trip as documented", 5.0},
};

}  // namespace

int main() {
    int failures = 0;
    for (const auto& c : kCriteria) {
        psb::VerificationReport report;
        bool threw = false;
        std::string what;
        try {
            report = psb::run_suite(c.suite);
        } catch (const std::exception& e) {
            threw = true;
            what = e.what();
        }
        const bool in_budget = !threw && report.seconds <= c.budget_seconds;
        const bool pass = !threw && report.pass && in_budget;
        failures += pass ? 0 : 1;
        if (threw) {
            std::printf("FAIL criterion %d [%s]: %s -- threw: %s\n", c.number, c.suite,
                        c.statement, what.c_str());
            continue;
        }
        std::printf("%s criterion %d [%s]: %s (%.2f s of %.0f s budget)%s\n",
                    pass ? "PASS" : "FAIL", c.number, c.suite, c.statement, report.seconds,
                    c.budget_seconds, !in_budget ? " -- over budget" : "");
        if (!report.pass)
            for (const auto& chk : report.checks)
                if (!chk.pass)
                    std::printf("       failed check %s: %g vs limit %g\n", chk.name.c_str(),
                                chk.value, chk.limit);
    }
    if (failures == 0)
        std::printf("acceptance: all %zu criteria hold\n", kCriteria.size());
    else
        std::printf("acceptance: %d of %zu criteria FAILED\n", failures, kCriteria.size());
    return failures == 0 ? 0 : 1;
}
