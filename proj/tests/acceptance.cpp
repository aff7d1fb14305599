#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "conelab/verify.hpp"

using namespace conelab;

namespace {

struct Criterion {
    const char* title;
    double budget_s;
    std::vector<std::pair<const char*, const char*>> checks;
};

} // namespace

int main()
{
    const std::uint64_t seed = 7;
    const std::vector<Criterion> criteria{
        {"spectral exactness", 1.0, {{"spectrum", "c33_exponents"}}},
        {"stability classifier", 1.0, {{"spectrum", "stability_scan"}}},
        {"foliation consistency", 30.0,
         {{"foliation", "fit_exponent"}, {"foliation", "profile_residual"}, {"foliation", "density_ratio"}}},
        {"tail law of the first variation", 30.0, {{"foliation", "phi_tail"}}},
        {"beta-harmonic exactness", 10.0,
         {{"beta", "exact_kernel"}, {"beta", "mean_value"}, {"beta", "eigen_relation"}}},
        {"norm identity", 60.0, {{"beta", "norm_identity"}}},
        {"warped curvature", 30.0, {{"curvature", "warped_oracle"}, {"curvature", "constant_warp"}}},
        {"discrete three-annulus", 5.0, {{"excess", "three_annulus"}}},
        {"excess identities", 10.0, {{"excess", "excess_identity"}, {"excess", "triangle"}, {"excess", "scaling"}}},
        {"linear dichotomy", 60.0, {{"excess", "negativity"}, {"excess", "dichotomy"}}},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        bool ok = true;
        std::string why;
        for (const auto& [suite, check] : c.checks) {
            const CheckResult r = run_check(suite, check, seed);
            if (!r.passed) {
                ok = false;
                why += std::string(" ") + suite + "." + check + "=" + r.detail.dump();
            }
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > c.budget_s) {
            ok = false;
            why += " over time budget";
        }
        failed += !ok;
        std::printf("%s %zu %s (%.2f s of %.0f s)%s\n", ok ? "PASS" : "FAIL", i + 1, c.title, elapsed, c.budget_s,
                    why.c_str());
    }
    std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
