#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace conelab {

struct CheckResult {
    std::string name;
    bool passed = false;
    /// Measured quantities; deterministic given the seed.
    nlohmann::json detail;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool passed() const;
    /// Name of the first failing check, empty when all pass.
    std::string first_failure() const;
};

/// spectrum, foliation, beta, curvature, excess.
const std::vector<std::string>& suite_names();

/// Names of the checks in a suite, in run order.
std::vector<std::string> check_names(const std::string& suite);

/// Runs one named check. Throws InvalidArgument for unknown names.
CheckResult run_check(const std::string& suite, const std::string& check, std::uint64_t seed);

/// Runs every check of a suite; "all" is not accepted here.
SuiteReport run_suite(const std::string& suite, std::uint64_t seed);

nlohmann::json to_json(const SuiteReport& report);

} // namespace conelab
