#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scenekit::selfcheck {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Embedded sanity checks: the specialization anchors and an in-process
// comparison of the within estimator against dummy-variable OLS.
std::vector<CheckResult> run_all();

// Prints one "PASS name" / "FAIL name (detail)" line per check; true when all
// passed.
bool report(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace scenekit::selfcheck
