#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hamiltonia::acceptance {

enum class Level { fast, full };

struct CriterionResult {
    int id;
    std::string name;
    bool pass;
    std::string detail;
    double seconds;
};

struct Report {
    Level level;
    std::vector<CriterionResult> results;

    bool all_pass() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return true;
    }
};

/// Runs the verification battery; when `live` is set, prints one pass/fail
/// line per criterion as it completes. The fast level trims sample counts and
/// enumeration depths to stay within a minute; the full level runs everything
/// at the stated tolerances.
Report run(Level level, std::ostream* live = nullptr);

}  // namespace hamiltonia::acceptance
