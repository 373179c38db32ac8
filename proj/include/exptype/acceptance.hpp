#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace exptype {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;  // worst measured quantity against its bound
    double seconds = 0.0;
};

inline constexpr int acceptance_criteria_count = 14;

// Runs the listed criteria (all when `ids` is empty) with pinned tolerances.
std::vector<CriterionResult> run_acceptance(std::span<const int> ids, std::uint64_t seed = 1, int jobs = 1);

}  // namespace exptype
