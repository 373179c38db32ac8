#include <cstdio>
#include <cstdlib>

#include "exptype/acceptance.hpp"

int main(int argc, char** argv) {
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    int failed = 0;
    for (const auto& r : exptype::run_acceptance({}, seed)) {
        std::printf("[%s] %2d %-32s %s (%.2f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        failed += r.passed ? 0 : 1;
    }
    std::printf("%d of %d criteria passed\n", exptype::acceptance_criteria_count - failed,
                exptype::acceptance_criteria_count);
    return failed == 0 ? 0 : 1;
}
