#include <cstdio>

#include "ratedml/validation.hpp"

int main() {
    ratedml::ValidationOptions options;
    int failed = 0;
    for (int id = 1; id <= ratedml::kCriterionCount; ++id) {
        const auto r = ratedml::run_criterion(id, options);
        std::printf("%s\n", ratedml::format_validation_line(r).c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d of %d criteria passed\n", ratedml::kCriterionCount - failed, ratedml::kCriterionCount);
    return failed == 0 ? 0 : 1;
}
