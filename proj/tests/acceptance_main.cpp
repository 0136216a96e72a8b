#include <iostream>

#include "twosq/acceptance.hpp"

int main() {
    using namespace twosq::acceptance;
    SuiteOptions opt;
    int failed = 0;
    for (auto criterion : all_criteria()) {
        const auto r = criterion(opt);
        std::cout << format_line(r) << std::endl;
        failed += !r.pass;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
