// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Pass --quick to run only the property suite.

#include <cstdlib>
#include <iostream>
#include <string_view>
#include <thread>

#include "criteria.hpp"

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::string_view(argv[i]) == "--quick") quick = true;
    }
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DCL_JOBS")) jobs = std::max(1, std::atoi(env));
    const auto results = dcl::acceptance::run_all(quick, jobs);
    return dcl::acceptance::print_report(results, std::cout) ? 0 : 1;
}
