// Verification battery: one line per criterion, nonzero exit on any failure.
#include <cstring>
#include <iostream>

#include "hamiltonia/acceptance.hpp"

int main(int argc, char** argv) {
    auto level = hamiltonia::acceptance::Level::full;
    if (argc > 1 && std::strcmp(argv[1], "--fast") == 0) level = hamiltonia::acceptance::Level::fast;
    const auto report = hamiltonia::acceptance::run(level, &std::cout);
    int failed = 0;
    for (const auto& r : report.results)
        if (!r.pass) ++failed;
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
              << std::endl;
    return failed == 0 ? 0 : 1;
}
