// Acceptance suite: one PASS/FAIL line per criterion 1..8.
// Usage: acceptance [--seed S] [criterion ...]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "dimcons/acceptance.hpp"

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    dimcons::AcceptanceParams p;
    std::vector<int> picked;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--seed" && i + 1 < argc) {
            p.seed = std::strtoull(argv[++i], nullptr, 10);
        } else {
            picked.push_back(std::atoi(argv[i]));
        }
    }
    if (!picked.empty()) p.criteria = picked;

    std::size_t failed = 0;
    try {
        dimcons::run_acceptance(p, [&](const dimcons::CriterionResult& r) {
            if (!r.passed) ++failed;
            std::printf("%s criterion %d (%s) [%.1fs] %s\n", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(),
                        r.seconds, r.detail.c_str());
        });
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance: %s\n", e.what());
        return 2;
    }
    std::printf("%zu of %zu criteria passed\n", p.criteria.size() - failed, p.criteria.size());
    return failed == 0 ? 0 : 1;
}
