#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dimcons/dimcons.hpp"

namespace {

int run_command(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::size_t> trials,
                std::optional<std::string> out) {
    auto config = dimcons::load_config(path);
    if (seed) config.seed = *seed;
    if (trials) config.trials = *trials;
    if (out) config.out = *out;
    dimcons::validate(config);
    const auto [table, files] = dimcons::run_and_write(config);
    for (const auto& [key, value] : table.summary.items()) std::cout << key << " = " << value.dump() << "\n";
    for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote " << files.csv.string() << " and " << files.metadata.string() << "\n";
    return table.passed ? 0 : 1;
}

int self_test_command(const std::string& level, std::uint64_t seed) {
    dimcons::SelfTestReport report;
    if (level == "full") {
        report = dimcons::fast_self_test();
        report.level = "full";
        for (const auto& c : report.checks)
            std::printf("%s  %-60s %8.2fs  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.seconds, c.detail.c_str());
        dimcons::run_acceptance({seed, {1, 2, 3, 4, 5, 6, 7, 8}}, [&](const dimcons::CriterionResult& c) {
            std::printf("%s  criterion %d: %-47s %8.2fs  %s\n", c.passed ? "PASS" : "FAIL", c.id, c.title.c_str(),
                        c.seconds, c.detail.c_str());
            std::fflush(stdout);
            report.checks.push_back({"criterion " + std::to_string(c.id), c.passed, c.detail, c.seconds});
        });
    } else {
        report = dimcons::fast_self_test();
        for (const auto& c : report.checks)
            std::printf("%s  %-60s %8.2fs  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.seconds, c.detail.c_str());
    }
    std::printf("self-test %s: %s\n", level.c_str(), report.passed() ? "all passed" : "FAILED");
    return report.passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimension conservation estimators for random walks on products of free groups"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out;
    run->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--trials", trials, "Override the config trial count");
    run->add_option("--out", out, "Override the output directory");

    auto* self = app.add_subcommand("self-test", "Run the verification suites");
    std::string level = "fast";
    std::uint64_t self_seed = 1;
    self->add_option("--level", level, "fast: oracle and exhaustive checks; full: plus acceptance criteria")
        ->check(CLI::IsMember({"fast", "full"}));
    self->add_option("--seed", self_seed, "Seed for the statistical criteria");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return run_command(config_path, seed, trials, out);
        return self_test_command(level, self_seed);
    } catch (const dimcons::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
