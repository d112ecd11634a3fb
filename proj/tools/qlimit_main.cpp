// qlimit: scenario runner for driven nonlinear-cavity master equations.
//
//   qlimit <subcommand> --config <path> [--out <dir>] [--svg]
//   qlimit selftest
//
// Exit codes: 0 success, 1 invariant violation, 2 config error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qlimit/errors.hpp"
#include "qlimit/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvariant = 1;
constexpr int kConfig = 2;
constexpr int kNumerical = 3;

int run_scenario(const std::string& subcommand, const std::string& config_path,
                 const std::string& out_dir, bool svg)
{
    try {
        const qlimit::ScenarioConfig cfg = qlimit::parse_config_file(config_path);
        const qlimit::RunManifest manifest =
            qlimit::run(cfg, qlimit::parse_action(subcommand), {out_dir, svg});
        if (!manifest.within_bounds) {
            const auto& inv = manifest.invariants;
            std::cerr << "invariant bounds exceeded: trace drift/time " << inv.trace_drift_per_time
                      << ", min eigenvalue " << inv.min_eigenvalue << ", truncation "
                      << inv.truncation << '\n';
            return kInvariant;
        }
        return kOk;
    } catch (const qlimit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const qlimit::InvalidArgument& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
        return kConfig;
    } catch (const qlimit::DimensionMismatch& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
        return kConfig;
    } catch (const qlimit::InvariantViolation& e) {
        std::cerr << "invariant violation: " << config_path << ": " << e.what() << '\n';
        return kInvariant;
    } catch (const qlimit::NumericalError& e) {
        std::cerr << "numerical failure: " << config_path << ": " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << '\n';
        return kNumerical;
    }
}

int run_selftest()
{
    int failures = 0;
    try {
        for (const auto& c : qlimit::selftest()) {
            std::printf("[%s] %s (%.3g <= %.3g)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                        c.value, c.bound);
            failures += c.passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "selftest aborted: " << e.what() << '\n';
        return kNumerical;
    }
    std::printf("%d check(s) failed\n", failures);
    return failures == 0 ? kOk : kInvariant;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Driven nonlinear-cavity master-equation scenarios"};
    app.set_version_flag("--version", QLIMIT_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    bool svg = false;
    const char* scenario_commands[][2] = {
        {"simulate", "Integrate the configured model from the vacuum"},
        {"compare", "Overlay the pre-limit model and its two-level limit"},
        {"sweep", "Sweep a nonlinearity parameter against the limit model"},
        {"steady", "Dense steady state of the configured model"},
        {"wigner", "Wigner function of the evolved state"},
        {"nongauss", "Non-Gaussianity trace and Wigner function at its peak"},
    };
    for (const auto& [name, help] : scenario_commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_flag("--svg", svg, "Also write SVG plots");
    }
    app.add_subcommand("selftest", "Run the built-in invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const std::string subcommand = app.get_subcommands().front()->get_name();
    if (subcommand == "selftest") {
        return run_selftest();
    }
    return run_scenario(subcommand, config_path, out_dir, svg);
}
