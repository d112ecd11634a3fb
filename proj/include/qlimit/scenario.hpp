#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qlimit/analysis.hpp"
#include "qlimit/master_equation.hpp"
#include "qlimit/slh.hpp"

namespace qlimit {

enum class ScenarioKind { Kerr, Chi2, Chi2Dispersive, Tpa, QubitLimit, Compare, Sweep, Wigner, NonGauss };
enum class Family { Kerr, Chi2, Chi2Dispersive, Tpa, QubitLimit };
enum class Action { Simulate, Compare, Sweep, Steady, Wigner, NonGauss };

[[nodiscard]] std::string_view to_string(ScenarioKind kind);
[[nodiscard]] std::string_view to_string(Family family);
[[nodiscard]] std::string_view to_string(Action action);
[[nodiscard]] Action parse_action(std::string_view name);

// Model parameters by config key; absent entries are nullopt.
struct ModelParams {
    std::optional<double> delta;
    std::optional<double> chi;
    std::optional<double> g;
    std::optional<double> kappa_a1;
    std::optional<double> kappa_a2;
    std::optional<double> kappa_b;
    std::optional<double> gamma;
    std::optional<double> delta_b;
    std::optional<complex> alpha;

    [[nodiscard]] std::optional<double>* find(std::string_view name);
};

struct Bounds {
    double trace_drift_per_time = 1e-8;
    double truncation = 1e-6;
    double min_eigenvalue = -1e-7;
    std::size_t truncation_top_k = 1;
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
    bool steady = false;
};

struct WignerSpec {
    WignerGridSpec grid;
    std::optional<double> time; // nullopt: at the delta_B peak
};

struct ScenarioConfig {
    std::string name = "scenario";
    ScenarioKind kind = ScenarioKind::Kerr;
    Family family = Family::Kerr;
    ModelParams params;
    std::vector<Index> dims; // empty: family default
    IntegratorConfig integrator;
    std::string observable = "pop1";
    std::optional<SweepSpec> sweep;
    WignerSpec wigner;
    Bounds bounds;
    std::vector<std::string> plot;
    nlohmann::json echo; // normalized document with defaults applied
};

// Strict JSON parsing; throws ConfigError with a path-qualified message.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text);
[[nodiscard]] ScenarioConfig parse_config_file(const std::filesystem::path& path);

[[nodiscard]] Action default_action(ScenarioKind kind);

// Truncation used when the config gives no dims.
[[nodiscard]] std::vector<Index> default_dims(Family family, const ModelParams& params);
[[nodiscard]] SLHModel build_model(Family family, const ModelParams& params,
                                   const std::vector<Index>& dims);
// Two-level limit sharing the drive and decay parameters of `params`.
[[nodiscard]] SLHModel build_limit_model(const ModelParams& params);

struct InvariantSummary {
    double max_trace_error = 0.0;
    double trace_drift_per_time = 0.0;
    double min_eigenvalue = 1.0;
    double truncation = 0.0;

    void absorb(const Trajectory& traj, std::size_t top_k);
    [[nodiscard]] bool within(const Bounds& b) const;
};

struct OutputFile {
    std::string file;
    std::string sha256;
};

struct RunManifest {
    std::string tool_version;
    std::string action;
    nlohmann::json config;
    double wall_time_s = 0.0;
    InvariantSummary invariants;
    bool within_bounds = true;
    nlohmann::json results = nlohmann::json::object();
    std::vector<OutputFile> outputs;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool svg = false;
};

// Runs one scenario, writes its artifacts and manifest.json into out_dir.
RunManifest run(const ScenarioConfig& config, Action action, const RunOptions& options);
inline RunManifest run(const ScenarioConfig& config, const RunOptions& options)
{
    return run(config, default_action(config.kind), options);
}

// Fixed 17-significant-digit formatting used by every CSV writer.
[[nodiscard]] std::string format_double(double v);
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

struct SelftestCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double bound = 0.0;
};

// Fast invariant suite over small instances of every model family.
[[nodiscard]] std::vector<SelftestCheck> selftest();

} // namespace qlimit
