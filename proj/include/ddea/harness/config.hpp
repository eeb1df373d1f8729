#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <ddea/core.hpp>
#include <ddea/speciation.hpp>
#include <ddea/tracking.hpp>

namespace ddea::harness {

using json = nlohmann::json;

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name, const std::string& field = "algorithm");

struct ObjectiveConfig {
    std::string name = "michalewicz_std";
    std::size_t dimension = 2;
    /// One value (broadcast to every gene) or one per gene.
    std::vector<double> lower{-1.0};
    std::vector<double> upper{1.0};
    double noise_std = 0.0;

    bool operator==(const ObjectiveConfig&) const = default;
};

struct RunConfig {
    Algorithm algorithm = Algorithm::ddea;
    /// Row label in comparisons; defaults to the algorithm name.
    std::string label;
    ObjectiveConfig objective;
    ControlParams<double> control;
    /// Present iff algorithm is DDEA.
    std::optional<DivergenceParams<double>> ddea;
    std::uint64_t budget = 1500;
    std::uint64_t seed = 1;

    std::string display_label() const { return label.empty() ? algorithm_name(algorithm) : label; }
    bool operator==(const RunConfig&) const = default;
};

struct TrackingConfig {
    std::size_t length = 2000;
    std::uint64_t series_seed = 1;
    double mean_log = 1.0;
    double beta = 0.9;
    double noise_std = 0.1;
    /// Read the series from a two-column CSV instead of generating it.
    std::string series_csv;
    std::size_t window = 500;
    std::size_t horizon = 1;
    std::size_t model_order = 2;
    std::uint64_t per_step_budget = 1500;

    bool operator==(const TrackingConfig&) const = default;
};

struct TrackConfig {
    Algorithm algorithm = Algorithm::ddea;
    ControlParams<double> control;
    std::optional<DivergenceParams<double>> ddea;
    TrackingConfig tracking;
    std::uint64_t seed = 1;

    bool operator==(const TrackConfig&) const = default;
};

/// Strict parsing: unknown keys, wrong types and DDEA-only sections on a DEA
/// config all raise ConfigError naming the offending field path.
RunConfig parse_run_config(const json& j);
json to_json(const RunConfig& c);
TrackConfig parse_track_config(const json& j);
json to_json(const TrackConfig& c);

json read_json_file(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path);
TrackConfig load_track_config(const std::filesystem::path& path);

ObjectiveSpec<double> build_objective(const ObjectiveConfig& c);
TrackingProblem<double> build_tracking_problem(const TrackingConfig& c);
TrackingSetup<double> build_tracking_setup(const TrackConfig& c);

/// Human-readable description of every config key.
json config_schema();

} // namespace ddea::harness
