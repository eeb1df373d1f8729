#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ddea::harness {

/// Oracle constants file missing, unreadable or out of date (exit code 4).
class OracleFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int oracle_format_version = 1;
inline constexpr double oracle_resolution = 1e-3;

/// Brute-force reference minimum of a 2-D benchmark over a box.
struct OracleEntry {
    std::string function;
    /// x_lo, x_hi, y_lo, y_hi
    std::array<double, 4> domain{};
    std::array<double, 2> minimizer{};
    double value = 0.0;
    double resolution = oracle_resolution;
};

/// Grid search at `resolution` over the closed box, then shrinking-grid
/// refinement around the best grid point.
OracleEntry compute_oracle(const std::string& function, const std::array<double, 4>& domain,
                           double resolution = oracle_resolution);

/// michalewicz_std on [0, pi]^2 and michalewicz_paper on [-4, 4]^2.
std::vector<OracleEntry> compute_default_oracles();

nlohmann::json oracle_to_json(const std::vector<OracleEntry>& entries);
std::vector<OracleEntry> oracle_from_json(const nlohmann::json& j);

void write_oracle_file(const std::filesystem::path& path, const std::vector<OracleEntry>& entries);

/// Throws OracleFileError when the file is missing, malformed, of another
/// format version, or lacks a default entry with the expected domain and
/// resolution.
std::vector<OracleEntry> load_oracle_file(const std::filesystem::path& path);

const OracleEntry& find_oracle(const std::vector<OracleEntry>& entries, const std::string& function);

std::filesystem::path default_oracle_path();

} // namespace ddea::harness
