#include <ddea/harness/oracle.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include <ddea/benchmarks.hpp>
#include <ddea/core.hpp>

namespace ddea::harness {

namespace {
    std::function<double(double, double)> function_by_name(const std::string& name)
    {
        if (name == "michalewicz_std")
            return [](double x, double y) { return michalewicz_std(x, y); };
        if (name == "michalewicz_paper")
            return [](double x, double y) { return michalewicz_paper(x, y); };
        throw ConfigError("no oracle for '" + name + "'", "function");
    }

    std::array<double, 4> default_domain(const std::string& function)
    {
        const double pi = std::numbers::pi;
        if (function == "michalewicz_std")
            return {0.0, pi, 0.0, pi};
        return {-4.0, 4.0, -4.0, 4.0};
    }

    const std::array<const char*, 2> default_functions{"michalewicz_std", "michalewicz_paper"};
} // namespace

OracleEntry compute_oracle(const std::string& function, const std::array<double, 4>& domain, double resolution)
{
    const auto f = function_by_name(function);
    const auto [xlo, xhi, ylo, yhi] = domain;
    const auto nx = static_cast<long>(std::floor((xhi - xlo) / resolution + 1e-9));
    const auto ny = static_cast<long>(std::floor((yhi - ylo) / resolution + 1e-9));

    double bx = xlo, by = ylo, best = f(xlo, ylo);
    auto visit = [&](double x, double y) {
        const double v = f(x, y);
        if (v < best) {
            best = v;
            bx = x;
            by = y;
        }
    };
    for (long i = 0; i <= nx + 1; ++i) {
        const double x = i <= nx ? xlo + static_cast<double>(i) * resolution : xhi;
        for (long j = 0; j <= ny + 1; ++j)
            visit(x, j <= ny ? ylo + static_cast<double>(j) * resolution : yhi);
    }

    double span = resolution;
    while (span > 1e-14) {
        const double cx = bx, cy = by;
        for (int i = -10; i <= 10; ++i)
            for (int j = -10; j <= 10; ++j) {
                const double x = std::clamp(cx + span * i / 10.0, xlo, xhi);
                const double y = std::clamp(cy + span * j / 10.0, ylo, yhi);
                visit(x, y);
            }
        span *= 0.5;
    }
    return {function, domain, {bx, by}, best, resolution};
}

std::vector<OracleEntry> compute_default_oracles()
{
    std::vector<OracleEntry> out;
    for (const char* name : default_functions)
        out.push_back(compute_oracle(name, default_domain(name)));
    return out;
}

nlohmann::json oracle_to_json(const std::vector<OracleEntry>& entries)
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries)
        list.push_back({{"function", e.function},
                        {"domain", e.domain},
                        {"minimizer", e.minimizer},
                        {"value", e.value},
                        {"resolution", e.resolution}});
    return {{"format_version", oracle_format_version}, {"oracles", list}};
}

std::vector<OracleEntry> oracle_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format_version").get<int>() != oracle_format_version)
            throw OracleFileError("oracle file has a different format version");
        std::vector<OracleEntry> out;
        for (const auto& e : j.at("oracles"))
            out.push_back({e.at("function").get<std::string>(), e.at("domain").get<std::array<double, 4>>(),
                           e.at("minimizer").get<std::array<double, 2>>(), e.at("value").get<double>(),
                           e.at("resolution").get<double>()});
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw OracleFileError(std::string("malformed oracle file: ") + e.what());
    }
}

void write_oracle_file(const std::filesystem::path& path, const std::vector<OracleEntry>& entries)
{
    std::ofstream out(path);
    if (!out)
        throw OracleFileError("cannot write " + path.string());
    out << oracle_to_json(entries).dump(2) << '\n';
}

std::vector<OracleEntry> load_oracle_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw OracleFileError("oracle file missing: " + path.string() + " (regenerate with `ddea oracle`)");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw OracleFileError(std::string("malformed oracle file: ") + e.what());
    }
    auto entries = oracle_from_json(j);
    for (const char* name : default_functions) {
        const auto& e = find_oracle(entries, name);
        if (e.domain != default_domain(name) || e.resolution != oracle_resolution)
            throw OracleFileError(std::string("stale oracle entry for ") + name + " (regenerate with `ddea oracle`)");
    }
    return entries;
}

const OracleEntry& find_oracle(const std::vector<OracleEntry>& entries, const std::string& function)
{
    for (const auto& e : entries)
        if (e.function == function)
            return e;
    throw OracleFileError("oracle file has no entry for " + function);
}

std::filesystem::path default_oracle_path()
{
    return std::filesystem::path(DDEA_DATA_DIR) / "oracle_constants.json";
}

} // namespace ddea::harness
