#include <ddea/harness/report_io.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <ddea/core.hpp>

namespace ddea::harness {

std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {
    json vec_json(const Vector<double>& v)
    {
        return std::vector<double>(v.data(), v.data() + v.size());
    }

    json real_json(double v)
    {
        return std::isfinite(v) ? json(v) : json(nullptr);
    }
} // namespace

json report_to_json(const json& config_echo, const RunReport<double>& report, bool include_timing)
{
    json rows = json::array();
    for (const auto& r : report.rows) {
        json species = json::array();
        for (const auto& s : r.species)
            species.push_back({{"id", s.id},
                               {"members", s.members},
                               {"mu", vec_json(s.mu)},
                               {"sigma", vec_json(s.sigma)},
                               {"best_fitness", real_json(s.best_fitness)}});
        json row = {{"generation", r.generation},
                    {"evals_used", r.evals_used},
                    {"evaluations", r.evaluations},
                    {"species_count", r.species_count},
                    {"best_fitness", real_json(r.best_fitness)},
                    {"mean_fitness", real_json(r.mean_fitness)},
                    {"partial", r.partial}};
        if (!species.empty())
            row["species"] = species;
        rows.push_back(row);
    }
    json j = {{"config", config_echo},
              {"generations", rows},
              {"best", {{"genome", vec_json(report.best.genome)}, {"fitness", real_json(report.best.fitness.value_or(NAN))}}},
              {"evals_used", report.evals_used},
              {"cap", report.cap},
              {"warnings", report.warnings}};
    if (report.divergence_scale != 0.0)
        j["divergence_scale"] = report.divergence_scale;
    if (include_timing)
        j["wall_time_s"] = report.wall_time_s;
    return j;
}

void write_generations_csv(std::ostream& out, const RunReport<double>& report)
{
    out << "generation,evals_used,evaluations,species_count,best_fitness,mean_fitness,partial\n";
    for (const auto& r : report.rows)
        out << r.generation << ',' << r.evals_used << ',' << r.evaluations << ',' << r.species_count << ','
            << format_real(r.best_fitness) << ',' << format_real(r.mean_fitness) << ',' << (r.partial ? 1 : 0) << '\n';
}

void write_series_csv(std::ostream& out, const TrackingSeries<double>& series)
{
    out << "tick,value_dB\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out << series.ticks[i] << ',' << format_real(series.values[static_cast<Eigen::Index>(i)]) << '\n';
}

TrackingSeries<double> read_series_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "tick,value_dB")
        throw ConfigError("series CSV must start with the header tick,value_dB", "tracking.series_csv");
    std::vector<std::int64_t> ticks;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected two columns", "tracking.series_csv");
        try {
            std::size_t used = 0;
            ticks.push_back(std::stoll(line.substr(0, comma)));
            const std::string rest = line.substr(comma + 1);
            values.push_back(std::stod(rest, &used));
            if (used != rest.size())
                throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(lineno) + ": malformed number", "tracking.series_csv");
        }
        if (!(std::isfinite(values.back()) && values.back() > 0.0))
            throw ConfigError("line " + std::to_string(lineno) + ": attenuation must be positive", "tracking.series_csv");
    }
    TrackingSeries<double> s;
    s.ticks = std::move(ticks);
    s.values = Eigen::Map<const Vector<double>>(values.data(), static_cast<Eigen::Index>(values.size()));
    return s;
}

void write_tracking_csv(std::ostream& out, const TrackingProblem<double>& problem, const TrackingResult<double>& result)
{
    out << "tick,measured_dB,predicted_dB,log_error\n";
    for (std::size_t i = 0; i < result.predictions.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out << result.predictions.ticks[i] << ','
            << format_real(problem.series.values[static_cast<Eigen::Index>(problem.window) + k]) << ','
            << format_real(result.predictions.values[k]) << ',' << format_real(result.log_errors[k]) << '\n';
    }
}

} // namespace ddea::harness
