// Command-line front end: run, compare, track, oracle, schema.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ddea/harness/config.hpp>
#include <ddea/harness/oracle.hpp>
#include <ddea/harness/report_io.hpp>
#include <ddea/harness/runner.hpp>

namespace {

using namespace ddea;
using namespace ddea::harness;

struct Options {
    std::vector<std::string> configs;
    std::optional<std::uint64_t> seed;
    std::uint64_t seeds = 1;
    std::string out;
    std::string csv;
    std::string oracle;
    bool quiet = false;
    bool timing = false;
};

std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot write " + path, "--out");
    return f;
}

const std::string& single_config(const Options& o)
{
    if (o.configs.size() != 1)
        throw ConfigError("exactly one --config is required", "--config");
    return o.configs.front();
}

int cmd_run(const Options& o)
{
    if (o.seeds != 1)
        throw ConfigError("run takes a single seed; use compare for several", "--seeds");
    RunConfig config = load_run_config(single_config(o));
    if (o.seed)
        config.seed = *o.seed;
    const auto outcome = run(config);
    const auto& r = outcome.report;

    if (!o.out.empty())
        open_output(o.out) << report_to_json(to_json(config), r, o.timing).dump(2) << '\n';
    if (!o.csv.empty()) {
        auto f = open_output(o.csv);
        write_generations_csv(f, r);
    }
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << '\n';
    if (!o.quiet) {
        std::cout << config.display_label() << " seed=" << config.seed << " best=" << format_real(r.best.fitness.value_or(NAN))
                  << " evals_used=" << r.evals_used << " generations=" << r.rows.size();
        if (o.timing)
            std::cout << " wall_time_s=" << r.wall_time_s;
        std::cout << '\n';
    }
    return exit_ok;
}

int cmd_compare(const Options& o)
{
    if (o.configs.empty())
        throw ConfigError("at least one --config is required", "--config");
    if (o.seeds == 0)
        throw ConfigError("must be at least 1", "--seeds");
    std::vector<RunConfig> configs;
    for (const auto& path : o.configs)
        configs.push_back(load_run_config(path));

    const std::uint64_t base = o.seed.value_or(configs.front().seed);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < o.seeds; ++i)
        seeds.push_back(base + i);

    const auto& objective = configs.front().objective;
    std::optional<std::vector<OracleEntry>> oracles;
    if (objective.name == "michalewicz_std" || objective.name == "michalewicz_paper")
        oracles = load_oracle_file(o.oracle.empty() ? default_oracle_path() : std::filesystem::path(o.oracle));
    const auto target = success_target(objective, oracles ? &*oracles : nullptr);

    const auto table = compare(configs, seeds, target);
    if (!o.csv.empty()) {
        auto f = open_output(o.csv);
        write_comparison_csv(f, table);
    }
    if (!o.out.empty()) {
        json j = {{"configs", json::array()}, {"seeds", seeds}, {"rows", json::array()}, {"summary", json::array()}};
        for (const auto& c : configs)
            j["configs"].push_back(to_json(c));
        for (const auto& r : table.rows)
            j["rows"].push_back({{"algo", r.algo}, {"seed", r.seed}, {"final_best", r.final_best}, {"evals_used", r.evals_used}});
        for (const auto& s : table.summary)
            j["summary"].push_back({{"algo", s.algo},
                                    {"runs", s.runs},
                                    {"median", s.median},
                                    {"mean", s.mean},
                                    {"stddev", s.stddev},
                                    {"success_rate", std::isfinite(s.success_rate) ? json(s.success_rate) : json(nullptr)}});
        if (target)
            j["success_target"] = *target;
        open_output(o.out) << j.dump(2) << '\n';
    }
    if (!o.quiet)
        write_comparison_csv(std::cout, table);
    return exit_ok;
}

int cmd_track(const Options& o)
{
    if (o.seeds != 1)
        throw ConfigError("track takes a single seed", "--seeds");
    TrackConfig config = load_track_config(single_config(o));
    if (o.seed)
        config.seed = *o.seed;
    const auto outcome = track(config);

    if (!o.csv.empty()) {
        auto f = open_output(o.csv);
        write_tracking_csv(f, outcome.problem, outcome.result);
    }
    if (!o.out.empty()) {
        json j = {{"config", to_json(config)},
                  {"log_rmse", outcome.result.log_rmse},
                  {"least_squares_log_rmse", outcome.least_squares.log_rmse},
                  {"predictions", outcome.result.predictions.size()},
                  {"fits", outcome.result.fits},
                  {"total_evals", outcome.result.total_evals}};
        open_output(o.out) << j.dump(2) << '\n';
    }
    if (!o.quiet)
        std::cout << algorithm_name(config.algorithm) << " seed=" << config.seed
                  << " log_rmse=" << format_real(outcome.result.log_rmse)
                  << " least_squares_log_rmse=" << format_real(outcome.least_squares.log_rmse)
                  << " fits=" << outcome.result.fits << " total_evals=" << outcome.result.total_evals << '\n';
    return exit_ok;
}

int cmd_oracle(const Options& o)
{
    const std::filesystem::path path = o.out.empty() ? default_oracle_path() : std::filesystem::path(o.out);
    const auto entries = compute_default_oracles();
    write_oracle_file(path, entries);
    if (!o.quiet)
        for (const auto& e : entries)
            std::cout << e.function << " min=" << format_real(e.value) << " at (" << format_real(e.minimizer[0]) << ", "
                      << format_real(e.minimizer[1]) << ")\n";
    return exit_ok;
}

int cmd_schema(const Options& o)
{
    const std::string text = config_schema().dump(2);
    if (o.out.empty())
        std::cout << text << '\n';
    else
        open_output(o.out) << text << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Differential evolution and divergence differential evolution experiments"};
    app.require_subcommand(1, 1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output file (JSON)");
        sub->add_flag("--quiet", o.quiet, "Suppress stdout summary");
    };
    auto add_run_options = [&](CLI::App* sub) {
        sub->add_option("--config", o.configs, "Config file (JSON)")->required();
        sub->add_option("--seed", o.seed, "Seed override");
        sub->add_option("--seeds", o.seeds, "Number of consecutive seeds starting at --seed");
        sub->add_option("--csv", o.csv, "CSV output file");
        sub->add_flag("--timing", o.timing, "Include wall time in the report");
        add_common(sub);
    };

    auto* run_cmd = app.add_subcommand("run", "Run one config");
    add_run_options(run_cmd);
    auto* compare_cmd = app.add_subcommand("compare", "Run several configs over a range of seeds");
    add_run_options(compare_cmd);
    compare_cmd->add_option("--oracle", o.oracle, "Oracle constants file");
    auto* track_cmd = app.add_subcommand("track", "Track a rain-attenuation series");
    add_run_options(track_cmd);
    auto* oracle_cmd = app.add_subcommand("oracle", "Regenerate the benchmark oracle constants");
    add_common(oracle_cmd);
    auto* schema_cmd = app.add_subcommand("schema", "Print the config schema");
    add_common(schema_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    return run_guarded(
        [&] {
            if (*run_cmd)
                return cmd_run(o);
            if (*compare_cmd)
                return cmd_compare(o);
            if (*track_cmd)
                return cmd_track(o);
            if (*oracle_cmd)
                return cmd_oracle(o);
            return cmd_schema(o);
        },
        std::cerr);
}
