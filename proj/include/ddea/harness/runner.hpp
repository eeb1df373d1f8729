#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <ddea/harness/config.hpp>
#include <ddea/harness/oracle.hpp>
#include <ddea/report.hpp>
#include <ddea/tracking.hpp>

namespace ddea::harness {

struct RunOutcome {
    RunReport<double> report;
    /// Objective calls counted by the audit wrapper, independent of the ledger.
    std::uint64_t audited_calls = 0;
};

/// Dispatches to dea_run or ddea_run.
RunOutcome run(const RunConfig& config);

struct ComparisonRow {
    std::string algo;
    std::uint64_t seed = 0;
    double final_best = 0.0;
    std::uint64_t evals_used = 0;
    std::uint64_t audited_calls = 0;
};

struct ComparisonSummary {
    std::string algo;
    std::size_t runs = 0;
    double median = 0.0;
    double mean = 0.0;
    /// Sample standard deviation (n - 1); zero for a single run.
    double stddev = 0.0;
    /// NaN when the comparison has no success target.
    double success_rate = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::vector<ComparisonSummary> summary;
    std::optional<double> success_target;
};

/// Worker count: DDE_THREADS when set and positive, else hardware concurrency.
std::size_t worker_count();

/// Success threshold for the objective: oracle minimum (or the known
/// minimum 0 for sphere and two_well) plus 1e-2. Empty when there is none.
std::optional<double> success_target(const ObjectiveConfig& objective, const std::vector<OracleEntry>* oracles);

/// Runs every config under every seed. Configs must share objective and
/// budget. Rows come back sorted by (algo, seed); summaries in config order.
ComparisonTable compare(const std::vector<RunConfig>& configs, const std::vector<std::uint64_t>& seeds,
                        std::optional<double> target, std::size_t threads = 0);

void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

double median(std::vector<double> values);
double sample_stddev(const std::vector<double>& values);

struct TrackOutcome {
    TrackingProblem<double> problem;
    TrackingResult<double> result;
    TrackingResult<double> least_squares;
    std::uint64_t audited_calls = 0;
};

TrackOutcome track(const TrackConfig& config);

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_invariant = 3, exit_oracle = 4 };

/// Runs `body`, mapping ConfigError, InvariantError and OracleFileError to
/// their exit codes after printing the message to `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

} // namespace ddea::harness
