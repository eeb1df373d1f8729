#include <ddea/harness/runner.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include <ddea/de_classic.hpp>
#include <ddea/harness/report_io.hpp>
#include <ddea/speciation.hpp>

namespace ddea::harness {

RunOutcome run(const RunConfig& config)
{
    auto audit = std::make_shared<EvaluationAudit>();
    const auto spec = audited(build_objective(config.objective), audit);
    config.control.validate();
    BudgetLedger ledger(config.budget);

    RunOutcome out;
    if (config.algorithm == Algorithm::dea) {
        out.report = dea_run(spec, config.control, ledger, config.seed);
    } else {
        const DivergenceParams<double> params = config.ddea.value_or(DivergenceParams<double>{});
        params.validate();
        out.report = ddea_run(spec, config.control, params, ledger, config.seed);
    }
    out.audited_calls = audit->calls.load();
    require(out.audited_calls == ledger.used(), "audit count differs from ledger");
    return out;
}

std::size_t worker_count()
{
    if (const char* env = std::getenv("DDE_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::optional<double> success_target(const ObjectiveConfig& objective, const std::vector<OracleEntry>* oracles)
{
    constexpr double tolerance = 1e-2;
    if (objective.name == "sphere" || objective.name == "two_well")
        return 0.0 + tolerance;
    if (!oracles)
        return std::nullopt;
    return find_oracle(*oracles, objective.name).value + tolerance;
}

double median(std::vector<double> values)
{
    require(!values.empty(), "median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sample_stddev(const std::vector<double>& values)
{
    if (values.size() < 2)
        return 0.0;
    const double m = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ComparisonTable compare(const std::vector<RunConfig>& configs, const std::vector<std::uint64_t>& seeds,
                        std::optional<double> target, std::size_t threads)
{
    if (configs.empty())
        throw ConfigError("compare needs at least one config", "config");
    if (seeds.empty())
        throw ConfigError("compare needs at least one seed", "seed");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& c = configs[i];
        const std::string where = "config[" + std::to_string(i) + "]";
        if (c.budget != configs.front().budget)
            throw ConfigError("budgets differ across compared configs", where + ".budget");
        if (!(c.objective == configs.front().objective))
            throw ConfigError("objectives differ across compared configs", where + ".objective");
        if (!labels.insert(c.display_label()).second)
            throw ConfigError("duplicate label '" + c.display_label() + "'", where + ".label");
    }

    struct Job {
        std::size_t config;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (auto s : seeds)
            jobs.push_back({i, s});

    std::vector<ComparisonRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            try {
                RunConfig c = configs[jobs[j].config];
                c.seed = jobs[j].seed;
                const auto out = run(c);
                rows[j] = {c.display_label(), c.seed, out.report.best.fitness.value_or(NAN), out.report.evals_used,
                           out.audited_calls};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = jobs.size();
            }
        }
    };

    const std::size_t n_workers = std::min(threads ? threads : worker_count(), jobs.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    ComparisonTable table;
    table.success_target = target;
    for (const auto& c : configs) {
        std::vector<double> finals;
        for (const auto& r : rows)
            if (r.algo == c.display_label())
                finals.push_back(r.final_best);
        ComparisonSummary s;
        s.algo = c.display_label();
        s.runs = finals.size();
        s.median = median(finals);
        s.mean = std::accumulate(finals.begin(), finals.end(), 0.0) / static_cast<double>(finals.size());
        s.stddev = sample_stddev(finals);
        if (target) {
            const auto hits = std::count_if(finals.begin(), finals.end(), [&](double v) { return v <= *target; });
            s.success_rate = static_cast<double>(hits) / static_cast<double>(finals.size());
        } else {
            s.success_rate = NAN;
        }
        table.summary.push_back(s);
    }
    std::sort(rows.begin(), rows.end(),
              [](const ComparisonRow& a, const ComparisonRow& b) { return std::tie(a.algo, a.seed) < std::tie(b.algo, b.seed); });
    table.rows = std::move(rows);
    return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table)
{
    out << "algo,seed,final_best,evals_used\n";
    for (const auto& r : table.rows)
        out << r.algo << ',' << r.seed << ',' << format_real(r.final_best) << ',' << r.evals_used << '\n';
    out << "\nalgo,runs,median,mean,stddev,success_rate\n";
    for (const auto& s : table.summary)
        out << s.algo << ',' << s.runs << ',' << format_real(s.median) << ',' << format_real(s.mean) << ','
            << format_real(s.stddev) << ',' << format_real(s.success_rate) << '\n';
}

TrackOutcome track(const TrackConfig& config)
{
    TrackOutcome out;
    out.problem = build_tracking_problem(config.tracking);
    auto audit = std::make_shared<EvaluationAudit>();
    out.result = tracking_run(out.problem, build_tracking_setup(config), audit);
    out.audited_calls = audit->calls.load();
    require(out.audited_calls == out.result.total_evals, "audit count differs from ledger total");
    out.least_squares = least_squares_tracking(out.problem);
    return out;
}

int run_guarded(const std::function<int()>& body, std::ostream& err)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const OracleFileError& e) {
        err << "oracle error: " << e.what() << '\n';
        return exit_oracle;
    } catch (const InvariantError& e) {
        err << "invariant violation: " << e.what() << '\n';
        return exit_invariant;
    }
}

} // namespace ddea::harness
