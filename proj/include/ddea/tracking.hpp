#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/QR>

#include <ddea/core.hpp>
#include <ddea/de_classic.hpp>
#include <ddea/speciation.hpp>

namespace ddea {

/// Positive attenuation samples (dB) on an integer tick grid.
template <typename Scalar = double>
struct TrackingSeries {
    std::vector<std::int64_t> ticks;
    Vector<Scalar> values;

    std::size_t size() const { return ticks.size(); }

    void validate() const
    {
        require(ticks.size() == static_cast<std::size_t>(values.size()), "series ticks and values differ in length");
        require(values.allFinite() && (values.array() > Scalar(0)).all(), "series values must be finite and positive");
    }
};

template <typename Scalar = double>
struct RainParams {
    Scalar mean_log = Scalar(1);
    Scalar beta = Scalar(0.9);
    Scalar noise_std = Scalar(0.1);
};

/// Log-domain AR(1): ln A[t+1] = m + beta (ln A[t] - m) + N(0, noise_std),
/// starting from A[0] = exp(m).
template <typename Scalar = double>
TrackingSeries<Scalar> generate_rain_series(std::size_t length, std::uint64_t seed, const RainParams<Scalar>& p = {})
{
    if (!(p.beta >= Scalar(0) && p.beta < Scalar(1)))
        throw ConfigError("beta must lie in [0, 1)", "tracking.beta");
    if (!(p.noise_std >= Scalar(0)))
        throw ConfigError("noise_std must be non-negative", "tracking.noise_std");
    RngStream rng(seed, 0);
    TrackingSeries<Scalar> s;
    s.ticks.resize(length);
    s.values.resize(static_cast<Eigen::Index>(length));
    Scalar log_a = p.mean_log;
    for (std::size_t t = 0; t < length; ++t) {
        s.ticks[t] = static_cast<std::int64_t>(t);
        s.values[static_cast<Eigen::Index>(t)] = std::exp(log_a);
        log_a = p.mean_log + p.beta * (log_a - p.mean_log) + static_cast<Scalar>(rng.normal(0.0, static_cast<double>(p.noise_std)));
    }
    return s;
}

template <typename Scalar = double>
struct TrackingProblem {
    TrackingSeries<Scalar> series;
    /// History length per fit.
    std::size_t window = 500;
    /// Steps predicted per fit.
    std::size_t horizon = 1;
    /// Autoregressive order.
    std::size_t model_order = 2;

    void validate() const
    {
        series.validate();
        if (model_order < 1)
            throw ConfigError("model order must be positive", "tracking.model_order");
        if (window < model_order + 1)
            throw ConfigError("window must be at least model_order + 1", "tracking.window");
        if (horizon < 1)
            throw ConfigError("horizon must be positive", "tracking.horizon");
        if (series.size() <= window)
            throw ConfigError("series must be longer than the window", "tracking.length");
    }
};

/// Lagged regression system for the window [t - W, t): one row per target
/// index s in [t - W + p, t) with columns (1, ln A[s-1], ..., ln A[s-p]).
template <typename Scalar>
struct LagSystem {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> design;
    Vector<Scalar> target;
};

template <typename Scalar>
LagSystem<Scalar> lag_system(const TrackingProblem<Scalar>& problem, std::size_t t)
{
    if (t < problem.window || t > problem.series.size())
        throw ConfigError("tracking step outside [window, length]", "tracking.t");
    const std::size_t p = problem.model_order;
    const auto rows = static_cast<Eigen::Index>(problem.window - p);
    const Vector<Scalar> logs = problem.series.values.array().log().matrix();
    LagSystem<Scalar> sys{Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(rows, static_cast<Eigen::Index>(p + 1)),
                          Vector<Scalar>(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto s = static_cast<Eigen::Index>(t - problem.window + p) + r;
        sys.design(r, 0) = Scalar(1);
        for (std::size_t j = 1; j <= p; ++j)
            sys.design(r, static_cast<Eigen::Index>(j)) = logs[s - static_cast<Eigen::Index>(j)];
        sys.target[r] = logs[s];
    }
    return sys;
}

/// Mean squared one-step log-domain prediction error over the window ending
/// before t. Genome = (c0, c1, ..., cp).
template <typename Scalar = double>
ObjectiveSpec<Scalar> tracking_objective(const TrackingProblem<Scalar>& problem, std::size_t t)
{
    auto sys = std::make_shared<const LagSystem<Scalar>>(lag_system(problem, t));
    const auto dim = static_cast<Eigen::Index>(problem.model_order + 1);
    return {"tracking", dim, Bounds<Scalar>::uniform(dim, Scalar(-1), Scalar(1)),
            [sys](const Genome<Scalar>& c) {
                return (sys->design * c - sys->target).squaredNorm() / static_cast<Scalar>(sys->target.size());
            },
            {}};
}

/// Closed-form least-squares AR fit over the same window.
template <typename Scalar>
Vector<Scalar> least_squares_ar_fit(const TrackingProblem<Scalar>& problem, std::size_t t)
{
    const auto sys = lag_system(problem, t);
    return sys.design.colPivHouseholderQr().solve(sys.target);
}

/// ln A-hat[t] from measured values before t.
template <typename Scalar>
Scalar predict_log(const TrackingProblem<Scalar>& problem, const Vector<Scalar>& coefficients, std::size_t t)
{
    Scalar v = coefficients[0];
    for (std::size_t j = 1; j <= problem.model_order; ++j)
        v += coefficients[static_cast<Eigen::Index>(j)] * std::log(problem.series.values[static_cast<Eigen::Index>(t - j)]);
    return v;
}

template <typename Scalar = double>
struct TrackingResult {
    /// One prediction per tick in [W, length).
    TrackingSeries<Scalar> predictions;
    Vector<Scalar> log_errors;
    Scalar log_rmse{};
    std::uint64_t total_evals = 0;
    std::size_t fits = 0;
};

template <typename Scalar>
Scalar log_rmse(const Vector<Scalar>& log_errors)
{
    return std::sqrt(log_errors.squaredNorm() / static_cast<Scalar>(log_errors.size()));
}

template <typename Scalar>
TrackingResult<Scalar> finish_tracking(const TrackingProblem<Scalar>& problem, const std::vector<Scalar>& predicted_logs)
{
    TrackingResult<Scalar> res;
    const std::size_t w = problem.window;
    const auto n = static_cast<Eigen::Index>(predicted_logs.size());
    res.predictions.ticks.assign(problem.series.ticks.begin() + static_cast<std::ptrdiff_t>(w), problem.series.ticks.end());
    res.predictions.values.resize(n);
    res.log_errors.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar lp = predicted_logs[static_cast<std::size_t>(i)];
        res.predictions.values[i] = std::exp(lp);
        res.log_errors[i] = lp - std::log(problem.series.values[static_cast<Eigen::Index>(w) + i]);
    }
    res.log_rmse = log_rmse(res.log_errors);
    return res;
}

/// Reference tracker: closed-form least squares refit at every fit step.
template <typename Scalar>
TrackingResult<Scalar> least_squares_tracking(const TrackingProblem<Scalar>& problem)
{
    problem.validate();
    std::vector<Scalar> logs;
    std::size_t fits = 0;
    for (std::size_t t = problem.window; t < problem.series.size(); t += problem.horizon) {
        const auto c = least_squares_ar_fit(problem, t);
        ++fits;
        for (std::size_t h = 0; h < problem.horizon && t + h < problem.series.size(); ++h)
            logs.push_back(predict_log(problem, c, t + h));
    }
    auto res = finish_tracking(problem, logs);
    res.fits = fits;
    return res;
}

template <typename Scalar = double>
struct TrackingSetup {
    Algorithm algorithm = Algorithm::ddea;
    ControlParams<Scalar> control;
    DivergenceParams<Scalar> divergence;
    std::uint64_t per_step_budget = 1500;
    std::uint64_t seed = 1;
};

/// Refits the AR model every `horizon` ticks with the chosen optimizer under
/// a fresh per-step budget, warm-starting from the previous step's
/// population or ecosystem (all members re-evaluated against the new window).
/// `audit`, when given, counts every objective call.
template <typename Scalar>
TrackingResult<Scalar> tracking_run(const TrackingProblem<Scalar>& problem, const TrackingSetup<Scalar>& setup,
                                    std::shared_ptr<EvaluationAudit> audit = nullptr)
{
    problem.validate();
    setup.control.validate();
    if (setup.per_step_budget <= setup.control.population_size)
        throw ConfigError("per-step budget must exceed the population size", "tracking.per_step_budget");
    if (setup.algorithm == Algorithm::ddea)
        setup.divergence.validate();

    std::optional<DeaState<Scalar>> dea;
    std::optional<Ecosystem<Scalar>> eco;
    std::vector<Scalar> logs;
    std::uint64_t total = 0;
    std::size_t fits = 0;

    for (std::size_t t = problem.window; t < problem.series.size(); t += problem.horizon) {
        auto spec = tracking_objective(problem, t);
        if (audit)
            spec = audited(std::move(spec), audit);
        BudgetLedger ledger(setup.per_step_budget);
        Vector<Scalar> coefficients;

        if (setup.algorithm == Algorithm::dea) {
            if (!dea)
                dea = dea_initialize(spec, setup.control, ledger, setup.seed);
            else
                dea_reevaluate(*dea, spec, ledger);
            while (dea_step(*dea, spec, ledger) > 0) {
            }
            coefficients = dea->best.genome;
        } else {
            if (!eco) {
                eco = ddea_initialize(spec, setup.control, setup.divergence, ledger, setup.seed);
                if (!ledger.exhausted())
                    ddea_reorganize(*eco);
            } else {
                ddea_reevaluate(*eco, spec, ledger);
            }
            while (!ledger.exhausted())
                if (ddea_step(*eco, spec, ledger).evaluations == 0)
                    break;
            coefficients = eco->best.genome;
        }
        total += ledger.used();
        ++fits;
        for (std::size_t h = 0; h < problem.horizon && t + h < problem.series.size(); ++h)
            logs.push_back(predict_log(problem, coefficients, t + h));
    }

    auto res = finish_tracking(problem, logs);
    res.total_evals = total;
    res.fits = fits;
    return res;
}

} // namespace ddea
