#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include <ddea/tracking.hpp>

using namespace ddea;

namespace {

std::vector<double> logs_of(const TrackingSeries<double>& s)
{
    std::vector<double> v;
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
        v.push_back(std::log(s.values[i]));
    return v;
}

double lag1_autocorrelation(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v)
        m += x;
    m /= static_cast<double>(v.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        den += (v[i] - m) * (v[i] - m);
        if (i + 1 < v.size())
            num += (v[i] - m) * (v[i + 1] - m);
    }
    return num / den;
}

TrackingProblem<double> problem(std::size_t length, double beta, double noise, std::size_t window, std::size_t order,
                                std::uint64_t seed = 1)
{
    return {generate_rain_series<double>(length, seed, {1.0, beta, noise}), window, 1, order};
}

} // namespace

TEST_SUITE("tracking") {

TEST_CASE("noise-free series stays at its fixed point")
{
    const auto s = generate_rain_series<double>(200, 1, {1.5, 0.9, 0.0});
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
        CHECK(s.values[i] == std::exp(1.5));
    CHECK(s.ticks.front() == 0);
    CHECK(s.ticks.back() == 199);
}

TEST_CASE("series autocorrelation matches the AR(1) coefficient")
{
    const auto s = generate_rain_series<double>(10000, 2, {1.0, 0.9, 0.1});
    CHECK(std::abs(lag1_autocorrelation(logs_of(s)) - 0.9) <= 0.03);
}

TEST_CASE("beta = 0 gives independent log values")
{
    const auto s = generate_rain_series<double>(20001, 3, {1.0, 0.0, 0.2});
    auto v = logs_of(s);
    v.erase(v.begin());
    double m = 0, q = 0;
    for (double x : v)
        m += x;
    m /= static_cast<double>(v.size());
    for (double x : v)
        q += (x - m) * (x - m);
    const double sd = std::sqrt(q / static_cast<double>(v.size()));
    CHECK(std::abs(m - 1.0) <= 5 * 0.2 / std::sqrt(2e4));
    CHECK(std::abs(sd - 0.2) <= 5 * 0.2 / std::sqrt(4e4));
    CHECK(std::abs(lag1_autocorrelation(v)) <= 5 / std::sqrt(2e4));
}

TEST_CASE("generator is deterministic and validates its parameters")
{
    const auto a = generate_rain_series<double>(500, 9);
    const auto b = generate_rain_series<double>(500, 9);
    const auto c = generate_rain_series<double>(500, 10);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK((a.values.array() > 0).all());
    CHECK_THROWS_AS(generate_rain_series<double>(10, 1, {1.0, 1.0, 0.1}), ConfigError);
    CHECK_THROWS_AS(generate_rain_series<double>(10, 1, {1.0, 0.5, -0.1}), ConfigError);
}

TEST_CASE("constant series is fitted exactly by intercept ln A")
{
    const auto p = problem(600, 0.9, 0.0, 500, 2);
    const auto spec = tracking_objective(p, 500);
    CHECK(spec.dimension == 3);
    CHECK(spec.init_bounds.lower == Vector<double>::Constant(3, -1.0));
    CHECK(spec.init_bounds.upper == Vector<double>::Constant(3, 1.0));
    Genome<double> c(3);
    c << 1.0, 0.0, 0.0;
    CHECK(spec.evaluate(c) == doctest::Approx(0.0).epsilon(1e-24));
    c << 0.5, 0.5, 0.0;
    CHECK(spec.evaluate(c) < 1e-24);
}

TEST_CASE("least squares recovers the AR(1) coefficient")
{
    const auto p = problem(2000, 0.9, 0.1, 500, 1, 4);
    const auto sys = lag_system(p, 1000);
    // Normal equations for the two-parameter fit, solved by hand.
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Eigen::Index r = 0; r < sys.target.size(); ++r) {
        const double x = sys.design(r, 1), y = sys.target[r];
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double c1 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double c0 = (sy - c1 * sx) / n;
    CHECK(std::abs(c1 - 0.9) <= 0.05);

    const auto fit = least_squares_ar_fit(p, 1000);
    CHECK(fit[0] == doctest::Approx(c0).epsilon(1e-9));
    CHECK(fit[1] == doctest::Approx(c1).epsilon(1e-9));

    const auto spec = tracking_objective(p, 1000);
    Genome<double> off = fit;
    off[1] += 1e-3;
    CHECK(spec.evaluate(fit) < spec.evaluate(off));
}

TEST_CASE("objective at t never reads index t or later")
{
    auto p = problem(700, 0.9, 0.1, 500, 2, 5);
    const std::size_t t = 600;
    Genome<double> c(3);
    c << 0.1, 0.7, 0.2;
    const double before = tracking_objective(p, t).evaluate(c);
    for (std::size_t i = t; i < 700; ++i)
        p.series.values[static_cast<Eigen::Index>(i)] *= 3.0;
    CHECK(tracking_objective(p, t).evaluate(c) == before);
    p.series.values[static_cast<Eigen::Index>(t - 1)] *= 3.0;
    CHECK(tracking_objective(p, t).evaluate(c) != before);
}

TEST_CASE("objective before the first full window is rejected")
{
    const auto p = problem(700, 0.9, 0.1, 500, 2);
    CHECK_THROWS_AS(tracking_objective(p, 499), ConfigError);
}

TEST_CASE("one prediction per tick after the window")
{
    const auto p = problem(560, 0.9, 0.1, 500, 2, 6);
    const auto ls = least_squares_tracking(p);
    CHECK(ls.predictions.size() == 60);
    CHECK(ls.predictions.ticks.front() == 500);
    CHECK(ls.log_errors.size() == 60);
    CHECK(ls.fits == 60);
}

TEST_CASE("least-squares one-step error matches the innovation scale")
{
    const auto p = problem(2000, 0.9, 0.1, 500, 2, 7);
    const auto ls = least_squares_tracking(p);
    // Innovations are N(0, 0.1); 1500 residuals give a 5-sigma band of about 0.01.
    CHECK(std::abs(ls.log_rmse - 0.1) < 0.01);
}

TEST_CASE("noise-free series is tracked exactly by both algorithms")
{
    const auto p = problem(530, 0.9, 0.0, 500, 2, 8);
    for (auto algo : {Algorithm::dea, Algorithm::ddea}) {
        TrackingSetup<double> setup;
        setup.algorithm = algo;
        setup.per_step_budget = 2000;
        setup.seed = 3;
        auto audit = std::make_shared<EvaluationAudit>();
        const auto r = tracking_run(p, setup, audit);
        CHECK(r.predictions.size() == 30);
        CHECK(r.log_rmse < 1e-3);
        for (Eigen::Index i = 1; i < r.log_errors.size(); ++i)
            CHECK(std::abs(r.log_errors[i]) < 5e-3);
        CHECK(r.total_evals == 30 * 2000);
        CHECK(audit->calls.load() == r.total_evals);
    }
}

TEST_CASE("longer horizons refit less often and reuse coefficients")
{
    auto p = problem(560, 0.9, 0.1, 500, 2, 9);
    p.horizon = 7;
    TrackingSetup<double> setup;
    setup.algorithm = Algorithm::dea;
    setup.per_step_budget = 300;
    const auto r = tracking_run(p, setup);
    CHECK(r.fits == 9);
    CHECK(r.predictions.size() == 60);
    CHECK(r.total_evals == 9 * 300);
}

TEST_CASE("per-step budget must exceed the population size")
{
    const auto p = problem(560, 0.9, 0.1, 500, 2);
    TrackingSetup<double> setup;
    setup.per_step_budget = 100;
    CHECK_THROWS_AS(tracking_run(p, setup), ConfigError);
}

}
