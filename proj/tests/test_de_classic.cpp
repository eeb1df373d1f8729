#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <ddea/benchmarks.hpp>
#include <ddea/de_classic.hpp>

using namespace ddea;

namespace {

Genome<double> g1(double v)
{
    return Genome<double>::Constant(1, v);
}

Individual<double> scored(double f)
{
    return {g1(f), f};
}

} // namespace

TEST_SUITE("de_classic") {

TEST_CASE("difference donor arithmetic")
{
    const auto v = difference_donor(g1(0.5), g1(1.0), g1(0.0), 0.8);
    CHECK(v[0] == doctest::Approx(1.3).epsilon(1e-15));
}

TEST_CASE("equal difference operands return the base unchanged")
{
    Genome<double> base(3), x(3);
    base << 0.1, -2.0, 7.5;
    x << 4.0, 4.0, -1.0;
    CHECK(difference_donor(base, x, x, 0.8) == base);
}

TEST_CASE("crossover with Cr = 1 copies the donor")
{
    RngStream rng(1, 0);
    const Genome<double> target = Genome<double>::Zero(50), donor = Genome<double>::Ones(50);
    CHECK(crossover(target, donor, 1.0, rng, false) == donor);
}

TEST_CASE("crossover with Cr = 0 and no forced gene copies the target")
{
    RngStream rng(2, 0);
    const Genome<double> target = Genome<double>::Zero(50), donor = Genome<double>::Ones(50);
    for (int rep = 0; rep < 100; ++rep)
        CHECK(crossover(target, donor, 0.0, rng, false) == target);
}

TEST_CASE("crossover with Cr = 0 and a forced gene takes exactly one donor gene")
{
    RngStream rng(3, 0);
    const Genome<double> target = Genome<double>::Zero(20), donor = Genome<double>::Ones(20);
    for (int rep = 0; rep < 100; ++rep)
        CHECK(crossover(target, donor, 0.0, rng, true).sum() == 1.0);
}

TEST_CASE("donor gene fraction follows the crossover rate")
{
    const int d = 100000;
    RngStream rng(4, 0);
    const Genome<double> target = Genome<double>::Zero(d), donor = Genome<double>::Ones(d);
    const double frac = crossover(target, donor, 0.5, rng, false).sum() / d;
    // Binomial(d, 0.5): five standard deviations.
    const double band = 5.0 * std::sqrt(0.25 / d);
    CHECK(std::abs(frac - 0.5) <= band);
    CHECK(frac >= 0.49);
    CHECK(frac <= 0.51);
}

TEST_CASE("crossover rejects operands of different length")
{
    RngStream rng(5, 0);
    CHECK_THROWS_AS(crossover<double>(Genome<double>::Zero(2), Genome<double>::Zero(3), 0.5, rng, false), InvariantError);
}

TEST_CASE("selection keeps the better one and gives ties to the trial")
{
    const auto x = scored(2.0);
    const auto better = scored(1.0), same = scored(2.0), worse = scored(3.0);
    CHECK(&select(x, better) == &better);
    CHECK(&select(x, same) == &same);
    CHECK(&select(x, worse) == &x);

    Individual<double> unevaluated{g1(0.0), std::nullopt};
    CHECK_THROWS_AS(select(x, unevaluated), InvariantError);
}

TEST_CASE("donor indices are distinct from each other and from the target")
{
    RngStream rng(6, 0);
    for (int k = 0; k < 10000; ++k) {
        const std::size_t n = 4 + static_cast<std::size_t>(k % 7);
        const std::size_t i = static_cast<std::size_t>(k) % n;
        const auto [r1, r2] = pick_donors(n, i, rng, true);
        CHECK(r1 != r2);
        CHECK(r1 != i);
        CHECK(r2 != i);
        CHECK(r1 < n);
        CHECK(r2 < n);
    }
}

TEST_CASE("without target exclusion the target can be a donor")
{
    RngStream rng(7, 0);
    bool seen = false;
    for (int k = 0; k < 2000 && !seen; ++k) {
        const auto [r1, r2] = pick_donors(4, 0, rng, false);
        CHECK(r1 != r2);
        seen = r1 == 0 || r2 == 0;
    }
    CHECK(seen);
}

TEST_CASE("one generation matches a step-by-step reconstruction from the same stream")
{
    auto spec = make_sphere<double>(3);
    ControlParams<double> p;
    p.population_size = 8;
    p.force_one_gene = true;
    BudgetLedger ledger(1000);
    auto state = dea_initialize(spec, p, ledger, 21);
    const auto before = state.population;
    RngStream rng = state.rng;

    std::vector<Individual<double>> expected = before;
    const std::size_t n = before.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r1 = rng.index(n);
        while (r1 == i)
            r1 = rng.index(n);
        std::size_t r2 = rng.index(n);
        while (r2 == r1 || r2 == i)
            r2 = rng.index(n);
        const std::size_t forced = rng.index(3);
        Genome<double> u(3);
        for (Eigen::Index j = 0; j < 3; ++j) {
            const double xi = rng.uniform01();
            const double v = before[i].genome[j] + 0.8 * (before[r1].genome[j] - before[r2].genome[j]);
            u[j] = (xi <= 0.9 || static_cast<std::size_t>(j) == forced) ? v : before[i].genome[j];
        }
        const double fu = u.squaredNorm();
        if (fu <= *before[i].fitness)
            expected[i] = {u, fu};
    }

    CHECK(dea_step(state, spec, ledger) == n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(state.population[i].genome == expected[i].genome);
        CHECK(*state.population[i].fitness == *expected[i].fitness);
    }
    CHECK(state.generation == 1);
}

TEST_CASE("per-individual fitness never worsens and the population size is constant")
{
    auto spec = make_michalewicz_std<double>();
    ControlParams<double> p;
    p.population_size = 30;
    BudgetLedger ledger(3000);
    auto state = dea_initialize(spec, p, ledger, 8);
    std::vector<double> last;
    for (const auto& ind : state.population)
        last.push_back(*ind.fitness);
    double best = *state.best.fitness;
    while (dea_step(state, spec, ledger) > 0) {
        REQUIRE(state.population.size() == 30);
        for (std::size_t i = 0; i < last.size(); ++i) {
            CHECK(*state.population[i].fitness <= last[i]);
            last[i] = *state.population[i].fitness;
        }
        CHECK(*state.best.fitness <= best);
        best = *state.best.fitness;
    }
}

TEST_CASE("cap equal to N yields only the initial generation")
{
    auto spec = make_sphere<double>(2);
    ControlParams<double> p;
    p.population_size = 10;
    BudgetLedger ledger(10);
    const auto r = dea_run(spec, p, ledger, 5);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].generation == 0);

    BudgetLedger again(10);
    const auto init = dea_initialize(spec, p, again, 5);
    double best = INFINITY;
    for (const auto& ind : init.population)
        best = std::min(best, *ind.fitness);
    CHECK(*r.best.fitness == best);
}

TEST_CASE("table setup on Michalewicz spends exactly the 1500 budget")
{
    auto spec = make_michalewicz_std<double>();
    BudgetLedger ledger(1500);
    const auto r = dea_run(spec, ControlParams<double>{}, ledger, 1);
    CHECK(ledger.used() == 1500);
    CHECK(r.rows.back().evals_used == 1500);
    CHECK(r.rows.size() == 15);
}

TEST_CASE("a cap that ends mid-generation produces a partial final row")
{
    auto spec = make_sphere<double>(2);
    ControlParams<double> p;
    p.population_size = 10;
    BudgetLedger ledger(35);
    const auto r = dea_run(spec, p, ledger, 5);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows.back().partial);
    CHECK(r.rows.back().evaluations == 5);
    CHECK(r.rows.back().generation == 3);
    CHECK(r.evals_used == 35);
}

TEST_CASE("population statistics do not depend on individual labels")
{
    // Relabel the initial population (reverse order) and compare the
    // distribution of outcomes over many independent streams.
    auto spec = make_sphere<double>(4);
    ControlParams<double> p;
    p.population_size = 20;
    std::vector<double> original, relabeled;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        BudgetLedger l1(100000), l2(100000);
        auto a = dea_initialize(spec, p, l1, seed);
        auto b = a;
        std::reverse(b.population.begin(), b.population.end());
        b.rng = RngStream(seed + 100000, 0);
        for (int g = 0; g < 30; ++g) {
            dea_step(a, spec, l1);
            dea_step(b, spec, l2);
        }
        original.push_back(std::log(*a.best.fitness));
        relabeled.push_back(std::log(*b.best.fitness));
    }
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    auto sd = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double x : v)
            s += (x - m) * (x - m);
        return std::sqrt(s / (v.size() - 1));
    };
    // Two-sample difference of means within five standard errors.
    const double se = std::sqrt((sd(original) * sd(original) + sd(relabeled) * sd(relabeled)) / 200.0);
    CHECK(std::abs(mean(original) - mean(relabeled)) < 5 * se);
}

}
