#pragma once

#include <chrono>
#include <limits>
#include <span>
#include <vector>

#include <ddea/core.hpp>
#include <ddea/report.hpp>
#include <ddea/rng.hpp>

namespace ddea {

/// base + F * (a - b)
template <typename Scalar>
Genome<Scalar> difference_donor(const Genome<Scalar>& base, const Genome<Scalar>& a, const Genome<Scalar>& b, Scalar f)
{
    require(base.size() == a.size() && a.size() == b.size(), "donor operands differ in length");
    return base + f * (a - b);
}

/// Picks r1 != r2 (and, when `exclude_target`, both != i) uniformly.
inline std::pair<std::size_t, std::size_t> pick_donors(std::size_t n, std::size_t i, RngStream& rng, bool exclude_target)
{
    require(n >= 4, "population too small for difference mutation");
    std::size_t r1 = rng.index(n);
    while (exclude_target && r1 == i)
        r1 = rng.index(n);
    std::size_t r2 = rng.index(n);
    while (r2 == r1 || (exclude_target && r2 == i))
        r2 = rng.index(n);
    return {r1, r2};
}

/// Difference-vector donor v = x_i + F (x_r1 - x_r2), using the target as base.
template <typename Scalar>
Genome<Scalar> de_mutate(std::span<const Individual<Scalar>> pop, std::size_t i, Scalar f, RngStream& rng,
                         bool exclude_target = true)
{
    auto [r1, r2] = pick_donors(pop.size(), i, rng, exclude_target);
    return difference_donor(pop[i].genome, pop[r1].genome, pop[r2].genome, f);
}

/// Binomial crossover: gene j comes from the donor iff a fresh xi <= Cr.
/// With `force_one_gene`, one uniformly chosen gene always comes from the donor.
template <typename Scalar>
Genome<Scalar> crossover(const Genome<Scalar>& target, const Genome<Scalar>& donor, Scalar cr, RngStream& rng,
                         bool force_one_gene)
{
    require(target.size() == donor.size(), "crossover operands differ in length");
    const auto d = static_cast<std::size_t>(target.size());
    const std::size_t forced = force_one_gene ? rng.index(d) : d;
    Genome<Scalar> trial(target.size());
    for (std::size_t j = 0; j < d; ++j) {
        const auto xi = static_cast<Scalar>(rng.uniform01());
        const auto jj = static_cast<Eigen::Index>(j);
        trial[jj] = (xi <= cr || j == forced) ? donor[jj] : target[jj];
    }
    return trial;
}

/// One-to-one survivor selection; ties go to the trial.
template <typename Scalar>
const Individual<Scalar>& select(const Individual<Scalar>& target, const Individual<Scalar>& trial)
{
    require(target.fitness && trial.fitness, "selection needs both fitness values");
    return *trial.fitness <= *target.fitness ? trial : target;
}

template <typename Scalar = double>
struct DeaState {
    std::vector<Individual<Scalar>> population;
    std::uint64_t generation = 0;
    ControlParams<Scalar> params;
    RngStream rng;
    RngStream noise_rng;
    Individual<Scalar> best;
};

namespace detail {
    template <typename Scalar>
    void track_best(Individual<Scalar>& best, const Individual<Scalar>& candidate)
    {
        if (candidate.fitness && (!best.fitness || *candidate.fitness < *best.fitness))
            best = candidate;
    }

    template <typename Scalar>
    GenerationRow<Scalar> dea_row(const DeaState<Scalar>& state, const BudgetLedger& ledger, std::uint64_t evaluations,
                                  bool partial)
    {
        GenerationRow<Scalar> row;
        row.generation = state.generation;
        row.evals_used = ledger.used();
        row.evaluations = evaluations;
        row.species_count = 1;
        row.best_fitness = state.best.fitness.value_or(std::numeric_limits<Scalar>::infinity());
        row.mean_fitness = mean_fitness(std::span<const Individual<Scalar>>(state.population))
                               .value_or(std::numeric_limits<Scalar>::infinity());
        row.partial = partial;
        return row;
    }
} // namespace detail

/// Samples and evaluates the initial population. Stream 0 of `seed` drives
/// the algorithm, stream 1 feeds fitness noise.
template <typename Scalar>
DeaState<Scalar> dea_initialize(const ObjectiveSpec<Scalar>& spec, const ControlParams<Scalar>& params,
                                BudgetLedger& ledger, std::uint64_t seed, std::uint64_t* evaluations = nullptr)
{
    spec.validate();
    params.validate();
    StreamFactory streams(seed);
    auto rng = streams.next();
    auto noise = streams.next();
    DeaState<Scalar> state{init_population(spec, params, rng), 0, params, rng, noise, {}};
    std::uint64_t n = 0;
    for (auto& ind : state.population) {
        if (evaluate_individual(ind, spec, ledger, &state.noise_rng) != EvalStatus::evaluated)
            break;
        ++n;
        detail::track_best(state.best, ind);
    }
    if (evaluations)
        *evaluations = n;
    return state;
}

/// Runs one synchronous generation: every trial is built against the current
/// population before any selection happens. Only as many trials as the budget
/// allows are generated. Returns the number of evaluations performed.
template <typename Scalar>
std::uint64_t dea_step(DeaState<Scalar>& state, const ObjectiveSpec<Scalar>& spec, BudgetLedger& ledger)
{
    const auto& p = state.params;
    const std::size_t n = state.population.size();
    const std::size_t batch = static_cast<std::size_t>(std::min<std::uint64_t>(n, ledger.remaining()));
    if (batch == 0)
        return 0;

    std::span<const Individual<Scalar>> pop(state.population);
    std::vector<Individual<Scalar>> trials;
    trials.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        auto donor = de_mutate(pop, i, p.f_weight, state.rng, p.exclude_target);
        auto trial = crossover(pop[i].genome, donor, p.crossover_rate, state.rng, p.force_one_gene);
        if (p.clamp)
            trial = spec.init_bounds.clamp(trial);
        trials.push_back({std::move(trial), std::nullopt});
    }

    std::uint64_t done = 0;
    for (std::size_t i = 0; i < batch; ++i) {
        if (evaluate_individual(trials[i], spec, ledger, &state.noise_rng) != EvalStatus::evaluated)
            break;
        ++done;
        detail::track_best(state.best, trials[i]);
        if (&select(state.population[i], trials[i]) == &trials[i])
            state.population[i] = std::move(trials[i]);
    }
    if (done == n)
        ++state.generation;
    return done;
}

/// Classic DE until the budget runs out.
template <typename Scalar>
RunReport<Scalar> dea_run(const ObjectiveSpec<Scalar>& spec, const ControlParams<Scalar>& params, BudgetLedger& ledger,
                          std::uint64_t seed)
{
    const auto start = std::chrono::steady_clock::now();
    RunReport<Scalar> report;
    report.cap = ledger.cap();

    std::uint64_t init_evals = 0;
    auto state = dea_initialize(spec, params, ledger, seed, &init_evals);
    report.rows.push_back(detail::dea_row(state, ledger, init_evals, init_evals < params.population_size));

    while (!ledger.exhausted()) {
        const std::uint64_t gen = state.generation;
        const std::uint64_t done = dea_step(state, spec, ledger);
        if (done == 0)
            break;
        const bool partial = done < state.population.size();
        auto row = detail::dea_row(state, ledger, done, partial);
        row.generation = partial ? gen + 1 : state.generation;
        report.rows.push_back(std::move(row));
    }

    report.best = state.best;
    report.evals_used = ledger.used();
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace ddea
