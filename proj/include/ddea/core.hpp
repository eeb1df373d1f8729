#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <ddea/rng.hpp>

namespace ddea {

enum class Algorithm { dea, ddea };

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
using Genome = Vector<Scalar>;

/// Invalid user configuration. `field` is a dotted path when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : std::runtime_error(field.empty() ? message : field + ": " + message), _field(std::move(field)) {}

    const std::string& field() const { return _field; }

private:
    std::string _field;
};

/// A broken internal contract (length mismatch, missing fitness, NaN).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool condition, const char* what)
{
    if (!condition)
        throw InvariantError(what);
}

template <typename Scalar = double>
struct Individual {
    Genome<Scalar> genome;
    std::optional<Scalar> fitness;

    bool evaluated() const { return fitness.has_value(); }
};

template <typename Scalar>
bool all_finite(const Genome<Scalar>& g)
{
    return g.allFinite();
}

template <typename Scalar = double>
struct Bounds {
    Vector<Scalar> lower;
    Vector<Scalar> upper;

    static Bounds uniform(Eigen::Index dim, Scalar lo, Scalar hi)
    {
        return {Vector<Scalar>::Constant(dim, lo), Vector<Scalar>::Constant(dim, hi)};
    }

    Eigen::Index dimension() const { return lower.size(); }

    void validate() const
    {
        if (lower.size() == 0 || lower.size() != upper.size())
            throw ConfigError("lower and upper must be non-empty and of equal length", "bounds");
        if (!lower.allFinite() || !upper.allFinite())
            throw ConfigError("bounds must be finite", "bounds");
        if (!(lower.array() < upper.array()).all())
            throw ConfigError("lower[j] < upper[j] required for every j", "bounds");
    }

    Genome<Scalar> clamp(const Genome<Scalar>& g) const { return g.cwiseMax(lower).cwiseMin(upper); }
};

template <typename Scalar = double>
struct ControlParams {
    std::size_t population_size = 100;
    Scalar f_weight = Scalar(0.8);
    Scalar crossover_rate = Scalar(0.9);
    /// Guarantee one donor gene per trial (the conventional j_rand index).
    bool force_one_gene = false;
    /// Exclude the target index from the two difference-vector donors.
    bool exclude_target = true;
    /// Clamp trials to the initialization bounds. Off: the search is unclamped.
    bool clamp = false;

    void validate() const
    {
        if (population_size < 4)
            throw ConfigError("population size must be at least 4", "control.population_size");
        if (!(f_weight > Scalar(0) && f_weight <= Scalar(1)))
            throw ConfigError("F must lie in (0, 1]", "control.f_weight");
        if (!(crossover_rate >= Scalar(0) && crossover_rate <= Scalar(1)))
            throw ConfigError("Cr must lie in [0, 1]", "control.crossover_rate");
    }

    bool operator==(const ControlParams&) const = default;
};

template <typename Scalar = double>
struct GaussianNoise {
    Scalar std_dev = Scalar(0);
};

/// A minimization problem: lower objective values are better.
template <typename Scalar = double>
struct ObjectiveSpec {
    std::string name;
    Eigen::Index dimension = 0;
    Bounds<Scalar> init_bounds;
    std::function<Scalar(const Genome<Scalar>&)> evaluate;
    std::optional<GaussianNoise<Scalar>> noise;

    void validate() const
    {
        if (dimension <= 0)
            throw ConfigError("dimension must be positive", "objective.dimension");
        init_bounds.validate();
        if (init_bounds.dimension() != dimension)
            throw ConfigError("bounds length differs from dimension", "objective.bounds");
        if (!evaluate)
            throw ConfigError("objective has no evaluation function", "objective");
        if (noise && !(noise->std_dev >= Scalar(0)))
            throw ConfigError("noise std must be non-negative", "objective.noise_std");
    }
};

/// Wraps a maximization problem so it can be minimized.
template <typename Scalar>
ObjectiveSpec<Scalar> negated(ObjectiveSpec<Scalar> spec)
{
    spec.evaluate = [f = std::move(spec.evaluate)](const Genome<Scalar>& g) { return -f(g); };
    spec.name = "neg_" + spec.name;
    return spec;
}

/// Shared monotone count of objective evaluations against a hard cap.
class BudgetLedger {
public:
    explicit BudgetLedger(std::uint64_t cap) : _cap(cap)
    {
        if (cap == 0)
            throw ConfigError("budget cap must be positive", "budget");
    }

    BudgetLedger(const BudgetLedger&) = delete;
    BudgetLedger& operator=(const BudgetLedger&) = delete;

    /// Takes one unit of budget; false once the cap is reached.
    bool try_consume()
    {
        std::uint64_t cur = _used.load(std::memory_order_relaxed);
        while (cur < _cap) {
            if (_used.compare_exchange_weak(cur, cur + 1, std::memory_order_relaxed))
                return true;
        }
        return false;
    }

    std::uint64_t used() const { return _used.load(std::memory_order_relaxed); }
    std::uint64_t cap() const { return _cap; }
    std::uint64_t remaining() const { return _cap - used(); }
    bool exhausted() const { return used() >= _cap; }

private:
    std::atomic<std::uint64_t> _used{0};
    std::uint64_t _cap;
};

/// Counts calls into the wrapped objective, independently of any ledger.
struct EvaluationAudit {
    std::atomic<std::uint64_t> calls{0};
};

template <typename Scalar>
ObjectiveSpec<Scalar> audited(ObjectiveSpec<Scalar> spec, std::shared_ptr<EvaluationAudit> audit)
{
    spec.evaluate = [f = std::move(spec.evaluate), audit = std::move(audit)](const Genome<Scalar>& g) {
        audit->calls.fetch_add(1, std::memory_order_relaxed);
        return f(g);
    };
    return spec;
}

/// Gene from a unit draw: xi * (upper - lower) + lower.
template <typename Scalar>
Scalar uniform_gene(Scalar xi, Scalar lower, Scalar upper)
{
    return xi * (upper - lower) + lower;
}

template <typename Scalar>
Genome<Scalar> random_genome(const Bounds<Scalar>& bounds, RngStream& rng)
{
    Genome<Scalar> g(bounds.dimension());
    for (Eigen::Index j = 0; j < g.size(); ++j)
        g[j] = uniform_gene(static_cast<Scalar>(rng.uniform01()), bounds.lower[j], bounds.upper[j]);
    return g;
}

/// Uniform random population inside the initialization bounds; fitness unset.
template <typename Scalar>
std::vector<Individual<Scalar>> init_population(const ObjectiveSpec<Scalar>& spec, const ControlParams<Scalar>& params,
                                                RngStream& rng)
{
    spec.init_bounds.validate();
    params.validate();
    std::vector<Individual<Scalar>> pop;
    pop.reserve(params.population_size);
    for (std::size_t i = 0; i < params.population_size; ++i)
        pop.push_back({random_genome(spec.init_bounds, rng), std::nullopt});
    return pop;
}

enum class EvalStatus { evaluated, cached, budget_exhausted };

/// Sets `ind.fitness` and charges exactly one unit of budget, unless the
/// individual already carries a fitness.
template <typename Scalar>
EvalStatus evaluate_individual(Individual<Scalar>& ind, const ObjectiveSpec<Scalar>& spec, BudgetLedger& ledger,
                               RngStream* noise_rng = nullptr)
{
    if (ind.fitness)
        return EvalStatus::cached;
    require(ind.genome.size() == spec.dimension, "genome length differs from objective dimension");
    require(all_finite(ind.genome), "non-finite gene");
    if (!ledger.try_consume())
        return EvalStatus::budget_exhausted;
    Scalar value = spec.evaluate(ind.genome);
    if (spec.noise && spec.noise->std_dev > Scalar(0)) {
        require(noise_rng != nullptr, "noisy objective evaluated without a noise stream");
        value += static_cast<Scalar>(noise_rng->normal(0.0, static_cast<double>(spec.noise->std_dev)));
    }
    require(std::isfinite(static_cast<double>(value)), "objective returned a non-finite value");
    ind.fitness = value;
    return EvalStatus::evaluated;
}

/// Index of the best evaluated individual, if any.
template <typename Scalar>
std::optional<std::size_t> best_index(std::span<const Individual<Scalar>> pop)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (!pop[i].fitness)
            continue;
        if (!best || *pop[i].fitness < *pop[*best].fitness)
            best = i;
    }
    return best;
}

template <typename Scalar>
std::optional<Scalar> mean_fitness(std::span<const Individual<Scalar>> pop)
{
    Scalar sum(0);
    std::size_t n = 0;
    for (const auto& ind : pop) {
        if (ind.fitness) {
            sum += *ind.fitness;
            ++n;
        }
    }
    if (n == 0)
        return std::nullopt;
    return sum / static_cast<Scalar>(n);
}

/// Genomes as the columns of a D x n matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> genome_matrix(std::span<const Individual<Scalar>> pop)
{
    require(!pop.empty(), "empty population");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(pop.front().genome.size(), static_cast<Eigen::Index>(pop.size()));
    for (std::size_t i = 0; i < pop.size(); ++i)
        m.col(static_cast<Eigen::Index>(i)) = pop[i].genome;
    return m;
}

} // namespace ddea
