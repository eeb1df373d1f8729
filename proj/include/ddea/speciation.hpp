#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <ddea/core.hpp>
#include <ddea/de_classic.hpp>
#include <ddea/gaussian_model.hpp>
#include <ddea/report.hpp>
#include <ddea/rng.hpp>

namespace ddea {

/// An independently evolving group summarized by one Gaussian.
template <typename Scalar = double>
struct Species {
    std::uint64_t id = 0;
    std::vector<Individual<Scalar>> members;
    GaussianModel<Scalar> model;
    RngStream rng{0, 0};
};

template <typename Scalar = double>
struct DivergenceParams {
    /// Radius of the ball around the species mean.
    Scalar l = Scalar(1);
    /// Split scale; empty means calibrate it from the first population.
    std::optional<Scalar> a;
    /// Merge threshold on the distance between species means.
    Scalar a_prime = Scalar(0.1);
    Scalar min_cluster_fraction = Scalar(0.1);
    std::size_t max_species = 16;
    /// Split when the central fraction is below k instead of at or above it.
    bool invert_split_predicate = false;
    VarianceMode variance_mode = VarianceMode::paper;
    /// Test hook: generation -> species count to reach in that generation's
    /// divergence pass, splitting regardless of the predicate.
    std::map<std::uint64_t, std::size_t> force_split_schedule;

    void validate() const
    {
        if (!(l > Scalar(0)))
            throw ConfigError("l must be positive", "ddea.l");
        if (a && !(*a > Scalar(0)))
            throw ConfigError("a must be positive", "ddea.a");
        if (!(a_prime >= Scalar(0)))
            throw ConfigError("a_prime must be non-negative", "ddea.a_prime");
        if (!(min_cluster_fraction >= Scalar(0) && min_cluster_fraction < Scalar(0.5)))
            throw ConfigError("min_cluster_fraction must lie in [0, 0.5)", "ddea.min_cluster_fraction");
        if (max_species < 1)
            throw ConfigError("max_species must be at least 1", "ddea.max_species");
    }

    bool operator==(const DivergenceParams&) const = default;
};

/// Species ids and RNG streams for one run; both come from monotone counters.
struct Lineage {
    StreamFactory streams;
    std::uint64_t next_species_id = 0;

    explicit Lineage(std::uint64_t seed) : streams(seed) {}

    std::uint64_t new_id() { return next_species_id++; }
};

inline constexpr double range_floor = 1e-12;

template <typename Scalar>
std::size_t count_within(std::span<const Individual<Scalar>> members, const Vector<Scalar>& center, Scalar radius)
{
    return static_cast<std::size_t>(std::count_if(members.begin(), members.end(), [&](const auto& ind) {
        return (ind.genome - center).norm() <= radius;
    }));
}

/// Euclidean norm of the per-gene extent (max - min) over the members.
template <typename Scalar>
Scalar population_range(std::span<const Individual<Scalar>> members)
{
    const auto x = genome_matrix(members);
    return (x.rowwise().maxCoeff() - x.rowwise().minCoeff()).norm();
}

/// Fraction of members within distance l of the species mean.
template <typename Scalar>
Scalar compute_dive(const Species<Scalar>& s, Scalar l)
{
    require(!s.members.empty(), "species without members");
    std::span<const Individual<Scalar>> m(s.members);
    return static_cast<Scalar>(count_within(m, s.model.mu, l)) / static_cast<Scalar>(m.size());
}

/// a * l / range; +inf ("never split") once the species has collapsed.
template <typename Scalar>
Scalar compute_k(const Species<Scalar>& s, Scalar a, Scalar l)
{
    require(s.members.size() >= 2, "split threshold needs at least two members");
    const Scalar range = population_range(std::span<const Individual<Scalar>>(s.members));
    if (range < Scalar(range_floor))
        return std::numeric_limits<Scalar>::infinity();
    return a * l / range;
}

template <typename Scalar>
struct ScaleCalibration {
    Scalar a;
    bool fallback = false;
};

/// Solves a = inside / (2 k) together with k = a l / range:
/// a = sqrt(inside * range / (2 l)). Falls back to a = 1 when nothing sits
/// inside the ball or the population has no extent.
template <typename Scalar>
ScaleCalibration<Scalar> calibrate_a(Scalar inside, Scalar range, Scalar l)
{
    using std::sqrt;
    if (!(inside > Scalar(0)) || !(range > Scalar(0)))
        return {Scalar(1), true};
    return {sqrt(inside * range / (Scalar(2) * l)), false};
}

template <typename Scalar>
ScaleCalibration<Scalar> calibrate_a(const Species<Scalar>& first, Scalar l)
{
    std::span<const Individual<Scalar>> m(first.members);
    return calibrate_a(static_cast<Scalar>(count_within(m, first.model.mu, l)), population_range(m), l);
}

template <typename Scalar>
bool should_split(Scalar dive, Scalar k, bool invert)
{
    if (std::isinf(static_cast<double>(k)))
        return false;
    return invert ? dive < k : dive >= k;
}

template <typename Scalar>
bool should_split(const Species<Scalar>& s, const DivergenceParams<Scalar>& params, Scalar a)
{
    if (s.members.size() < 2)
        return false;
    return should_split(compute_dive(s, params.l), compute_k(s, a, params.l), params.invert_split_predicate);
}

template <typename Scalar>
struct TwoMeansResult {
    std::vector<std::uint8_t> label;
    std::array<std::size_t, 2> sizes{0, 0};
    std::array<Vector<Scalar>, 2> centroids;
    int iterations = 0;
};

/// Lloyd's 2-means seeded with the farthest pair (first pair in index order
/// on ties). Points equidistant to both centroids go to cluster 0. All-equal
/// input yields a single cluster.
template <typename Scalar>
TwoMeansResult<Scalar> two_means(std::span<const Individual<Scalar>> pts, int max_iterations = 50)
{
    require(!pts.empty(), "two_means on an empty set");
    const std::size_t n = pts.size();
    TwoMeansResult<Scalar> res;
    res.label.assign(n, 0);

    std::size_t ia = 0, ib = 0;
    Scalar far = Scalar(-1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Scalar d = (pts[i].genome - pts[j].genome).squaredNorm();
            if (d > far) {
                far = d;
                ia = i;
                ib = j;
            }
        }
    if (!(far > Scalar(0))) {
        res.sizes = {n, 0};
        res.centroids = {pts[0].genome, pts[0].genome};
        return res;
    }
    res.centroids = {pts[ia].genome, pts[ib].genome};

    for (int it = 0; it < max_iterations; ++it) {
        res.iterations = it + 1;
        bool changed = it == 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Scalar d0 = (pts[i].genome - res.centroids[0]).squaredNorm();
            const Scalar d1 = (pts[i].genome - res.centroids[1]).squaredNorm();
            const std::uint8_t lab = d1 < d0 ? 1 : 0;
            changed = changed || lab != res.label[i];
            res.label[i] = lab;
        }
        std::array<Vector<Scalar>, 2> sum{Vector<Scalar>::Zero(pts[0].genome.size()),
                                          Vector<Scalar>::Zero(pts[0].genome.size())};
        res.sizes = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            sum[res.label[i]] += pts[i].genome;
            ++res.sizes[res.label[i]];
        }
        if (res.sizes[0] == 0 || res.sizes[1] == 0)
            break;
        for (int c = 0; c < 2; ++c)
            res.centroids[c] = sum[c] / static_cast<Scalar>(res.sizes[c]);
        if (!changed)
            break;
    }
    return res;
}

namespace detail {
    template <typename Scalar>
    Species<Scalar> make_species(std::vector<Individual<Scalar>> members, Lineage& lineage)
    {
        Species<Scalar> s;
        s.id = lineage.new_id();
        s.model = estimate_gaussian(std::span<const Individual<Scalar>>(members));
        s.members = std::move(members);
        s.rng = lineage.streams.next();
        return s;
    }

    /// Even split along the gene with the widest extent; used only when a
    /// scheduled split meets a degenerate 2-means partition.
    template <typename Scalar>
    std::vector<std::uint8_t> median_labels(std::span<const Individual<Scalar>> pts)
    {
        const auto x = genome_matrix(pts);
        Eigen::Index axis = 0;
        (x.rowwise().maxCoeff() - x.rowwise().minCoeff()).maxCoeff(&axis);
        std::vector<std::size_t> order(pts.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x(axis, a) < x(axis, b); });
        std::vector<std::uint8_t> label(pts.size(), 0);
        for (std::size_t r = pts.size() / 2; r < pts.size(); ++r)
            label[order[r]] = 1;
        return label;
    }
} // namespace detail

/// Divergence operator. Partitions the members with 2-means and returns the
/// two clusters as new species (fresh ids and streams, models refitted, not
/// yet replenished). Returns the original species when the ecosystem is at
/// `max_species` or when a cluster has no more than
/// `min_cluster_fraction * members` members. A `forced` split falls back to
/// an even split instead of giving up on the floor.
template <typename Scalar>
std::vector<Species<Scalar>> split_species(const Species<Scalar>& s, const DivergenceParams<Scalar>& params,
                                           std::size_t live_species, Lineage& lineage, bool forced = false)
{
    if (live_species >= params.max_species || s.members.size() < 2)
        return {s};
    std::span<const Individual<Scalar>> pts(s.members);
    const auto clusters = two_means(pts);
    const Scalar floor = static_cast<Scalar>(s.members.size()) * params.min_cluster_fraction;
    auto label = clusters.label;
    if (static_cast<Scalar>(clusters.sizes[0]) <= floor || static_cast<Scalar>(clusters.sizes[1]) <= floor) {
        if (!forced)
            return {s};
        label = detail::median_labels(pts);
    }

    std::array<std::vector<Individual<Scalar>>, 2> parts;
    for (std::size_t i = 0; i < s.members.size(); ++i)
        parts[label[i]].push_back(s.members[i]);
    std::vector<Species<Scalar>> out;
    out.push_back(detail::make_species(std::move(parts[0]), lineage));
    out.push_back(detail::make_species(std::move(parts[1]), lineage));
    return out;
}

/// Tops a species up to `target` members by sampling its own Gaussian. All
/// samples are drawn before any is evaluated; samples the budget cannot pay
/// for are discarded. Returns the number of evaluations.
template <typename Scalar>
std::uint64_t replenish(Species<Scalar>& s, std::size_t target, const ObjectiveSpec<Scalar>& spec, BudgetLedger& ledger,
                        RngStream& noise, bool clamp = false)
{
    if (s.members.size() >= target)
        return 0;
    std::vector<Individual<Scalar>> fresh;
    for (std::size_t i = s.members.size(); i < target; ++i) {
        auto g = sample_model(s.model, Scalar(1), s.rng);
        fresh.push_back({clamp ? spec.init_bounds.clamp(g) : std::move(g), std::nullopt});
    }
    std::uint64_t done = 0;
    for (auto& ind : fresh) {
        if (evaluate_individual(ind, spec, ledger, &noise) != EvalStatus::evaluated)
            break;
        s.members.push_back(std::move(ind));
        ++done;
    }
    return done;
}

template <typename Scalar>
Scalar mean_distance(const Species<Scalar>& a, const Species<Scalar>& b)
{
    return (a.model.mu - b.model.mu).norm();
}

template <typename Scalar>
bool should_merge(const Species<Scalar>& a, const Species<Scalar>& b, Scalar a_prime)
{
    return mean_distance(a, b) <= a_prime;
}

/// Averages two Gaussian models elementwise.
template <typename Scalar>
GaussianModel<Scalar> average_models(const GaussianModel<Scalar>& a, const GaussianModel<Scalar>& b)
{
    require(a.dimension() == b.dimension(), "models differ in dimension");
    return {(a.mu + b.mu) / Scalar(2), (a.sigma + b.sigma) / Scalar(2)};
}

/// Assimilation operator: averaged model, best `keep` members of the union
/// (unevaluated members rank last), fresh id and stream.
template <typename Scalar>
Species<Scalar> merge_species(const Species<Scalar>& a, const Species<Scalar>& b, std::size_t keep, Lineage& lineage)
{
    Species<Scalar> m;
    m.id = lineage.new_id();
    m.model = average_models(a.model, b.model);
    m.members = a.members;
    m.members.insert(m.members.end(), b.members.begin(), b.members.end());
    std::stable_sort(m.members.begin(), m.members.end(), [](const auto& x, const auto& y) {
        if (x.fitness && y.fitness)
            return *x.fitness < *y.fitness;
        return x.fitness.has_value() && !y.fitness.has_value();
    });
    if (m.members.size() > keep)
        m.members.resize(keep);
    m.rng = lineage.streams.next();
    return m;
}

template <typename Scalar = double>
struct Ecosystem {
    std::vector<Species<Scalar>> species;
    DivergenceParams<Scalar> params;
    ControlParams<Scalar> control;
    std::uint64_t generation = 0;
    Scalar a = Scalar(1);
    Lineage lineage;
    RngStream noise_rng;
    Individual<Scalar> best;
    std::vector<std::string> warnings;
};

namespace detail {
    template <typename Scalar>
    void sort_by_id(std::vector<Species<Scalar>>& v)
    {
        std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    }

    template <typename Scalar>
    GenerationRow<Scalar> ecosystem_row(const Ecosystem<Scalar>& eco, const BudgetLedger& ledger,
                                        std::uint64_t evaluations, bool partial)
    {
        GenerationRow<Scalar> row;
        row.generation = eco.generation;
        row.evals_used = ledger.used();
        row.evaluations = evaluations;
        row.species_count = eco.species.size();
        row.best_fitness = eco.best.fitness.value_or(std::numeric_limits<Scalar>::infinity());
        row.partial = partial;
        Scalar sum(0);
        std::size_t n = 0;
        for (const auto& s : eco.species) {
            SpeciesSummary<Scalar> summary{s.id, s.members.size(), s.model.mu, s.model.sigma,
                                           std::numeric_limits<Scalar>::infinity()};
            for (const auto& ind : s.members)
                if (ind.fitness) {
                    summary.best_fitness = std::min(summary.best_fitness, *ind.fitness);
                    sum += *ind.fitness;
                    ++n;
                }
            row.species.push_back(std::move(summary));
        }
        row.mean_fitness = n ? sum / static_cast<Scalar>(n) : std::numeric_limits<Scalar>::infinity();
        return row;
    }

    template <typename Scalar>
    void refit(Ecosystem<Scalar>& eco)
    {
        for (auto& s : eco.species)
            if (!s.members.empty())
                s.model = estimate_gaussian(std::span<const Individual<Scalar>>(s.members));
    }
} // namespace detail

/// Runs the split test over the live species in id order. Returns the
/// number of splits performed.
template <typename Scalar>
std::size_t divergence_pass(Ecosystem<Scalar>& eco)
{
    std::optional<std::size_t> scheduled;
    if (auto it = eco.params.force_split_schedule.find(eco.generation); it != eco.params.force_split_schedule.end())
        scheduled = it->second;

    std::vector<Species<Scalar>> next;
    std::size_t live = eco.species.size();
    std::size_t splits = 0;
    for (auto& s : eco.species) {
        const bool forced = scheduled && live < *scheduled;
        if (live < eco.params.max_species && (forced || (!scheduled && should_split(s, eco.params, eco.a)))) {
            auto parts = split_species(s, eco.params, live, eco.lineage, forced);
            if (parts.size() == 2) {
                ++live;
                ++splits;
                for (auto& p : parts)
                    next.push_back(std::move(p));
                continue;
            }
        }
        next.push_back(std::move(s));
    }
    eco.species = std::move(next);
    detail::sort_by_id(eco.species);
    return splits;
}

/// Repeatedly merges the closest pair with mean distance <= a' until no pair
/// qualifies. Returns the number of merges.
template <typename Scalar>
std::size_t assimilation_pass(Ecosystem<Scalar>& eco)
{
    std::size_t merges = 0;
    for (;;) {
        std::optional<std::pair<std::size_t, std::size_t>> pick;
        Scalar closest = std::numeric_limits<Scalar>::infinity();
        for (std::size_t i = 0; i < eco.species.size(); ++i)
            for (std::size_t j = i + 1; j < eco.species.size(); ++j) {
                const Scalar eps = mean_distance(eco.species[i], eco.species[j]);
                if (eps <= eco.params.a_prime && eps < closest) {
                    closest = eps;
                    pick = {i, j};
                }
            }
        if (!pick)
            return merges;
        auto merged = merge_species(eco.species[pick->first], eco.species[pick->second], eco.control.population_size,
                                    eco.lineage);
        eco.species.erase(eco.species.begin() + static_cast<std::ptrdiff_t>(pick->second));
        eco.species.erase(eco.species.begin() + static_cast<std::ptrdiff_t>(pick->first));
        eco.species.push_back(std::move(merged));
        detail::sort_by_id(eco.species);
        ++merges;
    }
}

/// Samples and evaluates the first species. Stream 0 of `seed` feeds fitness
/// noise; stream 1 belongs to the first species. When `a` is not fixed it is
/// calibrated from this population.
template <typename Scalar>
Ecosystem<Scalar> ddea_initialize(const ObjectiveSpec<Scalar>& spec, const ControlParams<Scalar>& control,
                                  const DivergenceParams<Scalar>& params, BudgetLedger& ledger, std::uint64_t seed,
                                  std::uint64_t* evaluations = nullptr)
{
    spec.validate();
    control.validate();
    params.validate();
    Lineage lineage(seed);
    auto noise = lineage.streams.next();
    Ecosystem<Scalar> eco{{}, params, control, 0, params.a.value_or(Scalar(1)), std::move(lineage), noise, {}, {}};

    Species<Scalar> first;
    first.id = eco.lineage.new_id();
    first.rng = eco.lineage.streams.next();
    auto pop = init_population(spec, control, first.rng);
    std::uint64_t n = 0;
    for (auto& ind : pop) {
        if (evaluate_individual(ind, spec, ledger, &eco.noise_rng) != EvalStatus::evaluated)
            break;
        detail::track_best(eco.best, ind);
        first.members.push_back(std::move(ind));
        ++n;
    }
    if (evaluations)
        *evaluations = n;
    first.model = estimate_gaussian(std::span<const Individual<Scalar>>(first.members));

    if (!params.a) {
        const auto cal = calibrate_a(first, params.l);
        eco.a = cal.a;
        if (cal.fallback)
            eco.warnings.push_back("no initial member within l of the mean; divergence scale a set to 1");
    }
    eco.species.push_back(std::move(first));
    return eco;
}

/// Evolves every species once: missing members are sampled from the species
/// model, every existing member faces one model-based trial, then models are
/// refitted. Random draws for a species happen before its evaluations.
/// Returns the number of evaluations; stops early when the budget runs out.
template <typename Scalar>
std::uint64_t ddea_evolve(Ecosystem<Scalar>& eco, const ObjectiveSpec<Scalar>& spec, BudgetLedger& ledger)
{
    const auto& c = eco.control;
    std::uint64_t done = 0;
    for (auto& s : eco.species) {
        if (ledger.exhausted())
            break;
        const std::size_t m = s.members.size();
        std::vector<Individual<Scalar>> trials;
        trials.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            auto donor = gaussian_mutate(s.model, c.f_weight, s.rng, eco.params.variance_mode);
            auto trial = crossover(s.members[i].genome, donor, c.crossover_rate, s.rng, c.force_one_gene);
            if (c.clamp)
                trial = spec.init_bounds.clamp(trial);
            trials.push_back({std::move(trial), std::nullopt});
        }
        std::vector<Individual<Scalar>> fresh;
        for (std::size_t i = m; i < c.population_size; ++i) {
            auto g = sample_model(s.model, Scalar(1), s.rng);
            fresh.push_back({c.clamp ? spec.init_bounds.clamp(g) : std::move(g), std::nullopt});
        }

        for (std::size_t i = 0; i < m; ++i) {
            if (evaluate_individual(trials[i], spec, ledger, &eco.noise_rng) != EvalStatus::evaluated)
                break;
            ++done;
            detail::track_best(eco.best, trials[i]);
            if (&select(s.members[i], trials[i]) == &trials[i])
                s.members[i] = std::move(trials[i]);
        }
        for (auto& ind : fresh) {
            if (evaluate_individual(ind, spec, ledger, &eco.noise_rng) != EvalStatus::evaluated)
                break;
            ++done;
            detail::track_best(eco.best, ind);
            s.members.push_back(std::move(ind));
        }
    }
    detail::refit(eco);
    return done;
}

/// Clears every cached fitness and re-evaluates members in species-id order
/// against a (possibly changed) objective. Members the budget cannot cover
/// are dropped, as are species left empty. Returns the evaluations spent.
template <typename Scalar>
std::uint64_t ddea_reevaluate(Ecosystem<Scalar>& eco, const ObjectiveSpec<Scalar>& spec, BudgetLedger& ledger)
{
    std::uint64_t done = 0;
    eco.best = {};
    for (auto& s : eco.species) {
        std::vector<Individual<Scalar>> kept;
        for (auto& ind : s.members) {
            ind.fitness.reset();
            if (evaluate_individual(ind, spec, ledger, &eco.noise_rng) != EvalStatus::evaluated)
                break;
            ++done;
            detail::track_best(eco.best, ind);
            kept.push_back(std::move(ind));
        }
        s.members = std::move(kept);
    }
    std::erase_if(eco.species, [](const auto& s) { return s.members.empty(); });
    detail::refit(eco);
    return done;
}

/// Same contract for a DE population. Unpaid members keep no fitness and the
/// driver must not step until the population is fully evaluated.
template <typename Scalar>
std::uint64_t dea_reevaluate(DeaState<Scalar>& state, const ObjectiveSpec<Scalar>& spec, BudgetLedger& ledger)
{
    std::uint64_t done = 0;
    state.best = {};
    for (auto& ind : state.population)
        ind.fitness.reset();
    for (auto& ind : state.population) {
        if (evaluate_individual(ind, spec, ledger, &state.noise_rng) != EvalStatus::evaluated)
            break;
        ++done;
        detail::track_best(state.best, ind);
    }
    return done;
}

/// Divergence then assimilation, as run between generations.
template <typename Scalar>
void ddea_reorganize(Ecosystem<Scalar>& eco)
{
    divergence_pass(eco);
    assimilation_pass(eco);
}

/// One full DDEA generation after the first: evolve, then reorganize when
/// budget remains. Returns the row describing the evolved generation.
template <typename Scalar>
GenerationRow<Scalar> ddea_step(Ecosystem<Scalar>& eco, const ObjectiveSpec<Scalar>& spec, BudgetLedger& ledger)
{
    std::size_t expected = 0;
    for (const auto& s : eco.species)
        expected += std::max(s.members.size(), eco.control.population_size);
    const std::uint64_t done = ddea_evolve(eco, spec, ledger);
    const bool partial = done < expected;
    ++eco.generation;
    auto row = detail::ecosystem_row(eco, ledger, done, partial);
    if (!partial && !ledger.exhausted())
        ddea_reorganize(eco);
    return row;
}

/// DDEA until the budget runs out.
template <typename Scalar>
RunReport<Scalar> ddea_run(const ObjectiveSpec<Scalar>& spec, const ControlParams<Scalar>& control,
                           const DivergenceParams<Scalar>& params, BudgetLedger& ledger, std::uint64_t seed)
{
    const auto start = std::chrono::steady_clock::now();
    RunReport<Scalar> report;
    report.cap = ledger.cap();

    std::uint64_t init_evals = 0;
    auto eco = ddea_initialize(spec, control, params, ledger, seed, &init_evals);
    report.rows.push_back(detail::ecosystem_row(eco, ledger, init_evals, init_evals < control.population_size));
    if (!ledger.exhausted())
        ddea_reorganize(eco);

    while (!ledger.exhausted()) {
        auto row = ddea_step(eco, spec, ledger);
        if (row.evaluations == 0)
            break;
        report.rows.push_back(std::move(row));
    }

    report.best = eco.best;
    report.evals_used = ledger.used();
    report.divergence_scale = eco.a;
    report.warnings = eco.warnings;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace ddea
