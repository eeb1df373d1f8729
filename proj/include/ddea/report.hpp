#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <ddea/core.hpp>

namespace ddea {

template <typename Scalar = double>
struct SpeciesSummary {
    std::uint64_t id = 0;
    std::size_t members = 0;
    Vector<Scalar> mu;
    Vector<Scalar> sigma;
    Scalar best_fitness{};
};

/// One row per generation; a trailing partial generation gets its own row.
template <typename Scalar = double>
struct GenerationRow {
    std::uint64_t generation = 0;
    std::uint64_t evals_used = 0;
    /// Fresh evaluations performed by this generation, tallied by the driver.
    std::uint64_t evaluations = 0;
    std::size_t species_count = 1;
    Scalar best_fitness{};
    Scalar mean_fitness{};
    bool partial = false;
    std::vector<SpeciesSummary<Scalar>> species;
};

template <typename Scalar = double>
struct RunReport {
    std::vector<GenerationRow<Scalar>> rows;
    Individual<Scalar> best;
    std::uint64_t evals_used = 0;
    std::uint64_t cap = 0;
    /// Auto-calibrated divergence scale; zero for DEA.
    Scalar divergence_scale{};
    std::vector<std::string> warnings;
    double wall_time_s = 0.0;
};

} // namespace ddea
