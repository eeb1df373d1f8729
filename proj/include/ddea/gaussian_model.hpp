#pragma once

#include <cmath>
#include <span>

#include <ddea/core.hpp>
#include <ddea/rng.hpp>

namespace ddea {

/// How the donor spread scales with F.
///  - paper:   (1 + 2F) * sigma
///  - derived: sqrt(1 + 2F^2) * sigma, the spread of a + F(b - c) for
///             independent a, b, c drawn from the model
enum class VarianceMode { paper, derived };

/// Diagonal Gaussian summary of a population.
template <typename Scalar = double>
struct GaussianModel {
    Vector<Scalar> mu;
    Vector<Scalar> sigma;

    Eigen::Index dimension() const { return mu.size(); }
};

template <typename Scalar>
Scalar sigma_floor(Scalar mu)
{
    using std::abs;
    using std::max;
    return Scalar(1e-12) * max(Scalar(1), abs(mu));
}

/// Per-gene mean and population (1/n) standard deviation, floored.
template <typename Scalar>
GaussianModel<Scalar> estimate_gaussian(std::span<const Individual<Scalar>> pop)
{
    require(!pop.empty(), "cannot fit a Gaussian to an empty population");
    const auto x = genome_matrix(pop);
    const auto n = static_cast<Scalar>(x.cols());
    GaussianModel<Scalar> model;
    model.mu = x.rowwise().mean();
    model.sigma = ((x.colwise() - model.mu).array().square().rowwise().sum() / n).sqrt().matrix();
    for (Eigen::Index j = 0; j < model.sigma.size(); ++j)
        model.sigma[j] = std::max(model.sigma[j], sigma_floor(model.mu[j]));
    return model;
}

template <typename Scalar>
GaussianModel<Scalar> estimate_gaussian(const std::vector<Individual<Scalar>>& pop)
{
    return estimate_gaussian(std::span<const Individual<Scalar>>(pop));
}

template <typename Scalar>
Scalar spread_multiplier(Scalar f, VarianceMode mode)
{
    using std::sqrt;
    return mode == VarianceMode::paper ? Scalar(1) + Scalar(2) * f : sqrt(Scalar(1) + Scalar(2) * f * f);
}

/// Draws from N(mu, scale * sigma), one normal draw per gene.
template <typename Scalar>
Genome<Scalar> sample_model(const GaussianModel<Scalar>& model, Scalar scale, RngStream& rng)
{
    Genome<Scalar> g(model.dimension());
    for (Eigen::Index j = 0; j < g.size(); ++j)
        g[j] = static_cast<Scalar>(rng.normal(static_cast<double>(model.mu[j]), static_cast<double>(scale * model.sigma[j])));
    return g;
}

/// Model-based donor that stands in for the difference-vector mutation.
template <typename Scalar>
Genome<Scalar> gaussian_mutate(const GaussianModel<Scalar>& model, Scalar f, RngStream& rng,
                               VarianceMode mode = VarianceMode::paper)
{
    return sample_model(model, spread_multiplier(f, mode), rng);
}

} // namespace ddea
