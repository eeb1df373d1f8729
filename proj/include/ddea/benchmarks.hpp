#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <ddea/core.hpp>

namespace ddea {

/// Michalewicz as printed: -sin(x) sin(x^2/pi)^20 + sin(y) sin(y^2/pi)^20.
/// Note the plus sign on the y term and the missing index factor.
template <typename Scalar>
Scalar michalewicz_paper(Scalar x, Scalar y)
{
    using std::pow;
    using std::sin;
    const Scalar pi = std::numbers::pi_v<Scalar>;
    return -sin(x) * pow(sin(x * x / pi), 20) + sin(y) * pow(sin(y * y / pi), 20);
}

/// Standard 2-D Michalewicz with steepness m = 10.
template <typename Scalar>
Scalar michalewicz_std(Scalar x, Scalar y)
{
    using std::pow;
    using std::sin;
    const Scalar pi = std::numbers::pi_v<Scalar>;
    return -(sin(x) * pow(sin(x * x / pi), 20) + sin(y) * pow(sin(Scalar(2) * y * y / pi), 20));
}

template <typename Scalar>
Scalar sphere(const Genome<Scalar>& g)
{
    return g.squaredNorm();
}

template <typename Scalar>
Scalar two_well(Scalar x)
{
    const Scalar s = x * x - Scalar(1);
    return s * s;
}

template <typename Scalar = double>
ObjectiveSpec<Scalar> make_sphere(Eigen::Index dim, Scalar lo = Scalar(-5), Scalar hi = Scalar(5))
{
    return {"sphere", dim, Bounds<Scalar>::uniform(dim, lo, hi), [](const Genome<Scalar>& g) { return sphere(g); }, {}};
}

template <typename Scalar = double>
ObjectiveSpec<Scalar> make_two_well(Scalar lo = Scalar(-2), Scalar hi = Scalar(2))
{
    return {"two_well", 1, Bounds<Scalar>::uniform(1, lo, hi), [](const Genome<Scalar>& g) { return two_well(g[0]); }, {}};
}

template <typename Scalar = double>
ObjectiveSpec<Scalar> make_michalewicz_std(Scalar lo = Scalar(-1), Scalar hi = Scalar(1))
{
    return {"michalewicz_std", 2, Bounds<Scalar>::uniform(2, lo, hi),
            [](const Genome<Scalar>& g) { return michalewicz_std(g[0], g[1]); }, {}};
}

template <typename Scalar = double>
ObjectiveSpec<Scalar> make_michalewicz_paper(Scalar lo = Scalar(-1), Scalar hi = Scalar(1))
{
    return {"michalewicz_paper", 2, Bounds<Scalar>::uniform(2, lo, hi),
            [](const Genome<Scalar>& g) { return michalewicz_paper(g[0], g[1]); }, {}};
}

} // namespace ddea
