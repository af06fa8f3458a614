
/* oracles.hpp */

#ifndef TILELOC_TESTS_ORACLES_HPP
#define TILELOC_TESTS_ORACLES_HPP

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "tileloc/geometry.hpp"

namespace oracle {

/* Rigid motion parametrized as a rotation about a pivot plus a shift */
struct PivotTransform
{
    double         theta = 0.0;
    tileloc::Point2 shift;
};

inline tileloc::Point2 apply(const PivotTransform& t, const tileloc::Point2& pivot,
                             const tileloc::Point2& p)
{
    const double c = std::cos(t.theta);
    const double s = std::sin(t.theta);
    const double dx = p.x - pivot.x;
    const double dy = p.y - pivot.y;
    return { pivot.x + c * dx - s * dy + t.shift.x,
             pivot.y + s * dx + c * dy + t.shift.y };
}

inline double energy(const PivotTransform& t, const tileloc::Point2& pivot,
                     std::span<const tileloc::Point2> source,
                     std::span<const tileloc::Point2> target,
                     std::span<const double> weights)
{
    double e = 0.0;
    for (std::size_t k = 0; k < source.size(); ++k) {
        const tileloc::Point2 m = apply(t, pivot, source[k]);
        e += weights[k] * ((m.x - target[k].x) * (m.x - target[k].x) +
                           (m.y - target[k].y) * (m.y - target[k].y));
    }
    return e;
}

/* Pivot of grid_search for the same source points and weights */
inline tileloc::Point2 centroid(std::span<const tileloc::Point2> source,
                                std::span<const double> weights)
{
    tileloc::Point2 c;
    double total = 0.0;
    for (std::size_t k = 0; k < source.size(); ++k) {
        c.x += weights[k] * source[k].x;
        c.y += weights[k] * source[k].y;
        total += weights[k];
    }
    c.x /= total;
    c.y /= total;
    return c;
}

/*
 * Exhaustive grid search of the weighted spring energy over rotation and
 * shift, refined four times by a factor of ten around the best node. The
 * pivot is the weighted source centroid, which decouples rotation from
 * shift in the energy.
 */
inline PivotTransform grid_search(std::span<const tileloc::Point2> source,
                                  std::span<const tileloc::Point2> target,
                                  std::span<const double> weights,
                                  double shift_range, double theta_range)
{
    const tileloc::Point2 pivot = centroid(source, weights);

    PivotTransform best;
    double bestEnergy = energy(best, pivot, source, target, weights);
    double stepT = 0.25;
    double stepA = 0.01;
    int reachT = static_cast<int>(std::ceil(shift_range / stepT));
    int reachA = static_cast<int>(std::ceil(theta_range / stepA));
    for (int level = 0; level < 5; ++level) {
        const PivotTransform center = best;
        for (int a = -reachA; a <= reachA; ++a) {
            for (int i = -reachT; i <= reachT; ++i) {
                for (int j = -reachT; j <= reachT; ++j) {
                    const PivotTransform t { center.theta + a * stepA,
                                             { center.shift.x + i * stepT,
                                               center.shift.y + j * stepT } };
                    const double e = energy(t, pivot, source, target, weights);
                    if (e < bestEnergy) {
                        bestEnergy = e;
                        best = t;
                    }
                }
            }
        }
        stepT /= 10.0;
        stepA /= 10.0;
        reachT = 6;
        reachA = 6;
    }
    return best;
}

inline tileloc::Pose2D arc(double v, double omega, double t)
{
    if (omega == 0.0)
        return { v * t, 0.0, 0.0 };
    const double r = v / omega;
    return { r * std::sin(omega * t), r * (1.0 - std::cos(omega * t)), omega * t };
}

} /* namespace oracle */

#endif /* TILELOC_TESTS_ORACLES_HPP */
