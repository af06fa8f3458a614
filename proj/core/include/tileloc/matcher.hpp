
/* matcher.hpp */

#ifndef TILELOC_MATCHER_HPP
#define TILELOC_MATCHER_HPP

#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <vector>

#include "tileloc/errors.hpp"
#include "tileloc/geometry.hpp"
#include "tileloc/grid_map.hpp"
#include "tileloc/scan_pipeline.hpp"

namespace tileloc {

/* Anything that reads occupancy 0..100 at a global cell */
template <typename Grid>
concept OccupancyGrid = requires(const Grid& grid, std::int64_t c) {
    { grid.value_at_cell(c, c) } -> std::convertible_to<std::uint8_t>;
    { grid.resolution() } -> std::convertible_to<double>;
};

struct MatchParams
{
    /* Weight of measurements on fixed-structure cells; 0 disables the mask */
    double        alpha = 2.0;
    int           n_samples = 500;
    double        sigma_xy = 0.30;
    double        sigma_theta = 0.02;
    double        match_threshold = 0.55;
    std::uint64_t rng_seed = 0;

    /* Throws ContractError on invalid values */
    void validate() const;
};

struct MatchScore
{
    double      score = 0.5;
    std::size_t n_fixed = 0;
    std::size_t n_free = 0;
};

struct MatchResult
{
    Pose2D      pose;
    double      score = 0.5;
    bool        accepted = false;
    std::size_t n_fixed_hits = 0;
    std::size_t n_free_hits = 0;
    /* Index of the winning candidate; 0 is the prior */
    int         sample_index = 0;
};

/* Signed, squared agreement term of one measurement, in [-1, 1] */
inline double occupancy_term(std::uint8_t occupancy)
{
    const double t = static_cast<double>(occupancy) / 50.0 - 1.0;
    return std::abs(t) * t;
}

/*
 * Matching index of the occupancy vector placed at `pose`. Points on cells
 * flagged in the mask are weighted by alpha; all others count as N_a.
 * With alpha == 0 or no mask every point counts as N_a. An empty vector
 * scores the neutral 0.5.
 */
template <OccupancyGrid Grid>
MatchScore matching_index(const std::vector<Point2>& points,
                          const Pose2D& pose, const Grid& grid,
                          const MaskView* mask, double alpha)
{
    MatchScore result;
    if (points.empty())
        return result;

    const bool useMask = mask != nullptr && alpha != 0.0;
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    const double res = grid.resolution();

    double sumFree = 0.0;
    double sumFixed = 0.0;
    for (const auto& p : points) {
        const double gx = pose.x + c * p.x - s * p.y;
        const double gy = pose.y + s * p.x + c * p.y;
        const auto cx = static_cast<std::int64_t>(std::floor(gx / res));
        const auto cy = static_cast<std::int64_t>(std::floor(gy / res));
        const double term = occupancy_term(grid.value_at_cell(cx, cy));
        if (useMask && mask->fixed_at_cell(cx, cy)) {
            sumFixed += term;
            ++result.n_fixed;
        } else {
            sumFree += term;
            ++result.n_free;
        }
    }

    const double na = static_cast<double>(result.n_free);
    const double nb = static_cast<double>(result.n_fixed);
    result.score = 0.5 + (sumFree + alpha * sumFixed) /
                         (2.0 * (na + alpha * nb));
    return result;
}

template <OccupancyGrid Grid>
MatchScore matching_index(const OccupancyVector& vec, const Pose2D& pose,
                          const Grid& grid, const MaskView* mask,
                          double alpha)
{
    return matching_index(vec.points, pose, grid, mask, alpha);
}

/*
 * Candidate poses for search_pose: the prior followed by n_samples draws
 * from independent Gaussians around it, in a fixed order given the seed.
 */
std::vector<Pose2D> sample_candidates(const Pose2D& prior,
                                      const MatchParams& params);

/*
 * Score every candidate and keep the best one; ties go to the lowest
 * sample index, so an uninformative map returns the prior.
 */
template <OccupancyGrid Grid>
MatchResult search_pose(const OccupancyVector& vec, const Pose2D& prior,
                        const Grid& grid, const MaskView* mask,
                        const MatchParams& params)
{
    params.validate();
    const auto candidates = sample_candidates(prior, params);

    MatchResult best;
    bool haveBest = false;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const MatchScore score =
            matching_index(vec.points, candidates[k], grid, mask, params.alpha);
        if (!haveBest || score.score > best.score) {
            best.pose = candidates[k];
            best.score = score.score;
            best.n_fixed_hits = score.n_fixed;
            best.n_free_hits = score.n_free;
            best.sample_index = static_cast<int>(k);
            haveBest = true;
        }
    }
    best.accepted = best.score >= params.match_threshold;
    return best;
}

} /* namespace tileloc */

#endif /* TILELOC_MATCHER_HPP */
