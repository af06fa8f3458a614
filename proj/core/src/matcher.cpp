
/* matcher.cpp */

#include "tileloc/matcher.hpp"

namespace tileloc {

void MatchParams::validate() const
{
    if (this->n_samples < 1)
        throw ContractError("match n_samples must be at least 1");
    if (!(this->sigma_xy > 0.0) || !(this->sigma_theta > 0.0))
        throw ContractError("match sigmas must be positive");
    if (!(this->alpha >= 0.0) || !std::isfinite(this->alpha))
        throw ContractError("match alpha must be finite and non-negative");
    if (!(this->match_threshold >= 0.0 && this->match_threshold <= 1.0))
        throw ContractError("match threshold must lie in [0, 1]");
}

std::vector<Pose2D> sample_candidates(const Pose2D& prior,
                                      const MatchParams& params)
{
    std::mt19937_64 rng(params.rng_seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    std::vector<Pose2D> candidates;
    candidates.reserve(static_cast<std::size_t>(params.n_samples) + 1);
    candidates.push_back(prior);
    for (int k = 0; k < params.n_samples; ++k) {
        /* Draw order fixed: x, y, theta */
        const double dx = unit(rng) * params.sigma_xy;
        const double dy = unit(rng) * params.sigma_xy;
        const double dtheta = unit(rng) * params.sigma_theta;
        candidates.emplace_back(prior.x + dx, prior.y + dy,
                                prior.theta + dtheta);
    }
    return candidates;
}

} /* namespace tileloc */
