
/* test_matcher.cpp */

#include <map>
#include <random>

#include <gtest/gtest.h>

#include "tileloc/map_updater.hpp"
#include "tileloc/matcher.hpp"

using namespace tileloc;

namespace {

/* Sparse grid: unset cells read unknown */
struct SparseGrid
{
    double res = 0.1;
    std::map<std::pair<std::int64_t, std::int64_t>, std::uint8_t> cells;

    std::uint8_t value_at_cell(std::int64_t cx, std::int64_t cy) const
    {
        const auto it = cells.find({ cx, cy });
        return it == cells.end() ? kUnknownValue : it->second;
    }
    double resolution() const { return res; }
    void set(double x, double y, std::uint8_t v)
    {
        const CellIndex c = world_to_cell(x, y, res);
        cells[{ c.x, c.y }] = v;
    }
};

/* Independent scalar evaluation of the matching index */
double scalar_index(const std::vector<Point2>& pts, const Pose2D& pose,
                    const SparseGrid& grid, const MapMask* mask, double alpha)
{
    double a = 0.0, b = 0.0;
    double na = 0.0, nb = 0.0;
    for (const auto& p : pts) {
        const Point2 g = transform_point(pose, p);
        const CellIndex c = world_to_cell(g.x, g.y, grid.res);
        const double occ = grid.value_at_cell(c.x, c.y);
        double term;
        if (occ >= 50.0)
            term = ((occ - 50.0) / 50.0) * ((occ - 50.0) / 50.0);
        else
            term = -((50.0 - occ) / 50.0) * ((50.0 - occ) / 50.0);
        if (mask != nullptr && alpha != 0.0 && mask->fixed_at_cell(c)) {
            b += term;
            nb += 1.0;
        } else {
            a += term;
            na += 1.0;
        }
    }
    if (na + nb == 0.0)
        return 0.5;
    return 0.5 + (a + alpha * b) / (2.0 * (na + alpha * nb));
}

std::vector<Point2> ten_points()
{
    std::vector<Point2> pts;
    for (int k = 0; k < 10; ++k)
        pts.push_back({ 1.05 + k * 0.3, 2.05 });
    return pts;
}

/* Walls of a 12 x 9 m room around the origin, seen from inside */
OccupancyVector room_scan()
{
    OccupancyVector vec;
    for (double t = -6.0; t <= 6.0; t += 0.05) {
        vec.points.push_back({ t, 4.5 });
        vec.points.push_back({ t, -4.5 });
    }
    for (double t = -4.5; t <= 4.5; t += 0.05) {
        vec.points.push_back({ 6.0, t });
        vec.points.push_back({ -6.0, t });
    }
    /* A pillar to break symmetry */
    for (double t = 0.0; t < 6.28; t += 0.1)
        vec.points.push_back({ 2.0 + 0.3 * std::cos(t), 1.0 + 0.3 * std::sin(t) });
    return vec;
}

} /* namespace */

TEST(Matcher, OccupancyTermValues)
{
    EXPECT_DOUBLE_EQ(occupancy_term(100), 1.0);
    EXPECT_DOUBLE_EQ(occupancy_term(0), -1.0);
    EXPECT_DOUBLE_EQ(occupancy_term(50), 0.0);
    EXPECT_DOUBLE_EQ(occupancy_term(75), 0.25);
    EXPECT_DOUBLE_EQ(occupancy_term(25), -0.25);
}

TEST(Matcher, AllOccupiedScoresOne)
{
    SparseGrid grid;
    const auto pts = ten_points();
    for (const auto& p : pts)
        grid.set(p.x, p.y, 100);
    const MatchScore s = matching_index(pts, Pose2D {}, grid, nullptr, 2.0);
    EXPECT_NEAR(s.score, 1.0, 1e-12);
    EXPECT_EQ(s.n_free, 10u);
    EXPECT_EQ(s.n_fixed, 0u);
}

TEST(Matcher, AllFreeScoresZeroAndUnknownHalf)
{
    SparseGrid grid;
    const auto pts = ten_points();
    EXPECT_NEAR(matching_index(pts, Pose2D {}, grid, nullptr, 2.0).score, 0.5, 1e-12);
    for (const auto& p : pts)
        grid.set(p.x, p.y, 0);
    EXPECT_NEAR(matching_index(pts, Pose2D {}, grid, nullptr, 2.0).score, 0.0, 1e-12);
}

TEST(Matcher, MixedWeightedFixture)
{
    SparseGrid grid;
    MapMask mask({ 30.0, 0.1 });
    grid.set(0.05, 0.05, 100);
    grid.set(1.05, 0.05, 0);
    grid.set(2.05, 0.05, 100);
    mask.set_fixed(world_to_cell(2.05, 0.05, 0.1), true);
    const MaskView view(mask, TileRect { -1, -1, 1, 1 });
    const std::vector<Point2> pts { { 0.05, 0.05 }, { 1.05, 0.05 }, { 2.05, 0.05 } };
    const MatchScore s = matching_index(pts, Pose2D {}, grid, &view, 2.0);
    EXPECT_NEAR(s.score, 0.75, 1e-12);
    EXPECT_EQ(s.n_free, 2u);
    EXPECT_EQ(s.n_fixed, 1u);
    EXPECT_NEAR(s.score, scalar_index(pts, Pose2D {}, grid, &mask, 2.0), 1e-12);
    /* Without the mask every point counts alike */
    EXPECT_NEAR(matching_index(pts, Pose2D {}, grid, nullptr, 2.0).score,
                0.5 + 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(matching_index(pts, Pose2D {}, grid, &view, 0.0).score,
                0.5 + 1.0 / 6.0, 1e-12);
}

TEST(Matcher, EmptyVectorIsNeutral)
{
    SparseGrid grid;
    EXPECT_EQ(matching_index(std::vector<Point2> {}, Pose2D {}, grid, nullptr, 2.0).score, 0.5);
}

TEST(Matcher, RandomFixturesAgreeWithScalarOracle)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> ang(-3.14, 3.14);
    std::uniform_int_distribution<int> val(0, 100);
    std::bernoulli_distribution fixed(0.3);
    const GridGeometry geom { 30.0, 0.1 };
    for (int trial = 0; trial < 200; ++trial) {
        SparseGrid grid;
        MapMask mask(geom);
        for (std::int64_t cx = -60; cx < 60; ++cx) {
            for (std::int64_t cy = -60; cy < 60; ++cy) {
                grid.cells[{ cx, cy }] = static_cast<std::uint8_t>(val(rng));
                if (fixed(rng))
                    mask.set_fixed({ cx, cy }, true);
            }
        }
        const MaskView view(mask, TileRect { -1, -1, 0, 0 });
        std::vector<Point2> pts(40);
        for (auto& p : pts)
            p = { pos(rng), pos(rng) };
        const Pose2D pose { pos(rng) * 0.3, pos(rng) * 0.3, ang(rng) };
        const double alpha = trial % 3 == 0 ? 0.0 : 1.0 + trial * 0.05;
        const MatchScore s = matching_index(pts, pose, grid, &view, alpha);
        EXPECT_NEAR(s.score, scalar_index(pts, pose, grid, &mask, alpha), 1e-12);
        EXPECT_GE(s.score, 0.0);
        EXPECT_LE(s.score, 1.0);
        EXPECT_EQ(s.n_fixed + s.n_free, pts.size());
    }
}

TEST(Matcher, CandidatesStartWithPriorAndAreDeterministic)
{
    MatchParams params;
    params.rng_seed = 99;
    const Pose2D prior { 1, 2, 0.5 };
    const auto a = sample_candidates(prior, params);
    const auto b = sample_candidates(prior, params);
    ASSERT_EQ(a.size(), static_cast<std::size_t>(params.n_samples) + 1);
    EXPECT_EQ(a[0], prior);
    EXPECT_EQ(a, b);
    params.rng_seed = 100;
    EXPECT_NE(sample_candidates(prior, params), a);
}

TEST(Matcher, FlatMapReturnsPrior)
{
    SparseGrid grid;
    const OccupancyVector vec = room_scan();
    MatchParams params;
    const Pose2D prior { 3, 4, 0.2 };
    const MatchResult r = search_pose(vec, prior, grid, nullptr, params);
    EXPECT_EQ(r.pose, prior);
    EXPECT_EQ(r.sample_index, 0);
    EXPECT_EQ(r.score, 0.5);
    EXPECT_FALSE(r.accepted);
    params.match_threshold = 0.5;
    EXPECT_TRUE(search_pose(vec, prior, grid, nullptr, params).accepted);
}

TEST(Matcher, ExactImprintAtPrior)
{
    const OccupancyVector vec = room_scan();
    const Pose2D truth { 10.0, 5.0, 0.3 };
    const FrameRaster imprint = rasterize_frame(vec, truth, 0.1);
    MatchParams params;
    params.rng_seed = 5;
    const MatchResult r = search_pose(vec, truth, imprint, nullptr, params);
    EXPECT_GE(r.score, 0.95);
    EXPECT_LT(std::hypot(r.pose.x - truth.x, r.pose.y - truth.y), 3 * params.sigma_xy);

    /* Exhaustive search over three sigmas: nothing beats the imprint pose */
    const double atTruth = matching_index(vec, truth, imprint, nullptr, 0.0).score;
    double best = 0.0;
    for (double dx = -0.9; dx <= 0.9 + 1e-9; dx += 0.05)
        for (double dy = -0.9; dy <= 0.9 + 1e-9; dy += 0.05)
            for (double dt = -0.06; dt <= 0.06 + 1e-9; dt += 0.01)
                best = std::max(best, matching_index(vec, Pose2D { truth.x + dx, truth.y + dy,
                                                     truth.theta + dt }, imprint, nullptr, 0.0).score);
    EXPECT_NEAR(atTruth, 1.0, 1e-12);
    EXPECT_LE(best, atTruth);
    EXPECT_LE(r.score, atTruth);
}

TEST(Matcher, OffsetPriorMovesTowardImprint)
{
    const OccupancyVector vec = room_scan();
    const Pose2D truth { 10.0, 5.0, 0.3 };
    const FrameRaster imprint = rasterize_frame(vec, truth, 0.1);
    MatchParams params;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        params.rng_seed = seed;
        const Pose2D prior { truth.x + 0.5 * std::cos(seed), truth.y + 0.5 * std::sin(seed),
                             truth.theta };
        const double priorScore = matching_index(vec, prior, imprint, nullptr, 0.0).score;
        const MatchResult r = search_pose(vec, prior, imprint, nullptr, params);
        EXPECT_LT(std::hypot(r.pose.x - truth.x, r.pose.y - truth.y), 0.5) << seed;
        EXPECT_GT(r.score, priorScore) << seed;
    }
}

TEST(Matcher, InvalidParams)
{
    SparseGrid grid;
    MatchParams p;
    p.n_samples = 0;
    EXPECT_THROW(p.validate(), ContractError);
    p = {};
    p.sigma_xy = 0.0;
    EXPECT_THROW(search_pose(room_scan(), Pose2D {}, grid, nullptr, p), ContractError);
    p = {};
    p.match_threshold = 1.5;
    EXPECT_THROW(p.validate(), ContractError);
    p = {};
    p.alpha = -1.0;
    EXPECT_THROW(p.validate(), ContractError);
}
