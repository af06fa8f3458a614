
/* test_map_builder.cpp */

#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tileloc/errors.hpp"
#include "tileloc/map_builder.hpp"
#include "tileloc/sim_world.hpp"
#include "oracles.hpp"

using namespace tileloc;

namespace {

const GridGeometry kGeometry { 30.0, 0.1 };

MatchParams frame_params()
{
    MatchParams p;
    p.alpha = 0.0;
    p.sigma_xy = 0.1;
    p.sigma_theta = 0.01;
    p.n_samples = 500;
    p.match_threshold = 0.0;
    return p;
}

OccupancyVector wall_scan()
{
    OccupancyVector vec;
    vec.points.push_back({ 2.0, 0.0 });
    vec.points.push_back({ 0.0, 1.5 });
    return vec;
}

/* Box room with a pillar; scans rendered without noise */
struct RoomFixture
{
    WorldModel  world;
    SensorSpec  sensor;
    DayScenario empty;

    RoomFixture()
    {
        const auto wall = [](Point2 c, double l, double w) {
            Obstacle o;
            o.center = c;
            o.length = l;
            o.width = w;
            o.z_lo = 0.0;
            o.z_hi = 4.0;
            o.fixed = true;
            return o;
        };
        world.obstacles = { wall({ 10, 10 }, 30, 0.5), wall({ 10, -10 }, 30, 0.5),
                            wall({ -5, 0 }, 0.5, 20), wall({ 25, 0 }, 0.5, 20) };
        Obstacle pillar;
        pillar.kind = ShapeKind::Circle;
        pillar.center = { 12, 4 };
        pillar.radius = 0.4;
        pillar.z_hi = 4.0;
        pillar.fixed = true;
        world.obstacles.push_back(pillar);
        sensor.elevations_deg = { 0.0 };
        sensor.azimuth_step_deg = 0.5;
        sensor.max_range = 40.0;
        sensor.range_sigma = 0.0;
    }

    OccupancyVector scan_at(const Pose2D& pose) const
    {
        std::mt19937_64 rng(1);
        const auto cloud = raycast_scan(world, empty, sensor, pose, rng);
        return build_occupancy_vector({ 0.0, cloud }, sensor.extrinsic,
                                      HeightBand { 1.0, 3.0 }, PoseCovariance::Zero());
    }
};

void fill_buffer(FrameBuffer& buffer, const std::vector<Point2>& matched,
                 const std::vector<Point2>& gps, const std::vector<double>& variance)
{
    for (std::size_t k = 0; k < matched.size(); ++k) {
        FrameEntry e;
        e.matched_pose = { matched[k].x, matched[k].y, 0.1 * static_cast<double>(k) };
        e.fused_pose = e.matched_pose;
        e.gps_position = gps[k];
        e.gps_variance = variance[k];
        e.stamp = static_cast<double>(k);
        buffer.push(e);
    }
}

} /* namespace */

TEST(MapBuilder, FirstFrameTakesFusedPose)
{
    FrameBuffer buffer;
    const Stamped<Pose2D> fused { 1.0, { 3, 4, 0.5 } };
    integrate_frame(buffer, wall_scan(), fused, { 3, 4 }, 0.01, frame_params(), 0.1);
    ASSERT_EQ(buffer.size(), 1u);
    EXPECT_EQ(buffer.entries()[0].matched_pose, fused.value);
    EXPECT_EQ(buffer.entries()[0].raster.count(CellState::Occupied), 2u);
}

TEST(MapBuilder, NoiselessDriveRecoversDisplacement)
{
    const RoomFixture room;
    const Pose2D first { 5, 0, 0 };
    const Pose2D second { 6.5, 0.2, 0.05 };
    FrameBuffer buffer;
    integrate_frame(buffer, room.scan_at(first), { 0.0, first }, { 5, 0 }, 1e-4,
                    frame_params(), 0.1);
    /* Fused pose of the second frame is off by 15 cm */
    const Pose2D fused { second.x + 0.12, second.y - 0.09, second.theta };
    integrate_frame(buffer, room.scan_at(second), { 0.5, fused }, { 6.5, 0.2 }, 1e-4,
                    frame_params(), 0.1);
    const Pose2D got = buffer.entries()[1].matched_pose;
    EXPECT_LT(std::hypot(got.x - second.x, got.y - second.y), 0.1);
}

TEST(MapBuilder, FullBufferIsContractError)
{
    FrameBuffer buffer;
    for (std::size_t k = 0; k < FrameBuffer::kCapacity; ++k)
        integrate_frame(buffer, OccupancyVector {}, { static_cast<double>(k), {} }, {}, 1.0,
                        frame_params(), 0.1);
    EXPECT_TRUE(buffer.full());
    EXPECT_THROW(integrate_frame(buffer, OccupancyVector {}, { 99.0, {} }, {}, 1.0,
                                 frame_params(), 0.1),
                 ContractError);
}

TEST(GeoPosition, IdenticalPathsGiveIdentity)
{
    FrameBuffer buffer;
    const std::vector<Point2> path { { 0, 0 }, { 3, 1 }, { 6, 1.5 }, { 9, 3 } };
    fill_buffer(buffer, path, path, { 1, 2, 3, 4 });
    const auto out = geo_position_buffer(buffer);
    for (std::size_t k = 0; k < path.size(); ++k) {
        EXPECT_NEAR(out[k].x, buffer.entries()[k].matched_pose.x, 1e-12);
        EXPECT_NEAR(out[k].y, buffer.entries()[k].matched_pose.y, 1e-12);
        EXPECT_NEAR(out[k].theta, buffer.entries()[k].matched_pose.theta, 1e-12);
    }
}

TEST(GeoPosition, PureTranslation)
{
    FrameBuffer buffer;
    const std::vector<Point2> path { { 0, 0 }, { 3, 1 }, { 6, 1.5 }, { 9, 3 } };
    std::vector<Point2> gps;
    for (const auto& p : path)
        gps.push_back({ p.x + 5, p.y - 2 });
    fill_buffer(buffer, path, gps, { 0.5, 0.01, 2.0, 0.1 });
    const auto out = geo_position_buffer(buffer);
    for (std::size_t k = 0; k < path.size(); ++k) {
        EXPECT_NEAR(out[k].x, path[k].x + 5, 1e-9);
        EXPECT_NEAR(out[k].y, path[k].y - 2, 1e-9);
    }
}

TEST(GeoPosition, RotationMatchesBruteForce)
{
    const std::vector<Point2> path { { 0, 0 }, { 4, 0.5 }, { 8, 2 }, { 11, 5 }, { 13, 9 } };
    const std::vector<double> variance { 0.01, 0.2, 0.05, 1.0, 0.02 };
    std::vector<double> w;
    for (double v : variance)
        w.push_back(1.0 / v);
    const Point2 c = oracle::centroid(path, w);
    const oracle::PivotTransform truth { 10.0 * std::numbers::pi / 180.0, { 0, 0 } };
    std::vector<Point2> gps;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 0.05);
    for (const auto& p : path) {
        const Point2 q = oracle::apply(truth, c, p);
        gps.push_back({ q.x + n(rng), q.y + n(rng) });
    }

    FrameBuffer buffer;
    fill_buffer(buffer, path, gps, variance);
    const RigidTransform2D fit = geo_position_transform(buffer);
    const oracle::PivotTransform best = oracle::grid_search(path, gps, w, 3.0, 0.5);

    EXPECT_NEAR(wrap_angle(fit.rotation - best.theta), 0.0, 1e-3);
    const auto out = geo_position_buffer(buffer);
    for (std::size_t k = 0; k < path.size(); ++k) {
        const Point2 o = oracle::apply(best, c, path[k]);
        EXPECT_NEAR(out[k].x, o.x, 2e-3);
        EXPECT_NEAR(out[k].y, o.y, 2e-3);
    }
    EXPECT_LE(registration_energy(fit, path, gps, w),
              oracle::energy(best, c, path, gps, w) + 1e-9);
}

TEST(GeoPosition, NeedsTwoFrames)
{
    FrameBuffer buffer;
    fill_buffer(buffer, { { 0, 0 } }, { { 0, 0 } }, { 1.0 });
    EXPECT_THROW(geo_position_buffer(buffer), ContractError);
}

TEST(GeoPosition, CoincidentSourceAlignsCentroids)
{
    const std::vector<Point2> src { { 1, 1 }, { 1, 1 } };
    const std::vector<Point2> dst { { 2, 0 }, { 4, 2 } };
    const std::vector<double> w { 1.0, 3.0 };
    const RigidTransform2D t = fit_rigid_weighted(src, dst, w);
    EXPECT_EQ(t.rotation, 0.0);
    const Point2 moved = t.apply(Point2 { 1, 1 });
    EXPECT_NEAR(moved.x, 3.5, 1e-12);
    EXPECT_NEAR(moved.y, 1.5, 1e-12);
}

TEST(Flush, SingleFrameOnEmptyMap)
{
    TileStore store({}, kGeometry);
    FrameBuffer buffer;
    integrate_frame(buffer, wall_scan(), { 0.0, { 0.05, 0.05, 0 } }, {}, 1.0,
                    frame_params(), 0.1);
    const std::vector<Pose2D> poses { buffer.entries()[0].matched_pose };
    EXPECT_EQ(flush_buffer_to_tiles(buffer, poses, store, UpdatePolicy {}), 1u);
    EXPECT_EQ(store.value_at({ 20, 0 }), 56);
    EXPECT_EQ(store.value_at({ 0, 15 }), 56);
    EXPECT_EQ(store.value_at({ 10, 0 }), 44);
    EXPECT_EQ(store.value_at({ 0, 0 }), 50);
    EXPECT_TRUE(buffer.empty());
    ASSERT_TRUE(buffer.anchor().has_value());
}

TEST(Flush, RepeatedFlushSaturates)
{
    for (int k = 1; k <= 12; ++k) {
        TileStore store({}, kGeometry);
        for (int pass = 0; pass < k; ++pass) {
            FrameBuffer buffer;
            integrate_frame(buffer, wall_scan(), { 0.0, { 0.05, 0.05, 0 } }, {}, 1.0,
                            frame_params(), 0.1);
            const std::vector<Pose2D> poses { buffer.entries()[0].matched_pose };
            flush_buffer_to_tiles(buffer, poses, store, UpdatePolicy {});
        }
        EXPECT_EQ(store.value_at({ 20, 0 }), std::min(50 + 6 * k, 100)) << k;
        EXPECT_EQ(store.value_at({ 10, 0 }), std::max(50 - 6 * k, 0)) << k;
    }
}

TEST(Flush, PoseCountMismatch)
{
    TileStore store({}, kGeometry);
    FrameBuffer buffer;
    integrate_frame(buffer, wall_scan(), { 0.0, {} }, {}, 1.0, frame_params(), 0.1);
    EXPECT_THROW(flush_buffer_to_tiles(buffer, {}, store, UpdatePolicy {}), ContractError);
}

TEST(MapBuilder, FlushesWhenBufferFills)
{
    const RoomFixture room;
    TileStore store({}, kGeometry);
    MapBuilder builder(store, frame_params(), UpdatePolicy {});
    for (int k = 0; k < 45; ++k) {
        const Pose2D p { 0.0 + 0.4 * k, 0.0, 0.0 };
        builder.add_frame(room.scan_at(p), { 0.2 * k, p }, { p.x, p.y }, 1e-4);
    }
    EXPECT_EQ(builder.frames_added(), 45u);
    EXPECT_EQ(builder.flushes(), 2u);
    builder.finish();
    EXPECT_EQ(builder.flushes(), 3u);
    EXPECT_TRUE(builder.buffer().empty());
    /* The north wall face has been observed many times */
    EXPECT_EQ(store.value_at(world_to_cell(10.0, 9.75, 0.1)), 100);
    EXPECT_EQ(store.value_at(world_to_cell(10.0, 5.0, 0.1)), 0);
}
