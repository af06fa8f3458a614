
/* test_map_updater.cpp */

#include <cstdlib>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "tileloc/errors.hpp"
#include "tileloc/map_updater.hpp"

using namespace tileloc;

namespace {

const GridGeometry kGeometry { 30.0, 0.1 };

UpdatePolicy policy_of(UpdateMode mode)
{
    UpdatePolicy p;
    p.mode = mode;
    return p;
}

/* One-cell raster at a global cell */
FrameRaster single_cell(CellIndex c, CellState state)
{
    FrameRaster r(c, 1, 1, 0.1);
    r.set_state(c.x, c.y, state);
    return r;
}

std::uint8_t updated_value(std::uint8_t start, CellState state, UpdateMode mode,
                           const MapMask* mask = nullptr)
{
    TileStore store({}, kGeometry);
    store.tile({ 0, 0 }).set(5, 5, start);
    apply_update(single_cell({ 5, 5 }, state), store, mask, policy_of(mode));
    return store.tile({ 0, 0 }).at(5, 5);
}

} /* namespace */

TEST(MapUpdater, DeltaRuleTable)
{
    EXPECT_EQ(updated_value(50, CellState::Occupied, UpdateMode::UpdateAll), 56);
    EXPECT_EQ(updated_value(3, CellState::Free, UpdateMode::UpdateAll), 0);
    EXPECT_EQ(updated_value(98, CellState::Occupied, UpdateMode::UpdateAll), 100);
    EXPECT_EQ(updated_value(50, CellState::Free, UpdateMode::UpdateAll), 44);
    EXPECT_EQ(updated_value(100, CellState::Occupied, UpdateMode::UpdateAll), 100);
}

TEST(MapUpdater, MaskedCellUntouched)
{
    MapMask mask(kGeometry);
    mask.set_fixed({ 5, 5 }, true);
    EXPECT_EQ(updated_value(100, CellState::Free, UpdateMode::UpdateMasked, &mask), 100);
    EXPECT_EQ(updated_value(100, CellState::Free, UpdateMode::UpdateAll, &mask), 94);
    MapMask other(kGeometry);
    other.set_fixed({ 6, 5 }, true);
    EXPECT_EQ(updated_value(100, CellState::Free, UpdateMode::UpdateMasked, &other), 94);
}

TEST(MapUpdater, PolicyPreconditions)
{
    TileStore store({}, kGeometry);
    const FrameRaster r = single_cell({ 0, 0 }, CellState::Free);
    EXPECT_THROW(apply_update(r, store, nullptr, policy_of(UpdateMode::Frozen)), ContractError);
    EXPECT_THROW(apply_update(r, store, nullptr, policy_of(UpdateMode::UpdateMasked)),
                 ContractError);
    UpdatePolicy bad;
    bad.delta = 0;
    EXPECT_THROW(apply_update(r, store, nullptr, bad), ContractError);
    const FrameRaster coarse({ 0, 0 }, 1, 1, 0.2);
    EXPECT_THROW(apply_update(coarse, store, nullptr, UpdatePolicy {}), ContractError);
}

TEST(MapUpdater, ChangedTilesAndCount)
{
    TileStore store({}, kGeometry);
    FrameRaster r({ 298, 0 }, 4, 1, 0.1);
    r.set_state(298, 0, CellState::Free);
    r.set_state(299, 0, CellState::Free);
    r.set_state(300, 0, CellState::Occupied);
    std::vector<TileIndex> changed;
    EXPECT_EQ(apply_update(r, store, nullptr, UpdatePolicy {}, &changed), 3u);
    const std::set<TileIndex> got(changed.begin(), changed.end());
    EXPECT_EQ(got, (std::set<TileIndex> { { 0, 0 }, { 1, 0 } }));
    EXPECT_TRUE(store.tile({ 0, 0 }).dirty());
    EXPECT_EQ(store.tile({ 1, 0 }).at(0, 0), 56);
    EXPECT_EQ(store.tile({ 0, 0 }).at(299, 0), 44);
}

TEST(MapUpdater, UnknownOnlyRasterLoadsNothing)
{
    TileStore store({}, kGeometry);
    const FrameRaster r({ 0, 0 }, 10, 10, 0.1);
    EXPECT_EQ(apply_update(r, store, nullptr, UpdatePolicy {}), 0u);
    EXPECT_EQ(store.loaded_count(), 0u);
}

TEST(MapUpdater, MaskedCellsBitIdenticalUnderRandomUpdates)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> val(0, 100);
    std::uniform_int_distribution<int> state(0, 2);
    std::uniform_int_distribution<int> delta(1, 100);
    std::bernoulli_distribution fixed(0.3);
    constexpr int kW = 8;
    TileStore store({}, kGeometry);
    MapMask mask(kGeometry);
    std::vector<std::uint8_t> before;
    for (int y = 0; y < kW; ++y) {
        for (int x = 0; x < kW; ++x) {
            const CellIndex c { 296 + x, 296 + y };
            const TileIndex t = cell_to_tile(c, 300);
            const auto v = static_cast<std::uint8_t>(val(rng));
            store.tile(t).set(static_cast<int>(c.x - t.i * 300), static_cast<int>(c.y - t.j * 300), v);
            mask.set_fixed(c, fixed(rng));
            before.push_back(v);
        }
    }
    for (int seq = 0; seq < 10000; ++seq) {
        FrameRaster r({ 296, 296 }, kW, kW, 0.1);
        for (int y = 0; y < kW; ++y)
            for (int x = 0; x < kW; ++x)
                r.set_state(296 + x, 296 + y, static_cast<CellState>(state(rng)));
        UpdatePolicy p = policy_of(UpdateMode::UpdateMasked);
        p.delta = delta(rng);
        apply_update(r, store, &mask, p);
    }
    for (int y = 0; y < kW; ++y) {
        for (int x = 0; x < kW; ++x) {
            const CellIndex c { 296 + x, 296 + y };
            const std::uint8_t v = store.value_at(c);
            EXPECT_LE(v, 100);
            if (mask.fixed_at_cell(c)) {
                EXPECT_EQ(v, before[static_cast<std::size_t>(y * kW + x)]);
            }
        }
    }
}

TEST(MapUpdater, ValuesStayInRange)
{
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> state(0, 2);
    TileStore store({}, kGeometry);
    for (int k = 0; k < 500; ++k) {
        FrameRaster r({ 0, 0 }, 5, 5, 0.1);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x)
                r.set_state(x, y, static_cast<CellState>(state(rng)));
        apply_update(r, store, nullptr, UpdatePolicy {});
        for (auto v : store.tile({ 0, 0 }).cells())
            ASSERT_LE(v, 100);
    }
}

TEST(MapUpdater, ShouldUpdateTriggers)
{
    const UpdatePolicy p;
    EXPECT_TRUE(should_update(5.0, 0.0, p));
    EXPECT_FALSE(should_update(0.0, 0.0, p));
    EXPECT_TRUE(should_update(4.9, 2.0, p));
    EXPECT_FALSE(should_update(4.9, 1.9, p));
}

TEST(Rasterize, EmptyVectorCoversVehicleCell)
{
    const FrameRaster r = rasterize_frame(OccupancyVector {}, { 1.23, 4.56, 0 }, 0.1);
    EXPECT_EQ(r.width(), 1);
    EXPECT_EQ(r.height(), 1);
    EXPECT_EQ(r.min_cell(), (CellIndex { 12, 45 }));
    EXPECT_EQ(r.count(CellState::Unknown), 1u);
}

TEST(Rasterize, SingleBeamEast)
{
    OccupancyVector vec;
    vec.points.push_back({ 1.0, 0.0 });
    const FrameRaster r = rasterize_frame(vec, { 0.05, 0.05, 0 }, 0.1);
    EXPECT_EQ(r.state_at_cell(10, 0), CellState::Occupied);
    for (int x = 1; x <= 9; ++x)
        EXPECT_EQ(r.state_at_cell(x, 0), CellState::Free) << x;
    EXPECT_EQ(r.state_at_cell(0, 0), CellState::Unknown);
    EXPECT_EQ(r.count(CellState::Free), 9u);
    EXPECT_EQ(r.count(CellState::Occupied), 1u);
}

TEST(Rasterize, OccupiedWins)
{
    OccupancyVector vec;
    vec.points.push_back({ 2.0, 0.0 });
    vec.points.push_back({ 1.0, 0.0 });
    const FrameRaster r = rasterize_frame(vec, { 0.05, 0.05, 0 }, 0.1);
    EXPECT_EQ(r.state_at_cell(10, 0), CellState::Occupied);
    EXPECT_EQ(r.state_at_cell(20, 0), CellState::Occupied);
    EXPECT_EQ(r.state_at_cell(15, 0), CellState::Free);
}

/*
 * Line oracle: the traversal between two cells must be an 8-connected
 * chain of max(|dx|, |dy|) - 1 cells, one per step of the major axis,
 * each within half a cell of the ideal segment along the minor axis.
 */
TEST(Rasterize, LineTraversalMatchesOracle)
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> coord(-40, 40);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::int64_t x0 = coord(rng), y0 = coord(rng);
        const std::int64_t x1 = coord(rng), y1 = coord(rng);
        if (x0 == x1 && y0 == y1)
            continue;
        std::vector<CellIndex> cells;
        trace_line_exclusive(x0, y0, x1, y1, [&](std::int64_t x, std::int64_t y) {
            cells.push_back({ x, y });
        });
        const std::int64_t dx = x1 - x0;
        const std::int64_t dy = y1 - y0;
        const bool xMajor = std::llabs(dx) >= std::llabs(dy);
        const std::int64_t steps = std::max(std::llabs(dx), std::llabs(dy));
        ASSERT_EQ(static_cast<std::int64_t>(cells.size()), steps - 1);
        CellIndex prev { x0, y0 };
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const CellIndex c = cells[k];
            EXPECT_LE(std::llabs(c.x - prev.x), 1);
            EXPECT_LE(std::llabs(c.y - prev.y), 1);
            prev = c;
            const auto major = static_cast<double>(k + 1);
            if (xMajor) {
                EXPECT_EQ(std::llabs(c.x - x0), static_cast<std::int64_t>(major));
                const double ideal = y0 + dy * (static_cast<double>(c.x - x0) / dx);
                EXPECT_LE(std::abs(static_cast<double>(c.y) - ideal), 0.5 + 1e-9);
            } else {
                EXPECT_EQ(std::llabs(c.y - y0), static_cast<std::int64_t>(major));
                const double ideal = x0 + dx * (static_cast<double>(c.y - y0) / dy);
                EXPECT_LE(std::abs(static_cast<double>(c.x) - ideal), 0.5 + 1e-9);
            }
        }
        EXPECT_LE(std::llabs(x1 - prev.x), 1);
        EXPECT_LE(std::llabs(y1 - prev.y), 1);
    }
}

TEST(Rasterize, RasterCellsAlignWithMapCells)
{
    OccupancyVector vec;
    vec.points.push_back({ 3.0, 1.0 });
    vec.points.push_back({ -2.0, 4.0 });
    const Pose2D pose { -7.33, 12.71, 0.4 };
    const FrameRaster r = rasterize_frame(vec, pose, 0.1);
    for (const auto& p : vec.points) {
        const Point2 g = transform_point(pose, p);
        const CellIndex c = world_to_cell(g.x, g.y, 0.1);
        EXPECT_EQ(r.state_at_cell(c.x, c.y), CellState::Occupied);
    }
}
