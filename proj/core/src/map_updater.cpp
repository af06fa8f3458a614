
/* map_updater.cpp */

#include "tileloc/map_updater.hpp"

#include <algorithm>
#include <cmath>

#include "tileloc/errors.hpp"

namespace tileloc {

/*
 * FrameRaster
 */

FrameRaster::FrameRaster(CellIndex min_cell, int width, int height,
                         double resolution) :
    mMinCell(min_cell),
    mWidth(width),
    mHeight(height),
    mResolution(resolution),
    mCells(static_cast<std::size_t>(width) * height, CellState::Unknown)
{
    if (width < 0 || height < 0 || !(resolution > 0.0))
        throw ContractError("frame raster needs non-negative size and "
                            "positive resolution");
}

std::size_t FrameRaster::count(CellState state) const
{
    return static_cast<std::size_t>(
        std::count(this->mCells.begin(), this->mCells.end(), state));
}

std::string_view to_string(UpdateMode mode)
{
    switch (mode) {
        case UpdateMode::Frozen:       return "frozen";
        case UpdateMode::UpdateAll:    return "update_all";
        case UpdateMode::UpdateMasked: return "update_masked";
    }
    return "unknown";
}

void UpdatePolicy::validate() const
{
    if (this->delta <= 0 || this->delta > 100)
        throw ContractError("update delta must lie in (0, 100]");
    if (!(this->trigger_distance > 0.0))
        throw ContractError("update trigger distance must be positive");
    if (!(this->trigger_time > 0.0))
        throw ContractError("update trigger time must be positive");
}

FrameRaster rasterize_frame(const OccupancyVector& vec, const Pose2D& pose,
                            double resolution)
{
    if (!(resolution > 0.0))
        throw ContractError("rasterize_frame: resolution must be positive");

    const CellIndex origin = world_to_cell(pose.x, pose.y, resolution);

    std::vector<CellIndex> endpoints;
    endpoints.reserve(vec.points.size());
    CellIndex lo = origin;
    CellIndex hi = origin;
    for (const auto& p : vec.points) {
        const Point2 g = transform_point(pose, p);
        const CellIndex cell = world_to_cell(g.x, g.y, resolution);
        endpoints.push_back(cell);
        lo.x = std::min(lo.x, cell.x);
        lo.y = std::min(lo.y, cell.y);
        hi.x = std::max(hi.x, cell.x);
        hi.y = std::max(hi.y, cell.y);
    }

    FrameRaster raster(lo, static_cast<int>(hi.x - lo.x + 1),
                       static_cast<int>(hi.y - lo.y + 1), resolution);

    /* Free space first, then endpoints overwrite: occupied wins */
    for (const auto& cell : endpoints) {
        trace_line_exclusive(origin.x, origin.y, cell.x, cell.y,
                             [&](std::int64_t x, std::int64_t y) {
                                 raster.set_state(x, y, CellState::Free);
                             });
    }
    for (const auto& cell : endpoints)
        raster.set_state(cell.x, cell.y, CellState::Occupied);

    return raster;
}

std::size_t apply_update(const FrameRaster& raster, TileStore& store,
                         const MapMask* mask, const UpdatePolicy& policy,
                         std::vector<TileIndex>* changed_tiles)
{
    policy.validate();
    if (policy.mode == UpdateMode::Frozen)
        throw ContractError("apply_update called with a frozen policy");
    if (policy.mode == UpdateMode::UpdateMasked && mask == nullptr)
        throw ContractError("masked update requires a map mask");
    if (std::abs(raster.resolution() - store.geometry().resolution) > 1e-12)
        throw ContractError("raster resolution differs from the map");
    if (raster.width() == 0 || raster.height() == 0)
        return 0;

    const int side = store.side_cells();
    const int delta = policy.delta;
    const CellIndex lo = raster.min_cell();
    const CellIndex hi { lo.x + raster.width() - 1, lo.y + raster.height() - 1 };
    const TileIndex tlo = cell_to_tile(lo, side);
    const TileIndex thi = cell_to_tile(hi, side);

    std::size_t changed = 0;
    for (std::int32_t tj = tlo.j; tj <= thi.j; ++tj) {
        for (std::int32_t ti = tlo.i; ti <= thi.i; ++ti) {
            const std::int64_t baseX = std::int64_t { ti } * side;
            const std::int64_t baseY = std::int64_t { tj } * side;
            const std::int64_t x0 = std::max(lo.x, baseX);
            const std::int64_t y0 = std::max(lo.y, baseY);
            const std::int64_t x1 = std::min(hi.x, baseX + side - 1);
            const std::int64_t y1 = std::min(hi.y, baseY + side - 1);

            /* Skip blocks without known cells so no tile gets loaded */
            bool anyKnown = false;
            for (std::int64_t y = y0; y <= y1 && !anyKnown; ++y)
                for (std::int64_t x = x0; x <= x1 && !anyKnown; ++x)
                    anyKnown = raster.state_at_cell(x, y) != CellState::Unknown;
            if (!anyKnown)
                continue;

            const MaskTile* maskTile = nullptr;
            if (policy.mode == UpdateMode::UpdateMasked) {
                const auto it = mask->tiles().find(TileIndex { ti, tj });
                if (it != mask->tiles().end())
                    maskTile = &it->second;
            }

            MapTile& tile = store.tile(TileIndex { ti, tj });
            std::uint8_t* cells = tile.data();
            std::size_t tileChanged = 0;

            for (std::int64_t y = y0; y <= y1; ++y) {
                const auto row = static_cast<int>(y - baseY);
                for (std::int64_t x = x0; x <= x1; ++x) {
                    const CellState state = raster.state_at_cell(x, y);
                    if (state == CellState::Unknown)
                        continue;
                    const auto col = static_cast<int>(x - baseX);
                    if (maskTile != nullptr && maskTile->at(col, row))
                        continue;

                    std::uint8_t& v = cells[static_cast<std::size_t>(row) * side + col];
                    const int updated = state == CellState::Occupied
                        ? std::min(static_cast<int>(v) + delta, 100)
                        : std::max(static_cast<int>(v) - delta, 0);
                    if (updated != v) {
                        v = static_cast<std::uint8_t>(updated);
                        ++tileChanged;
                    }
                }
            }
            if (tileChanged > 0) {
                tile.mark_dirty();
                if (changed_tiles != nullptr)
                    changed_tiles->push_back(TileIndex { ti, tj });
            }
            changed += tileChanged;
        }
    }
    return changed;
}

bool should_update(double odometer_since_last, double elapsed_since_last,
                   const UpdatePolicy& policy)
{
    return odometer_since_last >= policy.trigger_distance ||
           elapsed_since_last >= policy.trigger_time;
}

} /* namespace tileloc */
