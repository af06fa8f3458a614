
/* map_updater.hpp */

#ifndef TILELOC_MAP_UPDATER_HPP
#define TILELOC_MAP_UPDATER_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "tileloc/geometry.hpp"
#include "tileloc/grid_map.hpp"
#include "tileloc/scan_pipeline.hpp"

namespace tileloc {

enum class CellState : std::uint8_t
{
    Unknown = 0,
    Free = 1,
    Occupied = 2,
};

/*
 * FrameRaster is the ternary occupancy frame of a single scan. Its cells
 * are aligned with the global cell grid of the map, so every raster cell
 * corresponds to exactly one tile cell.
 */
class FrameRaster
{
public:
    FrameRaster() = default;
    FrameRaster(CellIndex min_cell, int width, int height, double resolution);

    const CellIndex& min_cell() const { return mMinCell; }
    int width() const { return mWidth; }
    int height() const { return mHeight; }
    double resolution() const { return mResolution; }

    bool contains(std::int64_t cx, std::int64_t cy) const
    { return cx >= mMinCell.x && cy >= mMinCell.y &&
             cx < mMinCell.x + mWidth && cy < mMinCell.y + mHeight; }

    CellState state_at_cell(std::int64_t cx, std::int64_t cy) const
    {
        if (!this->contains(cx, cy))
            return CellState::Unknown;
        return mCells[this->offset(cx, cy)];
    }

    void set_state(std::int64_t cx, std::int64_t cy, CellState state)
    { mCells[this->offset(cx, cy)] = state; }

    /* Occupancy view of the raster: free 0, occupied 100, unknown 50 */
    std::uint8_t value_at_cell(std::int64_t cx, std::int64_t cy) const
    {
        switch (this->state_at_cell(cx, cy)) {
            case CellState::Free:     return kFreeValue;
            case CellState::Occupied: return kOccupiedValue;
            default:                  return kUnknownValue;
        }
    }

    std::size_t count(CellState state) const;

    /* Global-meter bounds */
    double min_x() const { return mMinCell.x * mResolution; }
    double min_y() const { return mMinCell.y * mResolution; }
    double max_x() const { return (mMinCell.x + mWidth) * mResolution; }
    double max_y() const { return (mMinCell.y + mHeight) * mResolution; }

private:
    std::size_t offset(std::int64_t cx, std::int64_t cy) const
    { return static_cast<std::size_t>(cy - mMinCell.y) * mWidth +
             static_cast<std::size_t>(cx - mMinCell.x); }

    CellIndex              mMinCell;
    int                    mWidth = 0;
    int                    mHeight = 0;
    double                 mResolution = 0.1;
    std::vector<CellState> mCells;
};

enum class UpdateMode
{
    Frozen,
    UpdateAll,
    UpdateMasked,
};

std::string_view to_string(UpdateMode mode);

struct UpdatePolicy
{
    UpdateMode mode = UpdateMode::UpdateAll;
    int        delta = 6;
    double     trigger_distance = 5.0;
    double     trigger_time = 2.0;

    void validate() const;
};

/*
 * Build the frame raster of a scan placed at `pose`: endpoint cells are
 * occupied, cells strictly between the vehicle cell and each endpoint cell
 * are free unless some endpoint of the frame occupies them.
 */
FrameRaster rasterize_frame(const OccupancyVector& vec, const Pose2D& pose,
                            double resolution);

/*
 * Integer line traversal between two cells, excluding both end cells.
 * Exposed for tests.
 */
template <typename Visit>
void trace_line_exclusive(std::int64_t x0, std::int64_t y0,
                          std::int64_t x1, std::int64_t y1, Visit&& visit)
{
    const std::int64_t dx = x1 > x0 ? x1 - x0 : x0 - x1;
    const std::int64_t dy = y1 > y0 ? y1 - y0 : y0 - y1;
    const std::int64_t sx = x0 < x1 ? 1 : -1;
    const std::int64_t sy = y0 < y1 ? 1 : -1;
    std::int64_t err = dx - dy;
    std::int64_t x = x0;
    std::int64_t y = y0;

    for (;;) {
        const std::int64_t e2 = 2 * err;
        if (e2 > -dy) {
            err -= dy;
            x += sx;
        }
        if (e2 < dx) {
            err += dx;
            y += sy;
        }
        if (x == x1 && y == y1)
            break;
        visit(x, y);
    }
}

/*
 * Apply the delta rule to the tiles: free cells decrease and occupied
 * cells increase by policy.delta, clamped to [0, 100]. In masked mode,
 * cells flagged in the mask are left untouched. Tiles whose values change
 * are marked dirty and, if requested, appended to changed_tiles. Returns
 * the number of changed cells.
 */
std::size_t apply_update(const FrameRaster& raster, TileStore& store,
                         const MapMask* mask, const UpdatePolicy& policy,
                         std::vector<TileIndex>* changed_tiles = nullptr);

/* Distance or time trigger, whichever comes first */
bool should_update(double odometer_since_last, double elapsed_since_last,
                   const UpdatePolicy& policy);

} /* namespace tileloc */

#endif /* TILELOC_MAP_UPDATER_HPP */
