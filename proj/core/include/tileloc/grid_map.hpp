
/* grid_map.hpp */

#ifndef TILELOC_GRID_MAP_HPP
#define TILELOC_GRID_MAP_HPP

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tileloc/geometry.hpp"

namespace tileloc {

/* Occupancy values stored in tiles: 0 = free, 100 = occupied */
inline constexpr std::uint8_t kFreeValue = 0;
inline constexpr std::uint8_t kUnknownValue = 50;
inline constexpr std::uint8_t kOccupiedValue = 100;

/*
 * GridGeometry describes the tiling shared by every tile and mask file of
 * one map. The tile size must be an integer multiple of the resolution.
 */
struct GridGeometry
{
    double tile_size = 30.0;
    double resolution = 0.10;

    /* Number of cells along one tile edge; throws ContractError if the
     * size is not an integer multiple of the resolution */
    int side_cells() const;
    void validate() const;

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

struct TileIndex
{
    std::int32_t i = 0;
    std::int32_t j = 0;

    friend auto operator<=>(const TileIndex&, const TileIndex&) = default;
};

/* Global cell coordinates: cell (x, y) spans [x*res, (x+1)*res) */
struct CellIndex
{
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/* Inclusive rectangle of tile indices */
struct TileRect
{
    std::int32_t i_min = 0;
    std::int32_t j_min = 0;
    std::int32_t i_max = -1;
    std::int32_t j_max = -1;

    bool empty() const { return i_max < i_min || j_max < j_min; }
    bool contains(const TileIndex& idx) const
    { return idx.i >= i_min && idx.i <= i_max &&
             idx.j >= j_min && idx.j <= j_max; }
};

/* Floor division for signed integers */
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    const std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

CellIndex world_to_cell(double x, double y, double resolution);
Point2 cell_center(const CellIndex& cell, double resolution);
TileIndex cell_to_tile(const CellIndex& cell, int side_cells);

/* Tiles whose square intersects the closed disc of given radius */
std::vector<TileIndex> tiles_covering(const Point2& center, double radius,
                                      double tile_size);
std::vector<TileIndex> tiles_covering(const Pose2D& center, double radius,
                                      double tile_size);

/*
 * MapTile is one geo-referenced square of occupancy cells. Cells are
 * row-major with row 0 on the south edge.
 */
class MapTile
{
public:
    MapTile(TileIndex index, GridGeometry geometry,
            std::uint8_t fill = kUnknownValue);

    /* Adopt a cell array; throws ContractError on size or range mismatch */
    MapTile(TileIndex index, GridGeometry geometry,
            std::vector<std::uint8_t> cells);

    TileIndex index() const { return mIndex; }
    const GridGeometry& geometry() const { return mGeometry; }
    int side() const { return mSide; }
    Point2 origin() const;

    std::uint8_t at(int col, int row) const
    { return mCells[static_cast<std::size_t>(row) * mSide + col]; }
    void set(int col, int row, std::uint8_t value);

    std::span<const std::uint8_t> cells() const { return mCells; }

    /* Raw mutable access; the caller keeps values inside [0, 100] */
    std::uint8_t* data() { return mCells.data(); }

    bool dirty() const { return mDirty; }
    void mark_dirty() { mDirty = true; }
    void mark_clean() { mDirty = false; }

    friend bool operator==(const MapTile& lhs, const MapTile& rhs)
    { return lhs.mIndex == rhs.mIndex && lhs.mGeometry == rhs.mGeometry &&
             lhs.mCells == rhs.mCells; }

private:
    TileIndex                 mIndex;
    GridGeometry              mGeometry;
    int                       mSide;
    std::vector<std::uint8_t> mCells;
    bool                      mDirty = false;
};

/* Fixed-structure bits of one tile (true = fixed) */
class MaskTile
{
public:
    MaskTile(TileIndex index, GridGeometry geometry);
    MaskTile(TileIndex index, GridGeometry geometry,
             std::vector<std::uint8_t> bits);

    TileIndex index() const { return mIndex; }
    const GridGeometry& geometry() const { return mGeometry; }
    int side() const { return mSide; }

    bool at(int col, int row) const
    { return mBits[static_cast<std::size_t>(row) * mSide + col] != 0; }
    void set(int col, int row, bool fixed)
    { mBits[static_cast<std::size_t>(row) * mSide + col] = fixed ? 1 : 0; }

    /* One byte per cell, 0 or 1 */
    std::span<const std::uint8_t> bits() const { return mBits; }
    std::size_t count() const;

    friend bool operator==(const MaskTile& lhs, const MaskTile& rhs)
    { return lhs.mIndex == rhs.mIndex && lhs.mGeometry == rhs.mGeometry &&
             lhs.mBits == rhs.mBits; }

private:
    TileIndex                 mIndex;
    GridGeometry              mGeometry;
    int                       mSide;
    std::vector<std::uint8_t> mBits;
};

/* Tile retention parameters of the TileStore */
struct RetentionPolicy
{
    /* Extra distance beyond the sub-map radius before a tile is evicted;
     * negative means one tile size */
    double margin = -1.0;
    /* Tiles stay loaded at least this many sub-map assemblies after use */
    int min_scans = 0;
};

class SubMap;

/*
 * TileStore owns the loaded tiles of one map directory. Missing tile files
 * load as all-unknown tiles. An empty directory path keeps everything in
 * memory. Single writer; not thread-safe.
 */
class TileStore
{
public:
    TileStore(std::filesystem::path directory, GridGeometry geometry,
              RetentionPolicy retention = {});

    TileStore(const TileStore&) = delete;
    TileStore& operator=(const TileStore&) = delete;
    TileStore(TileStore&&) = default;
    TileStore& operator=(TileStore&&) = default;

    const std::filesystem::path& directory() const { return mDirectory; }
    const GridGeometry& geometry() const { return mGeometry; }
    int side_cells() const { return mSide; }

    /* Loaded tile, loading or creating it on demand. Throws IoError naming
     * the index if an existing file cannot be read or parsed */
    MapTile& tile(TileIndex index);
    const MapTile* find(TileIndex index) const;

    std::size_t loaded_count() const { return mTiles.size(); }
    std::vector<TileIndex> loaded_indices() const;
    std::vector<TileIndex> dirty_indices() const;

    /* Write dirty tiles to disk; returns the number written */
    std::size_t flush();

    /* Flush and drop tiles further than radius + margin from the center
     * that have not been used during the last min_scans assemblies */
    std::size_t evict(const Point2& center, double radius);

    /* Drop every loaded tile without flushing */
    void discard();

    /* Occupancy read at a global cell; unloaded tiles read unknown */
    std::uint8_t value_at(const CellIndex& cell) const;

    /* Path of the tile file for an index inside this store's directory */
    std::filesystem::path tile_path(TileIndex index) const;

private:
    friend SubMap assemble_submap(TileStore& store, const Pose2D& center,
                                  double radius);

    struct Entry
    {
        std::unique_ptr<MapTile> tile;
        std::int64_t             last_used = 0;
    };

    std::filesystem::path      mDirectory;
    GridGeometry               mGeometry;
    RetentionPolicy            mRetention;
    int                        mSide;
    std::map<TileIndex, Entry> mTiles;
    std::int64_t               mAssemblyCount = 0;
};

/*
 * SubMap is an axis-aligned mosaic of loaded tiles. It borrows the tiles
 * from the store, so the store must outlive it and must not evict while
 * the sub-map is in use. Reads outside the rectangle return unknown.
 */
class SubMap
{
public:
    SubMap() = default;
    SubMap(TileRect rect, GridGeometry geometry,
           std::vector<const MapTile*> tiles);

    const TileRect& rect() const { return mRect; }
    const GridGeometry& geometry() const { return mGeometry; }
    double resolution() const { return mGeometry.resolution; }

    std::uint8_t value_at_cell(std::int64_t cx, std::int64_t cy) const
    {
        if (mSide == 0)
            return kUnknownValue;
        const std::int64_t ti = floor_div(cx, mSide) - mRect.i_min;
        const std::int64_t tj = floor_div(cy, mSide) - mRect.j_min;
        if (ti < 0 || tj < 0 || ti >= mWidth || tj >= mHeight)
            return kUnknownValue;
        const MapTile* tile = mTiles[static_cast<std::size_t>(tj * mWidth + ti)];
        if (tile == nullptr)
            return kUnknownValue;
        const auto col = static_cast<int>(cx - (ti + mRect.i_min) * mSide);
        const auto row = static_cast<int>(cy - (tj + mRect.j_min) * mSide);
        return tile->at(col, row);
    }

    std::uint8_t value_at(double x, double y) const
    {
        const CellIndex c = world_to_cell(x, y, mGeometry.resolution);
        return this->value_at_cell(c.x, c.y);
    }

    /* Global-meter bounds of the rectangle */
    double min_x() const { return mRect.i_min * mGeometry.tile_size; }
    double min_y() const { return mRect.j_min * mGeometry.tile_size; }
    double max_x() const { return (mRect.i_max + 1) * mGeometry.tile_size; }
    double max_y() const { return (mRect.j_max + 1) * mGeometry.tile_size; }

private:
    TileRect                    mRect;
    GridGeometry                mGeometry;
    std::int64_t                mSide = 0;
    std::int64_t                mWidth = 0;
    std::int64_t                mHeight = 0;
    std::vector<const MapTile*> mTiles;
};

/* Load missing covered tiles and build the sub-map over their union */
SubMap assemble_submap(TileStore& store, const Pose2D& center, double radius);

/*
 * MapMask holds the fixed-structure bits of a map, one MaskTile per tile.
 * Tiles without a mask tile have no fixed cells.
 */
class MapMask
{
public:
    explicit MapMask(GridGeometry geometry);

    const GridGeometry& geometry() const { return mGeometry; }
    int side_cells() const { return mSide; }

    bool fixed_at_cell(const CellIndex& cell) const;
    bool fixed_at(double x, double y) const;
    void set_fixed(const CellIndex& cell, bool fixed);

    const std::map<TileIndex, MaskTile>& tiles() const { return mTiles; }
    void insert(MaskTile tile);
    std::size_t count() const;

    /* Mask files are named mask_<i>_<j>.ogm */
    void save(const std::filesystem::path& directory) const;
    static MapMask load(const std::filesystem::path& directory,
                        GridGeometry geometry);

private:
    GridGeometry                  mGeometry;
    int                           mSide;
    std::map<TileIndex, MaskTile> mTiles;
};

/*
 * MaskView is a dense lookup of mask bits over a tile rectangle, built to
 * match a SubMap. It borrows from the MapMask.
 */
class MaskView
{
public:
    MaskView() = default;
    MaskView(const MapMask& mask, const TileRect& rect);

    bool fixed_at_cell(std::int64_t cx, std::int64_t cy) const
    {
        if (mSide == 0)
            return false;
        const std::int64_t ti = floor_div(cx, mSide) - mRect.i_min;
        const std::int64_t tj = floor_div(cy, mSide) - mRect.j_min;
        if (ti < 0 || tj < 0 || ti >= mWidth || tj >= mHeight)
            return false;
        const MaskTile* tile = mTiles[static_cast<std::size_t>(tj * mWidth + ti)];
        if (tile == nullptr)
            return false;
        const auto col = static_cast<int>(cx - (ti + mRect.i_min) * mSide);
        const auto row = static_cast<int>(cy - (tj + mRect.j_min) * mSide);
        return tile->at(col, row);
    }

private:
    TileRect                     mRect;
    std::int64_t                 mSide = 0;
    std::int64_t                 mWidth = 0;
    std::int64_t                 mHeight = 0;
    std::vector<const MaskTile*> mTiles;
};

/* Geodetic anchor of the local metric frame, recorded in the metadata */
struct GeodeticAnchor
{
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double altitude_m = 0.0;

    friend bool operator==(const GeodeticAnchor&, const GeodeticAnchor&) = default;
};

struct MapMetadata
{
    GridGeometry                  geometry;
    std::optional<GeodeticAnchor> anchor;

    friend bool operator==(const MapMetadata&, const MapMetadata&) = default;
};

/* map.meta: "key = value" lines */
inline constexpr const char* kMetadataFileName = "map.meta";

void save_metadata(const MapMetadata& metadata,
                   const std::filesystem::path& directory);
MapMetadata load_metadata(const std::filesystem::path& directory);

} /* namespace tileloc */

#endif /* TILELOC_GRID_MAP_HPP */
