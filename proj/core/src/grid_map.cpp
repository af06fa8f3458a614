
/* grid_map.cpp */

#include "tileloc/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "tileloc/errors.hpp"
#include "tileloc/tile_io.hpp"

namespace tileloc {

/*
 * GridGeometry
 */

int GridGeometry::side_cells() const
{
    if (!(this->tile_size > 0.0) || !(this->resolution > 0.0) ||
        !std::isfinite(this->tile_size) || !std::isfinite(this->resolution))
        throw ContractError("grid geometry must be positive and finite");

    const double ratio = this->tile_size / this->resolution;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw ContractError("tile size must be an integer multiple of "
                            "the resolution");
    if (rounded > 65535.0)
        throw ContractError("tile has too many cells per side");
    return static_cast<int>(rounded);
}

void GridGeometry::validate() const
{
    static_cast<void>(this->side_cells());
}

CellIndex world_to_cell(double x, double y, double resolution)
{
    return CellIndex { static_cast<std::int64_t>(std::floor(x / resolution)),
                       static_cast<std::int64_t>(std::floor(y / resolution)) };
}

Point2 cell_center(const CellIndex& cell, double resolution)
{
    return Point2 { (static_cast<double>(cell.x) + 0.5) * resolution,
                    (static_cast<double>(cell.y) + 0.5) * resolution };
}

TileIndex cell_to_tile(const CellIndex& cell, int side_cells)
{
    return TileIndex { static_cast<std::int32_t>(floor_div(cell.x, side_cells)),
                       static_cast<std::int32_t>(floor_div(cell.y, side_cells)) };
}

std::vector<TileIndex> tiles_covering(const Point2& center, double radius,
                                      double tile_size)
{
    if (!(radius > 0.0))
        throw ContractError("tiles_covering: radius must be positive");

    const auto lo = [&](double v) {
        return static_cast<std::int32_t>(std::floor((v - radius) / tile_size)); };
    const auto hi = [&](double v) {
        return static_cast<std::int32_t>(std::floor((v + radius) / tile_size)); };

    std::vector<TileIndex> indices;
    for (std::int32_t j = lo(center.y); j <= hi(center.y); ++j) {
        for (std::int32_t i = lo(center.x); i <= hi(center.x); ++i) {
            /* Closest point of the square to the disc center */
            const double x0 = i * tile_size;
            const double y0 = j * tile_size;
            const double cx = std::clamp(center.x, x0, x0 + tile_size);
            const double cy = std::clamp(center.y, y0, y0 + tile_size);
            const double dx = center.x - cx;
            const double dy = center.y - cy;
            if (dx * dx + dy * dy <= radius * radius)
                indices.push_back(TileIndex { i, j });
        }
    }
    return indices;
}

std::vector<TileIndex> tiles_covering(const Pose2D& center, double radius,
                                      double tile_size)
{
    return tiles_covering(Point2 { center.x, center.y }, radius, tile_size);
}

/*
 * MapTile
 */

MapTile::MapTile(TileIndex index, GridGeometry geometry, std::uint8_t fill) :
    mIndex(index),
    mGeometry(geometry),
    mSide(geometry.side_cells())
{
    if (fill > kOccupiedValue)
        throw ContractError("tile fill value must be within [0, 100]");
    this->mCells.assign(static_cast<std::size_t>(this->mSide) * this->mSide,
                        fill);
}

MapTile::MapTile(TileIndex index, GridGeometry geometry,
                 std::vector<std::uint8_t> cells) :
    mIndex(index),
    mGeometry(geometry),
    mSide(geometry.side_cells()),
    mCells(std::move(cells))
{
    if (this->mCells.size() !=
        static_cast<std::size_t>(this->mSide) * this->mSide)
        throw ContractError("tile cell count does not match its geometry");
    if (std::any_of(this->mCells.begin(), this->mCells.end(),
                    [](std::uint8_t v) { return v > kOccupiedValue; }))
        throw ContractError("tile cell value out of [0, 100]");
}

Point2 MapTile::origin() const
{
    return Point2 { this->mIndex.i * this->mGeometry.tile_size,
                    this->mIndex.j * this->mGeometry.tile_size };
}

void MapTile::set(int col, int row, std::uint8_t value)
{
    if (value > kOccupiedValue)
        throw ContractError("tile cell value out of [0, 100]");
    this->mCells[static_cast<std::size_t>(row) * this->mSide + col] = value;
    this->mDirty = true;
}

/*
 * MaskTile
 */

MaskTile::MaskTile(TileIndex index, GridGeometry geometry) :
    mIndex(index),
    mGeometry(geometry),
    mSide(geometry.side_cells()),
    mBits(static_cast<std::size_t>(mSide) * mSide, 0)
{
}

MaskTile::MaskTile(TileIndex index, GridGeometry geometry,
                   std::vector<std::uint8_t> bits) :
    mIndex(index),
    mGeometry(geometry),
    mSide(geometry.side_cells()),
    mBits(std::move(bits))
{
    if (this->mBits.size() !=
        static_cast<std::size_t>(this->mSide) * this->mSide)
        throw ContractError("mask bit count does not match its geometry");
    for (auto& b : this->mBits)
        b = b != 0 ? 1 : 0;
}

std::size_t MaskTile::count() const
{
    return static_cast<std::size_t>(
        std::count(this->mBits.begin(), this->mBits.end(), 1));
}

/*
 * TileStore
 */

TileStore::TileStore(std::filesystem::path directory, GridGeometry geometry,
                     RetentionPolicy retention) :
    mDirectory(std::move(directory)),
    mGeometry(geometry),
    mRetention(retention),
    mSide(geometry.side_cells())
{
    if (this->mRetention.margin < 0.0)
        this->mRetention.margin = geometry.tile_size;
}

std::filesystem::path TileStore::tile_path(TileIndex index) const
{
    return this->mDirectory / tile_file_name(index);
}

MapTile& TileStore::tile(TileIndex index)
{
    auto it = this->mTiles.find(index);
    if (it != this->mTiles.end())
        return *it->second.tile;

    std::unique_ptr<MapTile> loaded;
    if (!this->mDirectory.empty()) {
        const auto path = this->tile_path(index);
        std::error_code ec;
        if (std::filesystem::exists(path, ec)) {
            try {
                loaded = std::make_unique<MapTile>(load_tile(path));
            } catch (const std::exception& e) {
                throw IoError("cannot load tile (" + std::to_string(index.i) +
                              ", " + std::to_string(index.j) + "): " +
                              e.what());
            }
            if (loaded->index() != index || !(loaded->geometry() == this->mGeometry))
                throw IoError("tile file " + path.string() +
                              " does not match index or map geometry");
        }
    }
    if (loaded == nullptr)
        loaded = std::make_unique<MapTile>(index, this->mGeometry);

    auto& entry = this->mTiles[index];
    entry.tile = std::move(loaded);
    entry.last_used = this->mAssemblyCount;
    return *entry.tile;
}

const MapTile* TileStore::find(TileIndex index) const
{
    const auto it = this->mTiles.find(index);
    return it == this->mTiles.end() ? nullptr : it->second.tile.get();
}

std::vector<TileIndex> TileStore::loaded_indices() const
{
    std::vector<TileIndex> indices;
    indices.reserve(this->mTiles.size());
    for (const auto& [index, entry] : this->mTiles)
        indices.push_back(index);
    return indices;
}

std::vector<TileIndex> TileStore::dirty_indices() const
{
    std::vector<TileIndex> indices;
    for (const auto& [index, entry] : this->mTiles)
        if (entry.tile->dirty())
            indices.push_back(index);
    return indices;
}

std::size_t TileStore::flush()
{
    std::size_t written = 0;
    if (this->mDirectory.empty())
        return written;

    for (auto& [index, entry] : this->mTiles) {
        if (!entry.tile->dirty())
            continue;
        std::error_code ec;
        std::filesystem::create_directories(this->mDirectory, ec);
        save_tile(*entry.tile, this->tile_path(index));
        entry.tile->mark_clean();
        ++written;
    }
    return written;
}

std::size_t TileStore::evict(const Point2& center, double radius)
{
    const double keep = radius + this->mRetention.margin;
    const double size = this->mGeometry.tile_size;
    std::size_t evicted = 0;

    for (auto it = this->mTiles.begin(); it != this->mTiles.end(); ) {
        const double x0 = it->first.i * size;
        const double y0 = it->first.j * size;
        const double dx = center.x - std::clamp(center.x, x0, x0 + size);
        const double dy = center.y - std::clamp(center.y, y0, y0 + size);
        const bool far = dx * dx + dy * dy > keep * keep;
        const bool stale = this->mAssemblyCount - it->second.last_used >=
                           this->mRetention.min_scans;
        if (!far || !stale) {
            ++it;
            continue;
        }
        if (it->second.tile->dirty() && !this->mDirectory.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(this->mDirectory, ec);
            save_tile(*it->second.tile, this->tile_path(it->first));
        }
        it = this->mTiles.erase(it);
        ++evicted;
    }
    return evicted;
}

void TileStore::discard()
{
    this->mTiles.clear();
}

std::uint8_t TileStore::value_at(const CellIndex& cell) const
{
    const TileIndex index = cell_to_tile(cell, this->mSide);
    const MapTile* tile = this->find(index);
    if (tile == nullptr)
        return kUnknownValue;
    return tile->at(static_cast<int>(cell.x - std::int64_t { index.i } * this->mSide),
                    static_cast<int>(cell.y - std::int64_t { index.j } * this->mSide));
}

/*
 * SubMap
 */

SubMap::SubMap(TileRect rect, GridGeometry geometry,
               std::vector<const MapTile*> tiles) :
    mRect(rect),
    mGeometry(geometry),
    mSide(geometry.side_cells()),
    mWidth(rect.empty() ? 0 : rect.i_max - rect.i_min + 1),
    mHeight(rect.empty() ? 0 : rect.j_max - rect.j_min + 1),
    mTiles(std::move(tiles))
{
    if (this->mTiles.size() != static_cast<std::size_t>(this->mWidth * this->mHeight))
        throw ContractError("sub-map tile table does not match its rectangle");
}

SubMap assemble_submap(TileStore& store, const Pose2D& center, double radius)
{
    const auto indices =
        tiles_covering(center, radius, store.geometry().tile_size);

    TileRect rect { indices.front().i, indices.front().j,
                    indices.front().i, indices.front().j };
    for (const auto& idx : indices) {
        rect.i_min = std::min(rect.i_min, idx.i);
        rect.j_min = std::min(rect.j_min, idx.j);
        rect.i_max = std::max(rect.i_max, idx.i);
        rect.j_max = std::max(rect.j_max, idx.j);
    }

    ++store.mAssemblyCount;

    /* Fill the whole rectangle so every lookup inside resolves to a tile */
    const std::size_t width = static_cast<std::size_t>(rect.i_max - rect.i_min + 1);
    const std::size_t height = static_cast<std::size_t>(rect.j_max - rect.j_min + 1);
    std::vector<const MapTile*> tiles(width * height, nullptr);
    for (std::int32_t j = rect.j_min; j <= rect.j_max; ++j) {
        for (std::int32_t i = rect.i_min; i <= rect.i_max; ++i) {
            const TileIndex idx { i, j };
            const MapTile& tile = store.tile(idx);
            store.mTiles[idx].last_used = store.mAssemblyCount;
            tiles[static_cast<std::size_t>(j - rect.j_min) * width +
                  static_cast<std::size_t>(i - rect.i_min)] = &tile;
        }
    }
    return SubMap(rect, store.geometry(), std::move(tiles));
}

/*
 * MapMask
 */

MapMask::MapMask(GridGeometry geometry) :
    mGeometry(geometry),
    mSide(geometry.side_cells())
{
}

bool MapMask::fixed_at_cell(const CellIndex& cell) const
{
    const TileIndex index = cell_to_tile(cell, this->mSide);
    const auto it = this->mTiles.find(index);
    if (it == this->mTiles.end())
        return false;
    return it->second.at(
        static_cast<int>(cell.x - std::int64_t { index.i } * this->mSide),
        static_cast<int>(cell.y - std::int64_t { index.j } * this->mSide));
}

bool MapMask::fixed_at(double x, double y) const
{
    return this->fixed_at_cell(world_to_cell(x, y, this->mGeometry.resolution));
}

void MapMask::set_fixed(const CellIndex& cell, bool fixed)
{
    const TileIndex index = cell_to_tile(cell, this->mSide);
    auto it = this->mTiles.find(index);
    if (it == this->mTiles.end()) {
        if (!fixed)
            return;
        it = this->mTiles.emplace(index, MaskTile(index, this->mGeometry)).first;
    }
    it->second.set(
        static_cast<int>(cell.x - std::int64_t { index.i } * this->mSide),
        static_cast<int>(cell.y - std::int64_t { index.j } * this->mSide),
        fixed);
}

void MapMask::insert(MaskTile tile)
{
    if (!(tile.geometry() == this->mGeometry))
        throw ContractError("mask tile geometry does not match the mask");
    const TileIndex index = tile.index();
    this->mTiles.insert_or_assign(index, std::move(tile));
}

std::size_t MapMask::count() const
{
    std::size_t total = 0;
    for (const auto& [index, tile] : this->mTiles)
        total += tile.count();
    return total;
}

void MapMask::save(const std::filesystem::path& directory) const
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec)
        throw IoError("cannot create " + directory.string() + ": " +
                      ec.message());
    for (const auto& [index, tile] : this->mTiles)
        save_mask(tile, directory / mask_file_name(index));
}

MapMask MapMask::load(const std::filesystem::path& directory,
                      GridGeometry geometry)
{
    MapMask mask(geometry);
    std::error_code ec;
    if (!std::filesystem::is_directory(directory, ec))
        throw IoError("mask directory " + directory.string() + " not found");

    /* Sorted so that load order never depends on directory iteration */
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".ogm")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        MaskTile tile = load_mask(path);
        if (!(tile.geometry() == geometry))
            throw FormatError("mask file " + path.string() +
                              " does not match map geometry");
        mask.insert(std::move(tile));
    }
    return mask;
}

/*
 * MaskView
 */

MaskView::MaskView(const MapMask& mask, const TileRect& rect) :
    mRect(rect),
    mSide(mask.side_cells()),
    mWidth(rect.empty() ? 0 : rect.i_max - rect.i_min + 1),
    mHeight(rect.empty() ? 0 : rect.j_max - rect.j_min + 1),
    mTiles(static_cast<std::size_t>(mWidth * mHeight), nullptr)
{
    for (const auto& [index, tile] : mask.tiles())
        if (rect.contains(index))
            this->mTiles[static_cast<std::size_t>(
                (index.j - rect.j_min) * this->mWidth + (index.i - rect.i_min))] = &tile;
}

/*
 * Metadata
 */

void save_metadata(const MapMetadata& metadata,
                   const std::filesystem::path& directory)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    std::ofstream out(directory / kMetadataFileName, std::ios::trunc);
    if (!out)
        throw IoError("cannot write metadata in " + directory.string());

    out.precision(17);
    out << "# tileloc map metadata\n";
    out << "format = 1\n";
    out << "tile_size = " << metadata.geometry.tile_size << "\n";
    out << "resolution = " << metadata.geometry.resolution << "\n";
    if (metadata.anchor) {
        out << "anchor_latitude = " << metadata.anchor->latitude_deg << "\n";
        out << "anchor_longitude = " << metadata.anchor->longitude_deg << "\n";
        out << "anchor_altitude = " << metadata.anchor->altitude_m << "\n";
    }
    if (!out)
        throw IoError("short write of metadata in " + directory.string());
}

MapMetadata load_metadata(const std::filesystem::path& directory)
{
    const auto path = directory / kMetadataFileName;
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());

    std::map<std::string, double> values;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path.string() + ":" + std::to_string(lineNo) +
                              ": expected key = value");
        std::istringstream keyStream(line.substr(0, eq));
        std::istringstream valueStream(line.substr(eq + 1));
        std::string key;
        double value = 0.0;
        keyStream >> key;
        if (key.empty() || !(valueStream >> value))
            throw FormatError(path.string() + ":" + std::to_string(lineNo) +
                              ": bad entry");
        values[key] = value;
    }

    const auto require = [&](const std::string& key) {
        const auto it = values.find(key);
        if (it == values.end())
            throw FormatError(path.string() + ": missing " + key);
        return it->second;
    };

    MapMetadata metadata;
    metadata.geometry.tile_size = require("tile_size");
    metadata.geometry.resolution = require("resolution");
    try {
        metadata.geometry.validate();
    } catch (const ContractError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (values.count("anchor_latitude") != 0) {
        metadata.anchor = GeodeticAnchor { require("anchor_latitude"),
                                           require("anchor_longitude"),
                                           values.count("anchor_altitude") != 0
                                               ? values["anchor_altitude"] : 0.0 };
    }
    return metadata;
}

} /* namespace tileloc */
