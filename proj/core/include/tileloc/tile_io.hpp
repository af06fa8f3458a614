
/* tile_io.hpp */

#ifndef TILELOC_TILE_IO_HPP
#define TILELOC_TILE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tileloc/grid_map.hpp"

namespace tileloc {

/*
 * Binary tile and mask files (little-endian):
 *
 *   magic        4 bytes   "OGT1" (tile) or "OGM1" (mask)
 *   i, j         2 x i32
 *   size_m       f64
 *   resolution_m f64
 *   side_cells   u32
 *   payload      tile: side^2 bytes, row-major, row 0 = south edge
 *                mask: ceil(side^2 / 8) bytes, bit-packed LSB first
 *   crc32        u32 over the payload
 */
inline constexpr std::size_t kTileHeaderBytes = 4 + 4 + 4 + 8 + 8 + 4;

std::vector<std::uint8_t> encode_tile(const MapTile& tile);
MapTile decode_tile(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_mask(const MaskTile& mask);
MaskTile decode_mask(std::span<const std::uint8_t> bytes);

/* Write via a temporary file and rename */
void save_tile(const MapTile& tile, const std::filesystem::path& path);
MapTile load_tile(const std::filesystem::path& path);

void save_mask(const MaskTile& mask, const std::filesystem::path& path);
MaskTile load_mask(const std::filesystem::path& path);

std::filesystem::path tile_file_name(TileIndex index);
std::filesystem::path mask_file_name(TileIndex index);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

} /* namespace tileloc */

#endif /* TILELOC_TILE_IO_HPP */
