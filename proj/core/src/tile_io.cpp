
/* tile_io.cpp */

#include "tileloc/tile_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

#include "tileloc/errors.hpp"

namespace tileloc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "tile encoding assumes a little-endian host");

constexpr char kTileMagic[4] = { 'O', 'G', 'T', '1' };
constexpr char kMaskMagic[4] = { 'O', 'G', 'M', '1' };

template <typename T>
void put(std::vector<std::uint8_t>& out, T value)
{
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    out.insert(out.end(), raw, raw + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t offset)
{
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    return value;
}

struct Header
{
    TileIndex    index;
    GridGeometry geometry;
    std::uint32_t side = 0;
};

void put_header(std::vector<std::uint8_t>& out, const char (&magic)[4],
                TileIndex index, const GridGeometry& geometry, int side)
{
    out.insert(out.end(), magic, magic + 4);
    put<std::int32_t>(out, index.i);
    put<std::int32_t>(out, index.j);
    put<double>(out, geometry.tile_size);
    put<double>(out, geometry.resolution);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(side));
}

/* Parse and validate the header and CRC; returns the payload span */
std::span<const std::uint8_t> parse(std::span<const std::uint8_t> bytes,
                                    const char (&magic)[4],
                                    bool bitPacked, Header& header)
{
    if (bytes.size() < kTileHeaderBytes + 4)
        throw FormatError("tile file truncated: header incomplete");
    if (std::memcmp(bytes.data(), magic, 4) != 0)
        throw FormatError("tile file has bad magic");

    header.index.i = get<std::int32_t>(bytes, 4);
    header.index.j = get<std::int32_t>(bytes, 8);
    header.geometry.tile_size = get<double>(bytes, 12);
    header.geometry.resolution = get<double>(bytes, 20);
    header.side = get<std::uint32_t>(bytes, 28);

    int expectedSide = 0;
    try {
        expectedSide = header.geometry.side_cells();
    } catch (const ContractError& e) {
        throw FormatError(std::string("tile file has invalid geometry: ") +
                          e.what());
    }
    if (header.side != static_cast<std::uint32_t>(expectedSide))
        throw FormatError("tile file side count disagrees with geometry");

    const std::size_t cells =
        static_cast<std::size_t>(header.side) * header.side;
    const std::size_t payloadBytes = bitPacked ? (cells + 7) / 8 : cells;
    if (bytes.size() != kTileHeaderBytes + payloadBytes + 4)
        throw FormatError("tile file truncated or oversized payload");

    const auto payload = bytes.subspan(kTileHeaderBytes, payloadBytes);
    const auto storedCrc =
        get<std::uint32_t>(bytes, kTileHeaderBytes + payloadBytes);
    if (storedCrc != crc32_of(payload))
        throw FormatError("tile file CRC mismatch");
    return payload;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes(
        (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("cannot read " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes)
{
    auto temporary = path;
    temporary += ".tmp";
    {
        std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + temporary.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError("short write to " + temporary.string());
    }
    std::error_code ec;
    std::filesystem::rename(temporary, path, ec);
    if (ec)
        throw IoError("cannot rename " + temporary.string() + ": " +
                      ec.message());
}

} /* namespace */

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes)
{
    uLong crc = ::crc32(0L, Z_NULL, 0);
    /* zlib takes uInt lengths; tiles are far below 4 GiB */
    crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_tile(const MapTile& tile)
{
    std::vector<std::uint8_t> out;
    out.reserve(kTileHeaderBytes + tile.cells().size() + 4);
    put_header(out, kTileMagic, tile.index(), tile.geometry(), tile.side());
    out.insert(out.end(), tile.cells().begin(), tile.cells().end());
    put<std::uint32_t>(out, crc32_of(tile.cells()));
    return out;
}

MapTile decode_tile(std::span<const std::uint8_t> bytes)
{
    Header header;
    const auto payload = parse(bytes, kTileMagic, false, header);
    for (const auto value : payload)
        if (value > kOccupiedValue)
            throw FormatError("tile cell value out of range");
    return MapTile(header.index, header.geometry,
                   std::vector<std::uint8_t>(payload.begin(), payload.end()));
}

std::vector<std::uint8_t> encode_mask(const MaskTile& mask)
{
    const auto bits = mask.bits();
    std::vector<std::uint8_t> packed((bits.size() + 7) / 8, 0);
    for (std::size_t k = 0; k < bits.size(); ++k)
        if (bits[k] != 0)
            packed[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));

    std::vector<std::uint8_t> out;
    out.reserve(kTileHeaderBytes + packed.size() + 4);
    put_header(out, kMaskMagic, mask.index(), mask.geometry(), mask.side());
    out.insert(out.end(), packed.begin(), packed.end());
    put<std::uint32_t>(out, crc32_of(packed));
    return out;
}

MaskTile decode_mask(std::span<const std::uint8_t> bytes)
{
    Header header;
    const auto payload = parse(bytes, kMaskMagic, true, header);
    const std::size_t cells =
        static_cast<std::size_t>(header.side) * header.side;
    std::vector<std::uint8_t> bits(cells, 0);
    for (std::size_t k = 0; k < cells; ++k)
        bits[k] = (payload[k / 8] >> (k % 8)) & 1u;
    return MaskTile(header.index, header.geometry, std::move(bits));
}

void save_tile(const MapTile& tile, const std::filesystem::path& path)
{
    write_file(path, encode_tile(tile));
}

MapTile load_tile(const std::filesystem::path& path)
{
    return decode_tile(read_file(path));
}

void save_mask(const MaskTile& mask, const std::filesystem::path& path)
{
    write_file(path, encode_mask(mask));
}

MaskTile load_mask(const std::filesystem::path& path)
{
    return decode_mask(read_file(path));
}

std::filesystem::path tile_file_name(TileIndex index)
{
    return "tile_" + std::to_string(index.i) + "_" +
           std::to_string(index.j) + ".ogt";
}

std::filesystem::path mask_file_name(TileIndex index)
{
    return "mask_" + std::to_string(index.i) + "_" +
           std::to_string(index.j) + ".ogm";
}

} /* namespace tileloc */
