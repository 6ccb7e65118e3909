#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amg/grid.hpp"

namespace amg {

// Sidecar metadata for a PGM occupancy map.
//
// JSON schema (unknown keys rejected):
//   {
//     "image": "campus.pgm",          // optional, relative to the metadata file
//     "resolution": 0.25,             // m/cell, > 0
//     "origin": [x, y],               // m, lower-left corner of the map
//     "occupied_threshold": 50,       // pixel <= this -> occupied
//     "free_threshold": 250           // pixel >= this -> free
//   }
struct MapMetadata {
  double resolution = 1.0;
  WorldPoint origin{};
  int occupied_threshold = 50;
  int free_threshold = 250;
  std::optional<std::filesystem::path> image;
};

MapMetadata load_map_metadata(const std::filesystem::path& path);
void validate_metadata(const MapMetadata& meta);

// Pixel values written for occupancy grids.
inline constexpr std::uint8_t kPgmOccupied = 0;
inline constexpr std::uint8_t kPgmUnknown = 205;
inline constexpr std::uint8_t kPgmFree = 255;

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // image order: top row first
};

// Binary P5, maxval 255. Header tokens may be separated by any whitespace and
// interleaved with '#' comments.
PgmImage decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const PgmImage& image);

// Occupancy grid from a P5 file; image row 0 becomes the top (max-y) map row.
GridMap load_pgm(const std::filesystem::path& path, const MapMetadata& meta);
// Cost grid from a P5 file, pixel value taken as cost.
GridMap load_cost_pgm(const std::filesystem::path& path, double resolution = 1.0,
                      WorldPoint origin = {});

// Occupancy and cost grids only; other kinds raise InvalidKind.
PgmImage to_pgm_image(const GridMap& map);
void save_pgm(const GridMap& map, const std::filesystem::path& path);

// Real-valued rasters (GPR mean/variance) as text. First line:
//   amg-raster <kind> <width> <height> <resolution> <origin_x> <origin_y>
// then one line per row, top row first, comma-separated values printed
// with shortest round-trip precision.
void save_raster(const GridMap& map, const std::filesystem::path& path);
GridMap load_raster(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view text);

}  // namespace amg
