#include "amg/map_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "amg/error.hpp"

namespace amg {
namespace {

using Bytes = std::span<const std::uint8_t>;

bool is_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

class HeaderReader {
 public:
  explicit HeaderReader(Bytes bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) throw Error(ErrorCode::ParseError, std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == start) {
      throw Error(ErrorCode::ParseError,
                  std::string("expected ") + what + " at byte " + std::to_string(start));
    }
    return static_cast<int>(value);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  Bytes bytes_;
  std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// Metadata

void validate_metadata(const MapMetadata& meta) {
  if (!(meta.resolution > 0.0) || !std::isfinite(meta.resolution)) {
    throw Error(ErrorCode::ConfigError, "resolution must be positive");
  }
  if (!std::isfinite(meta.origin.x) || !std::isfinite(meta.origin.y)) {
    throw Error(ErrorCode::ConfigError, "origin must be finite");
  }
  if (meta.occupied_threshold < 0 || meta.free_threshold > 255 ||
      meta.occupied_threshold >= meta.free_threshold) {
    throw Error(ErrorCode::ConfigError,
                "thresholds must satisfy 0 <= occupied_threshold < free_threshold <= 255");
  }
}

MapMetadata load_map_metadata(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, path.string() + ": expected object");
  static const std::set<std::string> known = {"image", "resolution", "origin",
                                              "occupied_threshold", "free_threshold"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorCode::ConfigError, path.string() + ": unknown key '" + key + "'");
    }
  }
  MapMetadata meta;
  try {
    meta.resolution = j.at("resolution").get<double>();
    const auto& o = j.at("origin");
    if (!o.is_array() || o.size() != 2) throw Error(ErrorCode::ConfigError, "origin must be [x, y]");
    meta.origin = {o[0].get<double>(), o[1].get<double>()};
    meta.occupied_threshold = j.value("occupied_threshold", meta.occupied_threshold);
    meta.free_threshold = j.value("free_threshold", meta.free_threshold);
    if (j.contains("image")) {
      meta.image = path.parent_path() / j["image"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  validate_metadata(meta);
  return meta;
}

// ---------------------------------------------------------------------------
// PGM

PgmImage decode_pgm(Bytes bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorCode::ParseError, "missing PNM magic");
  }
  if (bytes[1] != '5') {
    if (bytes[1] >= '1' && bytes[1] <= '7') {
      throw Error(ErrorCode::UnsupportedFormat,
                  std::string("P") + static_cast<char>(bytes[1]) + " images are not supported");
    }
    throw Error(ErrorCode::ParseError, "bad PNM magic");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  if (reader.pos() >= bytes.size() || !(is_space(bytes[reader.pos()]) || bytes[reader.pos()] == '#')) {
    throw Error(ErrorCode::ParseError, "expected whitespace after magic");
  }
  PgmImage img;
  img.width = reader.read_int("width");
  img.height = reader.read_int("height");
  const int maxval = reader.read_int("maxval");
  if (img.width <= 0 || img.height <= 0) throw Error(ErrorCode::ParseError, "empty image");
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedFormat, "maxval " + std::to_string(maxval) + " (only 255)");
  }
  if (reader.pos() >= bytes.size() || !is_space(bytes[reader.pos()])) {
    throw Error(ErrorCode::ParseError, "expected single whitespace before raster");
  }
  reader.advance(1);
  const std::size_t need = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  const std::size_t have = bytes.size() - reader.pos();
  if (have < need) {
    throw Error(ErrorCode::ParseError, "truncated raster: header claims " + std::to_string(need) +
                                           " bytes, payload has " + std::to_string(have));
  }
  const auto begin = bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos());
  img.pixels.assign(begin, begin + static_cast<std::ptrdiff_t>(need));
  return img;
}

std::vector<std::uint8_t> encode_pgm(const PgmImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

namespace {

// Image rows run top-down; map rows bottom-up.
std::size_t image_offset(const GridGeometry& g, int map_row, int col) {
  return static_cast<std::size_t>(g.height - 1 - map_row) * static_cast<std::size_t>(g.width) +
         static_cast<std::size_t>(col);
}

}  // namespace

GridMap load_pgm(const std::filesystem::path& path, const MapMetadata& meta) {
  validate_metadata(meta);
  const auto img = decode_pgm(read_file_bytes(path));
  const GridGeometry g{img.width, img.height, meta.resolution, meta.origin};
  std::vector<double> values(g.cell_count());
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const int px = img.pixels[image_offset(g, r, c)];
      double v = kOccupancyUnknown;
      if (px <= meta.occupied_threshold) {
        v = kOccupancyOccupied;
      } else if (px >= meta.free_threshold) {
        v = kOccupancyFree;
      }
      values[g.offset({r, c})] = v;
    }
  }
  return GridMap(g, GridKind::occupancy, std::move(values));
}

GridMap load_cost_pgm(const std::filesystem::path& path, double resolution, WorldPoint origin) {
  const auto img = decode_pgm(read_file_bytes(path));
  const GridGeometry g{img.width, img.height, resolution, origin};
  std::vector<double> values(g.cell_count());
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      values[g.offset({r, c})] = img.pixels[image_offset(g, r, c)];
    }
  }
  return GridMap(g, GridKind::cost, std::move(values));
}

PgmImage to_pgm_image(const GridMap& map) {
  if (map.kind() != GridKind::occupancy && map.kind() != GridKind::cost) {
    throw Error(ErrorCode::InvalidKind, "only occupancy and cost grids can be saved as PGM");
  }
  const auto& g = map.geometry();
  PgmImage img{g.width, g.height, std::vector<std::uint8_t>(g.cell_count())};
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const double v = map[{r, c}];
      std::uint8_t px = 0;
      if (map.kind() == GridKind::cost) {
        px = static_cast<std::uint8_t>(v);
      } else if (v == kOccupancyOccupied) {
        px = kPgmOccupied;
      } else if (v == kOccupancyFree) {
        px = kPgmFree;
      } else {
        px = kPgmUnknown;
      }
      img.pixels[image_offset(g, r, c)] = px;
    }
  }
  return img;
}

void save_pgm(const GridMap& map, const std::filesystem::path& path) {
  write_file_bytes(path, encode_pgm(to_pgm_image(map)));
}

// ---------------------------------------------------------------------------
// Text rasters

namespace {

std::string_view kind_name(GridKind kind) {
  switch (kind) {
    case GridKind::occupancy: return "occupancy";
    case GridKind::cost: return "cost";
    case GridKind::mean: return "mean";
    case GridKind::variance: return "variance";
  }
  return "unknown";
}

std::optional<GridKind> kind_from_name(std::string_view name) {
  for (auto k : {GridKind::occupancy, GridKind::cost, GridKind::mean, GridKind::variance}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

}  // namespace

void save_raster(const GridMap& map, const std::filesystem::path& path) {
  const auto& g = map.geometry();
  std::string out = "amg-raster " + std::string(kind_name(map.kind())) + " " +
                    std::to_string(g.width) + " " + std::to_string(g.height) + " " +
                    format_double(g.resolution) + " " + format_double(g.origin.x) + " " +
                    format_double(g.origin.y) + "\n";
  for (int r = g.height - 1; r >= 0; --r) {
    for (int c = 0; c < g.width; ++c) {
      if (c) out += ',';
      out += format_double(map[{r, c}]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

GridMap load_raster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty raster").with_line(1);
  std::istringstream hs(line);
  std::string magic, kind_text, res_text, ox_text, oy_text;
  GridGeometry g;
  hs >> magic >> kind_text >> g.width >> g.height >> res_text >> ox_text >> oy_text;
  const auto kind = kind_from_name(kind_text);
  const auto res = parse_double(res_text);
  const auto ox = parse_double(ox_text);
  const auto oy = parse_double(oy_text);
  if (!hs || magic != "amg-raster" || !kind || !res || !ox || !oy || g.width <= 0 || g.height <= 0) {
    throw Error(ErrorCode::ParseError, "bad raster header").with_line(1);
  }
  g.resolution = *res;
  g.origin = {*ox, *oy};
  std::vector<double> values(g.cell_count());
  for (int r = g.height - 1; r >= 0; --r) {
    const std::size_t line_no = static_cast<std::size_t>(g.height - r) + 1;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing row").with_line(line_no);
    std::size_t start = 0;
    for (int c = 0; c < g.width; ++c) {
      const auto end = c + 1 < g.width ? line.find(',', start) : line.size();
      if (end == std::string::npos) {
        throw Error(ErrorCode::ParseError, "too few columns").with_line(line_no);
      }
      const auto v = parse_double(std::string_view(line).substr(start, end - start));
      if (!v) throw Error(ErrorCode::ParseError, "bad number in column " + std::to_string(c)).with_line(line_no);
      values[g.offset({r, c})] = *v;
      start = end + 1;
    }
    if (start < line.size()) throw Error(ErrorCode::ParseError, "too many columns").with_line(line_no);
  }
  try {
    return GridMap(g, *kind, std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.detail());
  }
}

}  // namespace amg
