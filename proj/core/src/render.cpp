#include "amg/render.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>

#include <png.h>

#include "amg/error.hpp"
#include "amg/map_io.hpp"

namespace amg {

std::array<std::uint8_t, 3> RgbImage::pixel(int x, int y) const {
  const auto off = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                        static_cast<std::size_t>(x));
  return {rgb[off], rgb[off + 1], rgb[off + 2]};
}

GridMap mean_visual(const GridMap& mean) {
  std::vector<double> v(mean.values().size());
  std::transform(mean.values().begin(), mean.values().end(), v.begin(),
                 [](double m) { return round_half_up(255.0 * std::clamp(m, 0.0, 1.0)); });
  return GridMap(mean.geometry(), GridKind::cost, std::move(v));
}

GridMap variance_visual(const GridMap& variance, double signal_variance) {
  if (!(signal_variance > 0.0)) throw Error(ErrorCode::InvalidArgument, "signal_variance must be > 0");
  std::vector<double> v(variance.values().size());
  std::transform(variance.values().begin(), variance.values().end(), v.begin(), [&](double s) {
    return round_half_up(255.0 * std::clamp(s / signal_variance, 0.0, 1.0));
  });
  return GridMap(variance.geometry(), GridKind::cost, std::move(v));
}

RgbImage compose_overlay(const CostLayer& geometric, const std::vector<const CostLayer*>& abstraction,
                         const Path* path) {
  const auto& g = geometric.grid.geometry();
  for (const auto* layer : abstraction) {
    if (!(layer->grid.geometry() == g)) {
      throw Error(ErrorCode::AlignmentError, "layer '" + layer->tag + "' is not aligned");
    }
  }
  RgbImage img{g.width, g.height, std::vector<std::uint8_t>(3 * g.cell_count())};
  const auto put = [&](int row, int col, std::array<std::uint8_t, 3> px) {
    const int y = g.height - 1 - row;
    const auto off = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(g.width) +
                          static_cast<std::size_t>(col));
    std::copy(px.begin(), px.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(off));
  };
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const int geo = static_cast<int>(geometric.grid[{r, c}]);
      const int base = 255 - (geo * 191) / 255;
      int tint = 0;
      for (const auto* layer : abstraction) tint = std::max(tint, static_cast<int>(layer->grid[{r, c}]));
      const auto other = static_cast<std::uint8_t>(base * (255 - tint) / 255);
      put(r, c, {static_cast<std::uint8_t>(base), other, other});
    }
  }
  if (path) {
    for (const auto& cell : path->cells) {
      if (!g.contains(cell)) throw Error(ErrorCode::OutOfBounds, "path cell outside overlay");
      put(cell.row, cell.col, kPathColor);
    }
  }
  return img;
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

void png_warn(png_structp, png_const_charp) {}

// Separate frame so that setjmp/longjmp skip no C++ destructors.
bool write_png_rows(png_structp png, png_infop info, const RgbImage& image,
                    std::vector<std::uint8_t>* out) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, out, png_append, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = 3 * static_cast<std::size_t>(image.width);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.rgb.data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != 3 * static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height)) {
    throw Error(ErrorCode::InvalidArgument, "malformed RGB image");
  }
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
  if (!png) throw Error(ErrorCode::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  const bool ok = info && write_png_rows(png, info, image, &out);
  png_destroy_write_struct(&png, info ? &info : nullptr);
  if (!ok) throw Error(ErrorCode::IoError, "PNG encoding failed");
  return out;
}

void render(const RenderInputs& inputs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (inputs.fused) save_pgm(*inputs.fused, dir / "fused.pgm");
  std::vector<const CostLayer*> tints;
  for (const auto& layer : inputs.layers) {
    if (!layer.cost) continue;
    tints.push_back(layer.cost);
    if (layer.mean) save_pgm(mean_visual(*layer.mean), dir / (layer.cost->tag + "_mean.pgm"));
    if (layer.variance) {
      save_pgm(variance_visual(*layer.variance, inputs.signal_variance),
               dir / (layer.cost->tag + "_variance.pgm"));
    }
  }
  if (inputs.geometric) {
    write_file_bytes(dir / "overlay.png", encode_png(compose_overlay(*inputs.geometric, tints, inputs.path)));
  }
}

}  // namespace amg
