#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uiground/geometry.hpp"

namespace uiground {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kRed{255, 0, 0};

// 8-bit RGB, row-major, owned.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = kBlack);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }
  Viewport viewport() const noexcept { return {width_, height_}; }

  Rgb at(int x, int y) const { return pixels_[index(x, y)]; }
  void set(int x, int y, Rgb c) { pixels_[index(x, y)] = c; }
  void fill_rect(const BBox& r, Rgb c);

  const std::vector<Rgb>& pixels() const noexcept { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

Image load_png(const std::string& path);
void save_png(const Image& img, const std::string& path);
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(const std::vector<std::uint8_t>& bytes);

// Throws InputError when r is empty or not inside img.
Image crop(const Image& img, const BBox& r);

// Bilinear resample to the target size.
Image resize_bilinear(const Image& img, int width, int height);

// Draws a stroke of the given width along the inside of r's edges.
void draw_rect_outline(Image& img, const BBox& r, int stroke, Rgb color);

inline constexpr double kDefaultZoomFactor = 3.0;
inline constexpr int kHighlightStroke = 3;

struct CropPair {
  Image isolated;
  Image zoomed;
  // Region of the source image covered by `zoomed`.
  BBox zoom_region;
};

// b scaled by `factor` about its center, clamped to the image.
BBox expand_box(const BBox& b, double factor, const Viewport& bounds);

// isolated = img[b]; zoomed = img[expand_box(b)] with a red outline on b.
CropPair crop_pair(const Image& img, const BBox& b, double zoom_factor = kDefaultZoomFactor);

inline constexpr int kTileSide = 980;
inline constexpr int kMaxGridCols = 4;
inline constexpr int kMaxGridRows = 3;

struct TilePlan {
  int grid_cols = 1;
  int grid_rows = 1;
  double scale = 1.0;
  int canvas_w = kTileSide;
  int canvas_h = kTileSide;
  // Source image size the plan was computed for.
  int source_w = 0;
  int source_h = 0;
  // Content size after scaling; placed at the canvas origin.
  int content_w = 0;
  int content_h = 0;
  int pad_right = 0;
  int pad_bottom = 0;

  int tile_count() const noexcept { return grid_cols * grid_rows; }
  double padding_fraction() const noexcept;
};

// Enumerates every grid up to 4x3 blocks and keeps the one with the largest
// uniform scale (never above 1), then the least padding, fewer tiles, fewer columns.
TilePlan plan_tiles(const Viewport& v);

struct Tile {
  int col = 0;
  int row = 0;
  Image pixels;
  PixelPoint origin_on_canvas;
};

// Scaled content at the top-left, black padding right and bottom.
Image render_canvas(const Image& img, const TilePlan& plan);

// Row-major kTileSide x kTileSide tiles. Throws InputError when img does not
// match the plan's source size.
std::vector<Tile> tile(const Image& img, const TilePlan& plan);

// "{page_id}_tile_{row}_{col}.png"
std::string tile_filename(const std::string& page_id, int row, int col);

PixelPoint original_to_canvas(const PixelPoint& p, const TilePlan& plan) noexcept;
PixelPoint canvas_to_original(const PixelPoint& p, const TilePlan& plan) noexcept;

}  // namespace uiground
