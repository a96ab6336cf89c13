#include "uiground/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "uiground/error.hpp"

namespace uiground {

namespace {

std::string box_text(const BBox& r) {
  std::ostringstream os;
  os << "[" << r.x << ", " << r.y << ", " << r.w << ", " << r.h << "]";
  return os.str();
}

std::vector<std::uint8_t> to_bytes(const Image& img) {
  std::vector<std::uint8_t> raw(img.pixels().size() * 3);
  std::size_t i = 0;
  for (const Rgb& p : img.pixels()) {
    raw[i++] = p.r;
    raw[i++] = p.g;
    raw[i++] = p.b;
  }
  return raw;
}

Image from_bytes(int w, int h, const std::vector<std::uint8_t>& raw) {
  Image img(w, h);
  std::size_t i = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, {raw[i], raw[i + 1], raw[i + 2]});
      i += 3;
    }
  }
  return img;
}

}  // namespace

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InputError("negative image size");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

void Image::fill_rect(const BBox& r, Rgb c) {
  const auto clipped = clamp_to_viewport(r, viewport());
  if (!clipped) return;
  for (int y = clipped->y; y < clipped->bottom(); ++y) {
    std::fill_n(pixels_.begin() + static_cast<std::ptrdiff_t>(index(clipped->x, y)), clipped->w, c);
  }
}

Image load_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw InputError("cannot read PNG " + path + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw InputError("cannot decode PNG " + path + ": " + msg);
  }
  return from_bytes(static_cast<int>(image.width), static_cast<int>(image.height), raw);
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw InputError(std::string("cannot read PNG bytes: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw InputError("cannot decode PNG bytes: " + msg);
  }
  return from_bytes(static_cast<int>(image.width), static_cast<int>(image.height), raw);
}

void save_png(const Image& img, const std::string& path) {
  if (img.empty()) throw InputError("refusing to write empty image to " + path);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  const auto raw = to_bytes(img);
  if (!png_image_write_to_file(&image, path.c_str(), 0, raw.data(), 0, nullptr)) {
    throw InputError("cannot write PNG " + path + ": " + image.message);
  }
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.empty()) throw InputError("cannot encode empty image");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  const auto raw = to_bytes(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw InputError(std::string("cannot size PNG: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw InputError(std::string("cannot encode PNG: ") + image.message);
  }
  out.resize(size);
  return out;
}

Image crop(const Image& img, const BBox& r) {
  if (r.w <= 0 || r.h <= 0) throw InputError("degenerate crop box " + box_text(r));
  if (!r.inside(img.viewport())) {
    throw OutOfBoundsError("crop box " + box_text(r) + " outside image " +
                           std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  Image out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) out.set(x, y, img.at(r.x + x, r.y + y));
  }
  return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("resize target must be positive");
  if (img.empty()) throw InputError("cannot resize empty image");
  if (width == img.width() && height == img.height()) return img;
  Image out(width, height);
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - x0;
      const Rgb a = img.at(x0, y0), b = img.at(x1, y0), c = img.at(x0, y1), d = img.at(x1, y1);
      auto mix = [&](std::uint8_t pa, std::uint8_t pb, std::uint8_t pc, std::uint8_t pd) {
        const double top = pa + (pb - pa) * wx;
        const double bot = pc + (pd - pc) * wx;
        return static_cast<std::uint8_t>(std::lround(top + (bot - top) * wy));
      };
      out.set(x, y, {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g), mix(a.b, b.b, c.b, d.b)});
    }
  }
  return out;
}

void draw_rect_outline(Image& img, const BBox& r, int stroke, Rgb color) {
  if (stroke <= 0 || r.w <= 0 || r.h <= 0) return;
  const int sw = std::min(stroke, r.w);
  const int sh = std::min(stroke, r.h);
  img.fill_rect({r.x, r.y, r.w, sh}, color);
  img.fill_rect({r.x, r.bottom() - sh, r.w, sh}, color);
  img.fill_rect({r.x, r.y, sw, r.h}, color);
  img.fill_rect({r.right() - sw, r.y, sw, r.h}, color);
}

BBox expand_box(const BBox& b, double factor, const Viewport& bounds) {
  const double cx = b.x + b.w / 2.0;
  const double cy = b.y + b.h / 2.0;
  const double hw = b.w * factor / 2.0;
  const double hh = b.h * factor / 2.0;
  const int x0 = std::max(0, static_cast<int>(std::lround(cx - hw)));
  const int y0 = std::max(0, static_cast<int>(std::lround(cy - hh)));
  const int x1 = std::min(bounds.width, static_cast<int>(std::lround(cx + hw)));
  const int y1 = std::min(bounds.height, static_cast<int>(std::lround(cy + hh)));
  // The expanded box always contains b, even after rounding.
  BBox out{std::min(x0, b.x), std::min(y0, b.y), 0, 0};
  out.w = std::max(x1, b.right()) - out.x;
  out.h = std::max(y1, b.bottom()) - out.y;
  return out;
}

CropPair crop_pair(const Image& img, const BBox& b, double zoom_factor) {
  if (b.w <= 0 || b.h <= 0) throw InputError("degenerate element box " + box_text(b));
  if (!(zoom_factor >= 1.0)) throw InputError("zoom factor must be >= 1");
  CropPair out;
  out.isolated = crop(img, b);
  out.zoom_region = expand_box(b, zoom_factor, img.viewport());
  out.zoomed = crop(img, out.zoom_region);
  const BBox local{b.x - out.zoom_region.x, b.y - out.zoom_region.y, b.w, b.h};
  draw_rect_outline(out.zoomed, local, kHighlightStroke, kRed);
  return out;
}

double TilePlan::padding_fraction() const noexcept {
  const double content = scale * source_w * scale * source_h;
  return 1.0 - content / (static_cast<double>(canvas_w) * canvas_h);
}

TilePlan plan_tiles(const Viewport& v) {
  v.validate();
  TilePlan best;
  bool have = false;
  for (int c = 1; c <= kMaxGridCols; ++c) {
    for (int r = 1; r <= kMaxGridRows; ++r) {
      TilePlan p;
      p.grid_cols = c;
      p.grid_rows = r;
      p.canvas_w = c * kTileSide;
      p.canvas_h = r * kTileSide;
      p.source_w = v.width;
      p.source_h = v.height;
      p.scale = std::min({1.0, static_cast<double>(p.canvas_w) / v.width,
                          static_cast<double>(p.canvas_h) / v.height});
      if (!have) {
        best = p;
        have = true;
        continue;
      }
      constexpr double kEps = 1e-12;
      if (p.scale > best.scale + kEps) {
        best = p;
      } else if (std::abs(p.scale - best.scale) <= kEps) {
        const double pf = p.padding_fraction();
        const double bf = best.padding_fraction();
        if (pf < bf - kEps ||
            (std::abs(pf - bf) <= kEps &&
             (p.tile_count() < best.tile_count() ||
              (p.tile_count() == best.tile_count() && p.grid_cols < best.grid_cols)))) {
          best = p;
        }
      }
    }
  }
  best.content_w = std::clamp(static_cast<int>(std::lround(best.scale * v.width)), 1, best.canvas_w);
  best.content_h =
      std::clamp(static_cast<int>(std::lround(best.scale * v.height)), 1, best.canvas_h);
  best.pad_right = best.canvas_w - best.content_w;
  best.pad_bottom = best.canvas_h - best.content_h;
  return best;
}

Image render_canvas(const Image& img, const TilePlan& plan) {
  if (img.width() != plan.source_w || img.height() != plan.source_h) {
    std::ostringstream os;
    os << "image " << img.width() << "x" << img.height() << " does not match tile plan for "
       << plan.source_w << "x" << plan.source_h;
    throw InputError(os.str());
  }
  const Image content = resize_bilinear(img, plan.content_w, plan.content_h);
  Image canvas(plan.canvas_w, plan.canvas_h, kBlack);
  for (int y = 0; y < content.height(); ++y) {
    for (int x = 0; x < content.width(); ++x) canvas.set(x, y, content.at(x, y));
  }
  return canvas;
}

std::vector<Tile> tile(const Image& img, const TilePlan& plan) {
  const Image canvas = render_canvas(img, plan);
  std::vector<Tile> tiles;
  tiles.reserve(static_cast<std::size_t>(plan.tile_count()));
  for (int row = 0; row < plan.grid_rows; ++row) {
    for (int col = 0; col < plan.grid_cols; ++col) {
      const BBox region{col * kTileSide, row * kTileSide, kTileSide, kTileSide};
      tiles.push_back({col, row, crop(canvas, region),
                       {static_cast<double>(region.x), static_cast<double>(region.y)}});
    }
  }
  return tiles;
}

std::string tile_filename(const std::string& page_id, int row, int col) {
  return page_id + "_tile_" + std::to_string(row) + "_" + std::to_string(col) + ".png";
}

PixelPoint original_to_canvas(const PixelPoint& p, const TilePlan& plan) noexcept {
  return {p.x * plan.scale, p.y * plan.scale};
}

PixelPoint canvas_to_original(const PixelPoint& p, const TilePlan& plan) noexcept {
  return {p.x / plan.scale, p.y / plan.scale};
}

}  // namespace uiground
