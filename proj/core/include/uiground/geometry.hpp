#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace uiground {

// Largest normalized coordinate. The range is inclusive: [0, kNormMax].
inline constexpr int kNormMax = 1000;

enum class Platform { Web, Mobile, Desktop };

std::string_view to_string(Platform p) noexcept;
std::optional<Platform> parse_platform(std::string_view s) noexcept;

struct Viewport {
  int width = 0;
  int height = 0;

  bool valid() const noexcept { return width >= 1 && height >= 1; }
  // Throws InputError when either side is < 1.
  void validate() const;

  friend bool operator==(const Viewport&, const Viewport&) = default;
};

// Device pixels.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct NormPoint {
  int x = 0;
  int y = 0;

  bool valid() const noexcept {
    return x >= 0 && x <= kNormMax && y >= 0 && y <= kNormMax;
  }

  friend bool operator==(const NormPoint&, const NormPoint&) = default;
};

// Device-pixel box, top-left corner plus extent.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const noexcept { return x + w; }
  int bottom() const noexcept { return y + h; }
  PixelPoint center() const noexcept { return {x + w / 2.0, y + h / 2.0}; }
  bool inside(const Viewport& v) const noexcept {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && right() <= v.width && bottom() <= v.height;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct NormBBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool valid() const noexcept {
    return x0 >= 0 && y0 >= 0 && x1 <= kNormMax && y1 <= kNormMax && x0 < x1 && y0 < y1;
  }
  NormPoint center() const noexcept { return {(x0 + x1) / 2, (y0 + y1) / 2}; }

  friend bool operator==(const NormBBox&, const NormBBox&) = default;
};

bool point_within(const PixelPoint& p, const Viewport& v) noexcept;

// round(1000 * p / extent), half away from zero, clamped to [0, 1000].
// Throws OutOfBoundsError when p lies outside v.
NormPoint normalize_point(const PixelPoint& p, const Viewport& v);

PixelPoint denormalize_point(const NormPoint& n, const Viewport& v);

// Inclusive on every edge.
bool point_in_bbox(const NormPoint& n, const NormBBox& b) noexcept;

// Normalizes both corners. A box that collapses to zero extent after
// rounding is widened by one unit so the result stays a valid NormBBox.
NormBBox normalize_bbox(const BBox& b, const Viewport& v);

// Normalized pixel center of b; always inside normalize_bbox(b, v).
NormPoint normalized_center(const BBox& b, const Viewport& v);

// Intersects b with the viewport; nullopt when nothing is left.
std::optional<BBox> clamp_to_viewport(const BBox& b, const Viewport& v) noexcept;

}  // namespace uiground
