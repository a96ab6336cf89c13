#include "uiground/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uiground/error.hpp"

namespace uiground {

const char* to_string(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Input: return "input";
    case ErrorCategory::Client: return "client";
    case ErrorCategory::Invariant: return "invariant";
  }
  return "unknown";
}

std::string_view to_string(Platform p) noexcept {
  switch (p) {
    case Platform::Web: return "web";
    case Platform::Mobile: return "mobile";
    case Platform::Desktop: return "desktop";
  }
  return "web";
}

std::optional<Platform> parse_platform(std::string_view s) noexcept {
  if (s == "web") return Platform::Web;
  if (s == "mobile") return Platform::Mobile;
  if (s == "desktop") return Platform::Desktop;
  return std::nullopt;
}

void Viewport::validate() const {
  if (!valid()) {
    std::ostringstream os;
    os << "invalid viewport " << width << "x" << height;
    throw InputError(os.str());
  }
}

bool point_within(const PixelPoint& p, const Viewport& v) noexcept {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= v.width && p.y <= v.height;
}

namespace {

int normalize_axis(double value, int extent) {
  // std::round rounds half away from zero.
  const double scaled = std::round(static_cast<double>(kNormMax) * value / extent);
  return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(kNormMax)));
}

void widen(int& lo, int& hi) {
  if (lo < hi) return;
  if (hi < kNormMax) {
    hi = lo + 1;
  } else {
    lo = hi - 1;
  }
}

}  // namespace

NormPoint normalize_point(const PixelPoint& p, const Viewport& v) {
  v.validate();
  if (!point_within(p, v)) {
    std::ostringstream os;
    os << "point (" << p.x << ", " << p.y << ") outside viewport " << v.width << "x" << v.height;
    throw OutOfBoundsError(os.str());
  }
  return {normalize_axis(p.x, v.width), normalize_axis(p.y, v.height)};
}

PixelPoint denormalize_point(const NormPoint& n, const Viewport& v) {
  if (!n.valid()) {
    std::ostringstream os;
    os << "normalized point (" << n.x << ", " << n.y << ") outside [0, " << kNormMax << "]";
    throw OutOfBoundsError(os.str());
  }
  v.validate();
  return {static_cast<double>(n.x) * v.width / kNormMax,
          static_cast<double>(n.y) * v.height / kNormMax};
}

bool point_in_bbox(const NormPoint& n, const NormBBox& b) noexcept {
  return b.x0 <= n.x && n.x <= b.x1 && b.y0 <= n.y && n.y <= b.y1;
}

NormBBox normalize_bbox(const BBox& b, const Viewport& v) {
  if (!b.inside(v)) {
    std::ostringstream os;
    os << "box [" << b.x << ", " << b.y << ", " << b.w << ", " << b.h << "] outside viewport "
       << v.width << "x" << v.height;
    throw OutOfBoundsError(os.str());
  }
  NormBBox out{normalize_axis(b.x, v.width), normalize_axis(b.y, v.height),
               normalize_axis(b.right(), v.width), normalize_axis(b.bottom(), v.height)};
  widen(out.x0, out.x1);
  widen(out.y0, out.y1);
  return out;
}

NormPoint normalized_center(const BBox& b, const Viewport& v) {
  return normalize_point(b.center(), v);
}

std::optional<BBox> clamp_to_viewport(const BBox& b, const Viewport& v) noexcept {
  const int x0 = std::max(b.x, 0);
  const int y0 = std::max(b.y, 0);
  const int x1 = std::min(b.right(), v.width);
  const int y1 = std::min(b.bottom(), v.height);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace uiground
