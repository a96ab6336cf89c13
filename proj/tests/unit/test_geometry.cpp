#include <cmath>

#include "doctest.h"
#include "uiground/error.hpp"
#include "uiground/geometry.hpp"
#include "uiground/random.hpp"

using namespace uiground;

TEST_CASE("normalize_point worked examples") {
  CHECK(normalize_point({960, 540}, {1920, 1080}) == NormPoint{500, 500});
  CHECK(normalize_point({0, 0}, {1920, 1080}) == NormPoint{0, 0});
  CHECK(normalize_point({0, 0}, {7, 3}) == NormPoint{0, 0});
  CHECK(normalize_point({1920, 1080}, {1920, 1080}) == NormPoint{1000, 1000});
}

TEST_CASE("normalize_point rounds half away from zero") {
  // 1000 * 1 / 2000 = 0.5 -> 1
  CHECK(normalize_point({1, 1}, {2000, 2000}) == NormPoint{1, 1});
  // 1000 * 3 / 2000 = 1.5 -> 2
  CHECK(normalize_point({3, 3}, {2000, 2000}) == NormPoint{2, 2});
  // 0.4999 stays 0
  CHECK(normalize_point({0.9998, 0}, {2000, 2000}).x == 0);
}

TEST_CASE("normalize_point rejects points outside the viewport") {
  CHECK_THROWS_AS(normalize_point({-1, 0}, {100, 100}), OutOfBoundsError);
  CHECK_THROWS_AS(normalize_point({0, 100.5}, {100, 100}), OutOfBoundsError);
  CHECK_THROWS_AS(normalize_point({10, 10}, {0, 100}), InputError);
}

TEST_CASE("denormalize_point worked examples") {
  const auto a = denormalize_point({500, 500}, {1920, 1080});
  CHECK(a.x == doctest::Approx(960));
  CHECK(a.y == doctest::Approx(540));
  const auto b = denormalize_point({1000, 1000}, {1000, 1000});
  CHECK(b.x == doctest::Approx(1000));
  const auto c = denormalize_point({333, 667}, {1920, 1080});
  CHECK(c.x == doctest::Approx(639.36));
  CHECK(c.y == doctest::Approx(720.36));
}

TEST_CASE("point_in_bbox is boundary inclusive") {
  const NormBBox b{400, 450, 600, 550};
  CHECK(point_in_bbox({500, 500}, b));
  CHECK(point_in_bbox({400, 450}, b));
  CHECK(point_in_bbox({600, 550}, b));
  CHECK_FALSE(point_in_bbox({399, 500}, b));
  CHECK_FALSE(point_in_bbox({500, 551}, b));
}

TEST_CASE("center of every valid box is inside it") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const int x0 = static_cast<int>(rng.between(0, 999));
    const int y0 = static_cast<int>(rng.between(0, 999));
    const NormBBox b{x0, y0, static_cast<int>(rng.between(x0 + 1, 1000)),
                     static_cast<int>(rng.between(y0 + 1, 1000))};
    REQUIRE(b.valid());
    CHECK(point_in_bbox(b.center(), b));
  }
}

TEST_CASE("normalize_bbox keeps a non-degenerate box") {
  const NormBBox n = normalize_bbox({0, 0, 1, 1}, {4000, 3000});
  CHECK(n.valid());
  CHECK(n.x0 < n.x1);
  CHECK(n.y0 < n.y1);
  CHECK(normalize_bbox({960, 540, 960, 540}, {1920, 1080}) == NormBBox{500, 500, 1000, 1000});
}

TEST_CASE("clamp_to_viewport") {
  const Viewport v{100, 80};
  CHECK(clamp_to_viewport({-10, -10, 30, 30}, v) == BBox{0, 0, 20, 20});
  CHECK(clamp_to_viewport({90, 70, 30, 30}, v) == BBox{90, 70, 10, 10});
  CHECK_FALSE(clamp_to_viewport({100, 0, 10, 10}, v).has_value());
  CHECK_FALSE(clamp_to_viewport({0, 0, 0, 10}, v).has_value());
}

TEST_CASE("platform names round-trip") {
  for (auto p : {Platform::Web, Platform::Mobile, Platform::Desktop}) {
    CHECK(parse_platform(to_string(p)) == p);
  }
  CHECK_FALSE(parse_platform("tv").has_value());
}
