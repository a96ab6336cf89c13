#include "doctest.h"
#include "fixtures.hpp"
#include "uiground/error.hpp"
#include "uiground/imaging.hpp"

using namespace uiground;

TEST_CASE("png round trip") {
  const Image img = fixtures::gradient(37, 21);
  CHECK(decode_png(encode_png(img)) == img);

  fixtures::TempDir tmp("png");
  const auto path = (tmp.path() / "a.png").string();
  save_png(img, path);
  CHECK(load_png(path) == img);
  CHECK_THROWS_AS(load_png((tmp.path() / "missing.png").string()), InputError);
  CHECK_THROWS_AS(decode_png({1, 2, 3}), InputError);
}

TEST_CASE("crop_pair geometry") {
  const Image img = fixtures::gradient(1000, 800);
  const BBox b{200, 300, 100, 40};
  const CropPair c = crop_pair(img, b, 3.0);
  CHECK(c.isolated.width() == 100);
  CHECK(c.isolated.height() == 40);
  CHECK(c.isolated.at(0, 0) == img.at(200, 300));
  // 3x about the center (250, 320): 300x120 starting at (100, 260)
  CHECK(c.zoom_region == BBox{100, 260, 300, 120});
  CHECK(c.zoomed.width() == 300);
  CHECK(c.zoomed.height() == 120);
  // red outline drawn inside the bbox edges, 3 px thick
  const int ox = b.x - c.zoom_region.x;
  const int oy = b.y - c.zoom_region.y;
  CHECK(c.zoomed.at(ox, oy) == kRed);
  CHECK(c.zoomed.at(ox + 2, oy + 20) == kRed);
  CHECK(c.zoomed.at(ox + b.w - 1, oy + b.h - 1) == kRed);
  CHECK(c.zoomed.at(ox + 3 + 10, oy + 3 + 10) == img.at(b.x + 13, b.y + 13));
  CHECK(c.zoomed.at(0, 0) == img.at(100, 260));
}

TEST_CASE("crop_pair clamps to the image") {
  const Image img = fixtures::gradient(200, 100);
  const CropPair whole = crop_pair(img, {0, 0, 200, 100}, 3.0);
  CHECK(whole.zoom_region == BBox{0, 0, 200, 100});

  const CropPair one = crop_pair(img, {50, 20, 30, 30}, 1.0);
  CHECK(one.zoom_region == BBox{50, 20, 30, 30});

  const CropPair corner = crop_pair(img, {0, 0, 20, 20}, 3.0);
  CHECK(corner.zoom_region.x == 0);
  CHECK(corner.zoom_region.y == 0);
  CHECK(corner.zoom_region.right() >= 20);

  CHECK_THROWS_AS(crop_pair(img, {190, 90, 20, 20}), InputError);
}

TEST_CASE("plan_tiles worked plans") {
  const TilePlan a = plan_tiles({1920, 1080});
  CHECK(a.grid_cols == 2);
  CHECK(a.grid_rows == 2);
  CHECK(a.scale == 1.0);
  CHECK(a.canvas_w == 1960);
  CHECK(a.canvas_h == 1960);
  CHECK(a.tile_count() == 4);

  const TilePlan b = plan_tiles({3840, 2160});
  CHECK(b.grid_cols == 4);
  CHECK(b.grid_rows == 3);
  CHECK(b.scale == 1.0);
  CHECK(b.canvas_w == 3920);
  CHECK(b.canvas_h == 2940);

  const TilePlan c = plan_tiles({980, 980});
  CHECK(c.grid_cols == 1);
  CHECK(c.grid_rows == 1);
  CHECK(c.pad_right == 0);
  CHECK(c.pad_bottom == 0);
  CHECK(c.padding_fraction() == 0.0);
}

TEST_CASE("oversized screenshots are scaled down, never up") {
  const TilePlan p = plan_tiles({8000, 2000});
  CHECK(p.scale < 1.0);
  CHECK(p.grid_cols == 4);
  CHECK(p.content_w <= p.canvas_w);
  const TilePlan small = plan_tiles({320, 240});
  CHECK(small.scale == 1.0);
  CHECK(small.tile_count() == 1);
}

TEST_CASE("tiles: row-major, padded black, original pixels preserved") {
  const Image img = fixtures::gradient(1920, 1080);
  const TilePlan plan = plan_tiles(img.viewport());
  const auto tiles = tile(img, plan);
  REQUIRE(tiles.size() == 4);
  CHECK(tiles[0].row == 0);
  CHECK(tiles[0].col == 0);
  CHECK(tiles[1].row == 0);
  CHECK(tiles[1].col == 1);
  CHECK(tiles[2].row == 1);
  CHECK(tiles[0].pixels.width() == kTileSide);
  CHECK(tiles[0].pixels.at(5, 7) == img.at(5, 7));
  CHECK(tiles[3].pixels.at(0, 0) == img.at(980, 980));
  CHECK(tiles[3].pixels.at(979, 979) == kBlack);
  CHECK(tile_filename("p1", 1, 0) == "p1_tile_1_0.png");
  CHECK_THROWS_AS(tile(fixtures::gradient(10, 10), plan), InputError);
}

TEST_CASE("single tile equals the padded input") {
  const Image img = fixtures::gradient(980, 980);
  const auto tiles = tile(img, plan_tiles(img.viewport()));
  REQUIRE(tiles.size() == 1);
  CHECK(tiles[0].pixels == img);
}

TEST_CASE("canvas coordinate mapping") {
  const TilePlan one = plan_tiles({1920, 1080});
  CHECK(original_to_canvas({123.5, 77}, one) == PixelPoint{123.5, 77});

  TilePlan half = one;
  half.scale = 0.5;
  const auto p = original_to_canvas({1000, 500}, half);
  CHECK(p.x == doctest::Approx(500));
  CHECK(p.y == doctest::Approx(250));

  const TilePlan big = plan_tiles({7000, 2500});
  for (double x : {0.0, 1.0, 3333.3, 6999.9}) {
    const auto back = canvas_to_original(original_to_canvas({x, x / 3}, big), big);
    CHECK(std::abs(back.x - x) < 1e-9);
    CHECK(std::abs(back.y - x / 3) < 1e-9);
  }
}

TEST_CASE("bilinear resize keeps flat colors") {
  Image img(10, 10, Rgb{10, 20, 30});
  const Image r = resize_bilinear(img, 4, 7);
  CHECK(r.width() == 4);
  CHECK(r.height() == 7);
  CHECK(r.at(3, 6) == Rgb{10, 20, 30});
}
