#include <benchmark/benchmark.h>

#include "uiground/assemble.hpp"
#include "uiground/eval.hpp"
#include "uiground/geometry.hpp"
#include "uiground/imaging.hpp"
#include "uiground/random.hpp"

using namespace uiground;

static void BM_NormalizePoint(benchmark::State& state) {
  Rng rng(1);
  const Viewport v{1920, 1080};
  std::vector<PixelPoint> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back({rng.unit() * v.width, rng.unit() * v.height});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normalize_point(pts[i++ & 1023], v));
  }
}
BENCHMARK(BM_NormalizePoint);

static void BM_PlanTiles(benchmark::State& state) {
  int w = 320;
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_tiles({w, 2160}));
    w = w >= 4000 ? 320 : w + 80;
  }
}
BENCHMARK(BM_PlanTiles);

static void BM_ParsePrediction(benchmark::State& state) {
  const std::string reply = "Looking at the toolbar, the save icon sits at (512, 340) near the top.";
  for (auto _ : state) benchmark::DoNotOptimize(parse_prediction(reply));
}
BENCHMARK(BM_ParsePrediction);

static void BM_CropPair(benchmark::State& state) {
  const Image img(1280, 800, Rgb{200, 200, 200});
  const BBox b{600, 380, 80, 40};
  for (auto _ : state) benchmark::DoNotOptimize(crop_pair(img, b));
}
BENCHMARK(BM_CropPair);

static void BM_TileCanvas(benchmark::State& state) {
  const Image img(3840, 2160, Rgb{10, 20, 30});
  const TilePlan plan = plan_tiles({3840, 2160});
  for (auto _ : state) benchmark::DoNotOptimize(tile(img, plan));
}
BENCHMARK(BM_TileCanvas)->Unit(benchmark::kMillisecond);

static void BM_GroupConversations(benchmark::State& state) {
  std::vector<GroundingSample> samples;
  for (int i = 0; i < state.range(0); ++i) {
    GroundingSample g;
    g.sample_id = "s" + std::to_string(i);
    g.image_refs = {"img" + std::to_string(i % 50) + ".png"};
    g.query = "the button labelled " + std::to_string(i);
    g.target_point = {i % 1001, (7 * i) % 1001};
    g.source = "web";
    samples.push_back(std::move(g));
  }
  for (auto _ : state) benchmark::DoNotOptimize(group_all(samples, 3));
}
BENCHMARK(BM_GroupConversations)->Arg(1000)->Arg(10000);
BENCHMARK_MAIN();
