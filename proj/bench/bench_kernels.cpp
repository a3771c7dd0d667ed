// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "support/oracles.hpp"
#include "support/scenes.hpp"
#include "xpatch/geometry.hpp"
#include "xpatch/oracle.hpp"
#include "xpatch/optimizer.hpp"
#include "xpatch/reference.hpp"

using namespace xpatch;

namespace {

geometry::ClosedContour contour_for(int size) {
    std::mt19937_64 rng(3);
    auto anchors = testing::random_star(rng, size * 0.5, size * 0.5, size * 0.2, size * 0.45, 8);
    return geometry::close_contour(anchors, 32);
}

Image noise(int size, int channels) {
    Image img(size, size, channels);
    std::mt19937 rng(9);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    return img;
}

void BM_RasterizeSerial(benchmark::State& state) {
    int size = static_cast<int>(state.range(0));
    auto c = contour_for(size);
    for (auto _ : state) benchmark::DoNotOptimize(reference::rasterize_serial(c, size, size));
}

void BM_RasterizeParallel(benchmark::State& state) {
    int size = static_cast<int>(state.range(0));
    auto c = contour_for(size);
    for (auto _ : state) benchmark::DoNotOptimize(geometry::rasterize(c, size, size));
}

void BM_SmoothSerial(benchmark::State& state) {
    auto img = noise(static_cast<int>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(reference::median_smooth_serial(img, 3));
}

void BM_SmoothParallel(benchmark::State& state) {
    auto img = noise(static_cast<int>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(oracle::smooth(img, 3));
}

// A few DE generations on a 144x112 synthetic scene; range(0) = worker count.
void BM_PopulationEval(benchmark::State& state) {
    Box box{20, 20, 92, 124};
    auto scene = testing::make_scene(144, 112, box);
    auto sal = testing::salience(144, 112, box, [](double, double) { return 1.0; });
    auto oracles = testing::synthetic_pair(scene, sal, sal);
    RunConfig cfg;
    cfg.max_generations = 5;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            optimizer::run_attack(scene, oracles, cfg, 1, {.jobs = static_cast<int>(state.range(0)), .on_progress = {}}));
}

}  // namespace

BENCHMARK(BM_RasterizeSerial)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_RasterizeParallel)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_SmoothSerial)->Arg(128)->Arg(512);
BENCHMARK(BM_SmoothParallel)->Arg(128)->Arg(512);
BENCHMARK(BM_PopulationEval)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
