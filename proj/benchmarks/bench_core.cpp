#include <benchmark/benchmark.h>

#include <random>

#include "spotlight/guidance.hpp"
#include "spotlight/imagecore.hpp"
#include "spotlight/metrics.hpp"
#include "spotlight/shadowsynth.hpp"
#include "spotlight/toy_denoiser.hpp"
#include "spotlight/wire.hpp"

using namespace spotlight;

namespace {

PixelMap noise_image(int w, int h, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PixelMap img(w, h, c);
    for (double& v : img.data()) {
        v = u(rng);
    }
    return img;
}

MaskMap rect(int w, int h, int x0, int y0, int x1, int y1) {
    MaskMap m(w, h);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            m.at(x, y) = 1.0;
        }
    }
    return m;
}

SceneBundle square_scene(int n) {
    SceneBundle s;
    s.background = noise_image(n, n, 3, 1);
    s.albedo = noise_image(n, n, 3, 2);
    s.object_mask = rect(n, n, n / 3, n / 3, n / 2, n / 2);
    s.shadow_positive = rect(n, n, n / 2, n / 2 - n / 16, n / 2 + n / 8, n / 2);
    s.shadow_negative = rect(n, n, n / 3 - n / 8, n / 2 - n / 16, n / 3, n / 2);
    return s;
}

}  // namespace

static void BM_SamplerToy(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const SceneBundle scene = square_scene(n);
    GuidanceConfig cfg;
    cfg.steps = 10;
    ToyDenoiser toy;
    IdentityCodec codec;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_sampler(scene, cfg, toy, codec));
    }
    state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_SamplerToy)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Dilate33(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const MaskMap m = rect(n, n, n / 4, n / 4, n / 2, n / 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dilate_mask(m, 33));
    }
}
BENCHMARK(BM_Dilate33)->Arg(256)->Arg(512);

static void BM_ShadowMapDirectional(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    GroundFrame frame;
    frame.up = {0.0, 0.0, -1.0};
    frame.reference = {1.0, 0.0, 0.0};
    PixelMap ground(n, n, 1, ColorSpace::linear, 4.0);
    PixelMap object(n, n, 1, ColorSpace::linear, 0.0);
    const MaskMap mask = rect(n, n, 3 * n / 8, 3 * n / 8, 5 * n / 8, 5 * n / 8);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if (mask.at(x, y) > 0.0) {
                object.at(x, y, 0) = 3.6;
            }
        }
    }
    const Heightfield g = backproject_depth(ground, 50.0);
    const Heightfield o = backproject_depth(object, 50.0);
    const DirectionalLight light = DirectionalLight::from_angles(30.0, 40.0, frame);
    for (auto _ : state) {
        benchmark::DoNotOptimize(shadow_map_directional(g, o, mask, light, frame));
    }
}
BENCHMARK(BM_ShadowMapDirectional)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_SoftShadowPointLight(benchmark::State& state) {
    const int n = 128;
    const MaskMap mask = rect(n, n, 50, 40, 70, 90);
    const PixelHeightMap heights = pixel_height_estimate(mask);
    const PointLight2D light{30.0, 10.0, 120.0, 6.0};
    const int samples = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(soft_shadow_point_light(mask, heights, light, samples));
    }
}
BENCHMARK(BM_SoftShadowPointLight)->Arg(1)->Arg(16);

static void BM_Ssim(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const PixelMap a = noise_image(n, n, 3, 3);
    const PixelMap b = noise_image(n, n, 3, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pixel_metrics(a, b));
    }
}
BENCHMARK(BM_Ssim)->Arg(128)->Arg(256);

static void BM_WireTensorRoundTrip(benchmark::State& state) {
    wire::Tensor t;
    t.dims = {4, 64, 64};
    t.data.assign(4 * 64 * 64, 0.5f);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wire::decode_tensor(wire::encode_tensor(t)));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(t.data.size() * sizeof(float)));
}
BENCHMARK(BM_WireTensorRoundTrip);

BENCHMARK_MAIN();
