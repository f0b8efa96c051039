#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spotlight/error.hpp"
#include "spotlight/guidance.hpp"
#include "spotlight/toy_denoiser.hpp"

using namespace spotlight;

namespace {

GuidanceConfig small_config(std::uint64_t seed) {
    GuidanceConfig cfg;
    cfg.steps = 20;
    cfg.seed = seed;
    return cfg;
}

// Wraps a denoiser and records every call, to check per-step locality.
class Recorder final : public Denoiser {
public:
    explicit Recorder(Denoiser& inner) : inner_(inner) {}
    PredictionKind prediction_kind() const noexcept override { return inner_.prediction_kind(); }
    LatentTensor denoise(const LatentTensor& z, const BranchInputs& in, int t, Branch b) override {
        LatentTensor out = inner_.denoise(z, in, t, b);
        (b == Branch::positive ? pos : neg).push_back(out);
        return out;
    }
    std::vector<LatentTensor> pos;
    std::vector<LatentTensor> neg;

private:
    Denoiser& inner_;
};

class Failing final : public Denoiser {
public:
    PredictionKind prediction_kind() const noexcept override { return PredictionKind::v; }
    LatentTensor denoise(const LatentTensor& z, const BranchInputs&, int, Branch) override {
        if (++calls > 6) {
            throw Error("model exploded");
        }
        return LatentTensor(z.channels(), z.height(), z.width());
    }
    int calls = 0;
};

class NanDenoiser final : public Denoiser {
public:
    PredictionKind prediction_kind() const noexcept override { return PredictionKind::v; }
    LatentTensor denoise(const LatentTensor& z, const BranchInputs&, int, Branch) override {
        return LatentTensor(z.channels(), z.height(), z.width(), std::nanf(""));
    }
};

}  // namespace

TEST_CASE("blend_shadow_latents") {
    const NoiseSchedule s = NoiseSchedule::make(1000, 50);
    std::mt19937_64 rng(1);
    const LatentTensor z = oracle::random_latent(rng, 3, 6, 5);
    const LatentTensor g = oracle::random_latent(rng, 3, 6, 5);
    NormalStream n1(0, StreamPurpose::blend_noise);
    CHECK(blend_shadow_latents(z, g, MaskMap(5, 6, 1.0), s, 500, 0.0, n1) == z);
    CHECK(blend_shadow_latents(z, g, MaskMap(5, 6), s, 500, 0.05, n1) == z);

    // At t where ᾱ is taken as 1 the noised target is g itself; use a target
    // of 1 and a latent of 0 in a single cell.
    NormalStream n2(0, StreamPurpose::blend_noise);
    const LatentTensor zero(1, 1, 1, 0.0f);
    const LatentTensor one(1, 1, 1, 1.0f);
    NormalStream probe(0, StreamPurpose::blend_noise);
    const double eps = probe.next();
    const double ab = s.alpha_bar(0);
    const double noised = std::sqrt(ab) * 1.0 + std::sqrt(1.0 - ab) * static_cast<float>(eps);
    const LatentTensor out = blend_shadow_latents(zero, one, MaskMap(1, 1, 1.0), s, 0, 0.05, n2);
    CHECK(out.at(0, 0, 0) == doctest::Approx(0.05 * noised).epsilon(1e-6));

    CHECK_THROWS_AS(blend_shadow_latents(z, g, MaskMap(4, 6), s, 500, 0.05, n1), DimensionMismatch);
}

TEST_CASE("masked_guidance") {
    std::mt19937_64 rng(2);
    const VPrediction vp{oracle::random_latent(rng, 4, 3, 3)};
    const VPrediction vn{oracle::random_latent(rng, 4, 3, 3)};
    CHECK(masked_guidance(vp, vn, MaskMap(3, 3, 1.0), 1.0).tensor == vp.tensor);
    CHECK(masked_guidance(vp, vn, MaskMap(3, 3), 3.0).tensor == vp.tensor);

    const VPrediction a{LatentTensor(1, 1, 1, 2.0f)};
    const VPrediction b{LatentTensor(1, 1, 1, 1.0f)};
    CHECK(masked_guidance(a, b, MaskMap(1, 1, 1.0), 3.0).tensor.at(0, 0, 0) == 4.0f);

    MaskMap half(3, 3);
    half.at(1, 1) = 0.5;
    const VPrediction h = masked_guidance(vp, vn, half, 3.0);
    for (int c = 0; c < 4; ++c) {
        const double p = vp.tensor.at(c, 1, 1);
        const double n = vn.tensor.at(c, 1, 1);
        CHECK(h.tensor.at(c, 1, 1) == doctest::Approx(0.5 * p + 0.5 * (n + 3.0 * (p - n))).epsilon(1e-6));
        CHECK(h.tensor.at(c, 0, 0) == vp.tensor.at(c, 0, 0));
    }
    CHECK_THROWS_AS(masked_guidance(vp, vn, MaskMap(2, 3), 3.0), DimensionMismatch);
}

TEST_CASE("config validation") {
    GuidanceConfig cfg;
    cfg.validate();
    cfg.gamma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.beta = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.dilation_kernel = 8;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("branch inputs") {
    const SceneBundle scene = fixture::make_toy_bundle(3);
    const BranchInputs pos = make_branch_inputs(scene, Branch::positive, NegativeMode::opposite);
    const BranchInputs neg = make_branch_inputs(scene, Branch::negative, NegativeMode::opposite);
    const BranchInputs none = make_branch_inputs(scene, Branch::negative, NegativeMode::noshadow);
    CHECK(pos.shadow_mask == scene.shadow_positive);
    CHECK(neg.shadow_mask == *scene.shadow_negative);
    CHECK(none.shadow_mask.all_zero());
    CHECK(*pos.intrinsics.find("shading") == *scene.shading_positive);
    CHECK(*neg.intrinsics.find("shading") == *scene.shading_negative);
    CHECK(none.guidance_composite ==
          make_guidance_composite(scene.background, scene.albedo, scene.object_mask, MaskMap(32, 32), 0.4));
}

TEST_CASE("locality: v is v_pos wherever the object mask is zero, at every step") {
    const SceneBundle scene = fixture::make_toy_bundle(5);
    ToyDenoiser toy;
    IdentityCodec codec;
    GuidanceConfig cfg = small_config(9);
    cfg.beta = 0.0;
    const BranchInputs pos = make_branch_inputs(scene, Branch::positive, cfg.negative);
    const BranchInputs neg = make_branch_inputs(scene, Branch::negative, cfg.negative);
    Recorder rec(toy);
    run_pass(pos, &neg, scene.shadow_positive, cfg, rec, codec);
    REQUIRE(rec.pos.size() == 20);
    REQUIRE(rec.neg.size() == 20);
    for (std::size_t i = 0; i < rec.pos.size(); ++i) {
        const VPrediction v = masked_guidance({rec.pos[i]}, {rec.neg[i]}, scene.object_mask, cfg.gamma);
        for (int c = 0; c < 3; ++c) {
            for (int y = 0; y < 32; ++y) {
                for (int x = 0; x < 32; ++x) {
                    if (scene.object_mask.at(x, y) == 0.0) {
                        REQUIRE(v.tensor.at(c, y, x) == rec.pos[i].at(c, y, x));
                    }
                }
            }
        }
    }
}

TEST_CASE("sampler identities") {
    const SceneBundle scene = fixture::make_toy_bundle(7);
    ToyDenoiser toy;
    IdentityCodec codec;

    GuidanceConfig g1 = small_config(4);
    g1.gamma = 1.0;
    GuidanceConfig pos_only = g1;
    pos_only.positive_only = true;
    pos_only.gamma = 3.0;
    CHECK(run_sampler(scene, g1, toy, codec).image_with == run_sampler(scene, pos_only, toy, codec).image_with);

    GuidanceConfig b0 = small_config(4);
    b0.beta = 0.0;
    GuidanceConfig off = small_config(4);
    off.blending = false;
    CHECK(run_sampler(scene, b0, toy, codec).image_with == run_sampler(scene, off, toy, codec).image_with);

    SceneBundle empty = scene;
    empty.shadow_positive = MaskMap(32, 32);
    GuidanceConfig off_empty = off;
    CHECK(run_sampler(empty, small_config(4), toy, codec).image_with ==
          run_sampler(empty, off_empty, toy, codec).image_with);

    const SamplerResult a = run_sampler(scene, small_config(11), toy, codec);
    const SamplerResult b = run_sampler(scene, small_config(11), toy, codec);
    CHECK(a.image_with == b.image_with);
    CHECK(a.image_without == b.image_without);
    CHECK(a.trace.size() == 20);
}

TEST_CASE("guided output is affine-increasing in gamma inside the object") {
    const SceneBundle scene = fixture::make_toy_bundle(8);
    ToyDenoiser toy;
    IdentityCodec codec;
    std::vector<PixelMap> out;
    for (double gamma : {1.0, 3.0, 7.0}) {
        GuidanceConfig cfg = small_config(2);
        cfg.beta = 0.0;
        cfg.gamma = gamma;
        out.push_back(run_sampler(scene, cfg, toy, codec).image_with);
    }
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            if (scene.object_mask.at(x, y) != 1.0) {
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                const double d1 = out[1].at(x, y, c) - out[0].at(x, y, c);
                const double d2 = out[2].at(x, y, c) - out[1].at(x, y, c);
                REQUIRE(d1 > 0.0);
                REQUIRE(d2 == doctest::Approx(2.0 * d1).epsilon(1e-3));
            }
        }
    }
}

TEST_CASE("denoiser failures carry the step index") {
    const SceneBundle scene = fixture::make_toy_bundle(1);
    IdentityCodec codec;
    Failing failing;
    try {
        run_sampler(scene, small_config(0), failing, codec);
        FAIL("expected a DenoiserError");
    } catch (const DenoiserError& e) {
        CHECK(e.step() == 3);
    }
    NanDenoiser nan;
    CHECK_THROWS_AS(run_sampler(scene, small_config(0), nan, codec), NumericalAbort);
}

TEST_CASE("eps-predicting denoisers are adapted to v") {
    const SceneBundle scene = fixture::make_toy_bundle(12);
    ToyDenoiser toy;
    class EpsToy final : public Denoiser {
    public:
        explicit EpsToy(ToyDenoiser& t) : toy_(t) {}
        PredictionKind prediction_kind() const noexcept override { return PredictionKind::eps; }
        LatentTensor denoise(const LatentTensor& z, const BranchInputs& in, int t, Branch b) override {
            return eps_from_ab(z, {toy_.denoise(z, in, t, b)}, toy_.schedule().alpha_bar(t));
        }

    private:
        ToyDenoiser& toy_;
    } eps(toy);
    IdentityCodec codec;
    GuidanceConfig cfg = small_config(3);
    const PixelMap a = run_sampler(scene, cfg, toy, codec).image_with;
    const PixelMap b = run_sampler(scene, cfg, eps, codec).image_with;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        REQUIRE(std::abs(a.data()[i] - b.data()[i]) < 1e-3);
    }
}
