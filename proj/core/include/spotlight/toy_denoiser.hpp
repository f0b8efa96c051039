#pragma once

#include <functional>

#include "spotlight/guidance.hpp"

namespace spotlight {

// Channel-major copy of an interleaved image: (W,H,C) -> (C,H,W).
LatentTensor pixels_to_latent(const PixelMap& img);
PixelMap latent_to_pixels(const LatentTensor& lat, ColorSpace space = ColorSpace::linear);

/// Downscale-1 codec: the latent is the image itself.
class IdentityCodec final : public Codec {
public:
    explicit IdentityCodec(int channels = 3) : channels_(channels) {}
    int downscale() const noexcept override { return 1; }
    int latent_channels() const noexcept override { return channels_; }
    LatentTensor encode(const PixelMap& img) override;
    PixelMap decode(const LatentTensor& latent) override;

private:
    int channels_;
};

enum class ToyTargetRule {
    // T = guidance composite of the branch.
    composite,
    // As composite, with the object region multiplied by the branch's
    // "shading" intrinsic when one is present.
    shaded_composite,
};

/// Analytic denoiser whose v-prediction drives DDIM exactly onto a target T
/// computed from the branch inputs:
///   ε̂ = (z̃ − √ᾱ·T)/√(1−ᾱ),  v = √ᾱ·ε̂ − √(1−ᾱ)·T.
class ToyDenoiser final : public Denoiser {
public:
    using CustomRule = std::function<LatentTensor(const BranchInputs&, Branch, int width, int height)>;

    explicit ToyDenoiser(ToyTargetRule rule = ToyTargetRule::shaded_composite,
                         int train_steps = kDefaultTrainSteps);
    // Target supplied by the caller; must return a latent of the requested size.
    explicit ToyDenoiser(CustomRule rule, int train_steps = kDefaultTrainSteps);

    PredictionKind prediction_kind() const noexcept override { return PredictionKind::v; }
    bool reentrant() const noexcept override { return true; }
    LatentTensor denoise(const LatentTensor& z, const BranchInputs& inputs, int t, Branch branch) override;

    LatentTensor target(const BranchInputs& inputs, Branch branch, int width, int height) const;
    const NoiseSchedule& schedule() const noexcept { return schedule_; }

private:
    ToyTargetRule rule_;
    CustomRule custom_;
    NoiseSchedule schedule_;
};

// The v-prediction that sends z toward `target` at ᾱ (exposed for the
// sidecar reference server and tests).
LatentTensor toy_v_prediction(const LatentTensor& z, const LatentTensor& target, double alpha_bar);

}  // namespace spotlight
