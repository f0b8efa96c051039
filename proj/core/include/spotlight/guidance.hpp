#pragma once

// Shadow-conditioned sampler: per-step latent shadow blending, two denoiser
// branches, object-masked guidance and the DDIM loop.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spotlight/image.hpp"
#include "spotlight/imagecore.hpp"
#include "spotlight/rng.hpp"
#include "spotlight/scheduler.hpp"

namespace spotlight {

enum class NegativeMode { opposite, noshadow };
enum class PredictionKind : std::uint8_t { v = 0, eps = 1 };
enum class Branch : std::uint8_t { positive = 0, negative = 1 };

struct GuidanceConfig {
    double gamma = 3.0;
    double beta = 0.05;
    int dilation_kernel = kDefaultDilationKernel;
    int steps = kDefaultInferenceSteps;
    int train_steps = kDefaultTrainSteps;
    std::uint64_t seed = 0;
    NegativeMode negative = NegativeMode::opposite;
    // Skip the negative branch entirely; the guided prediction is v_pos.
    bool positive_only = false;
    // Disable the per-step latent blend (equivalent to beta = 0).
    bool blending = true;

    void validate() const;
};

/// Conditioning for one denoiser branch, at image resolution.
struct BranchInputs {
    IntrinsicStack intrinsics;
    MaskMap shadow_mask;
    PixelMap guidance_composite;
    MaskMap object_mask;
};

class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual PredictionKind prediction_kind() const noexcept = 0;
    // True when two denoise() calls may run concurrently.
    virtual bool reentrant() const noexcept { return false; }
    // Returns a prediction of the latent's shape in prediction_kind() form.
    virtual LatentTensor denoise(const LatentTensor& z, const BranchInputs& inputs, int t,
                                 Branch branch) = 0;
};

class Codec {
public:
    virtual ~Codec() = default;
    virtual int downscale() const noexcept = 0;
    virtual int latent_channels() const noexcept = 0;
    virtual LatentTensor encode(const PixelMap& img) = 0;
    virtual PixelMap decode(const LatentTensor& latent) = 0;
};

/// Everything one render job needs, already in linear space.
struct SceneBundle {
    PixelMap background;
    PixelMap albedo;  // object albedo, full frame
    MaskMap object_mask;
    IntrinsicStack intrinsics;
    MaskMap shadow_positive;
    // Absent: the negative branch casts no shadow.
    std::optional<MaskMap> shadow_negative;
    // Optional per-branch shading channels handed to the denoiser.
    std::optional<PixelMap> shading_positive;
    std::optional<PixelMap> shading_negative;
    double shadow_gain = kDefaultShadowGain;

    void validate() const;
};

struct StepTrace {
    int step = 0;
    int t = 0;
    int t_prev = 0;
    // Mean |v_pos − v_neg| over latent cells with object weight > 0.
    double branch_gap = 0.0;
    // Sum of β·m over the latent grid.
    double blend_weight = 0.0;
    double latent_rms = 0.0;
};

struct SamplerResult {
    PixelMap image_with;
    PixelMap image_without;
    std::vector<StepTrace> trace;
};

// z̃ = (1 − β·m)⊙z + (β·m)⊙add_noise(g_lat, ε, t), ε drawn from `noise`.
// Cells with β·m = 0 are copied bitwise. The noise is drawn whether or not
// it is used, so the stream position never depends on β or the mask.
LatentTensor blend_shadow_latents(const LatentTensor& z_t, const LatentTensor& g_lat,
                                  const MaskMap& m_shw_lat, const NoiseSchedule& schedule, int t,
                                  double beta, NormalStream& noise);

// ṽ = (1−m)⊙v_pos + m⊙(v_neg + γ(v_pos − v_neg)), mask broadcast over channels.
// Returns v_pos bitwise where m = 0 and everywhere when γ = 1.
VPrediction masked_guidance(const VPrediction& v_pos, const VPrediction& v_neg,
                            const MaskMap& m_obj_lat, double gamma);

// Builds the positive or negative conditioning for a scene.
BranchInputs make_branch_inputs(const SceneBundle& scene, Branch branch, NegativeMode mode);

// Runs the guided pass and, from the same seed, the pass without shadow
// guidance (empty shadow mask, γ = 1) used for the shadow matte.
SamplerResult run_sampler(const SceneBundle& scene, const GuidanceConfig& cfg, Denoiser& f,
                          Codec& codec);

// One guided denoising pass. Exposed for tests and for callers that only
// need a single render.
PixelMap run_pass(const BranchInputs& positive, const BranchInputs* negative, const MaskMap& blend_mask,
                  const GuidanceConfig& cfg, Denoiser& f, Codec& codec,
                  std::vector<StepTrace>* trace = nullptr);

}  // namespace spotlight
